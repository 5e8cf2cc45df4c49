"""Random rotation / scaling / crop / jitter applied between iterations.

Order is fixed: rotate -> scale (one affine resample about the image
center) -> crop and resize back -> per-channel jitter -> clamp. All
resampling is bilinear; samples falling outside the image take the
per-channel mean of the image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import clamp
from .validation import check_image

_SNAP = 1e-9


@dataclass(frozen=True)
class TransformParams:
    rotation_deg: float = 5.0
    scale_min: float = 0.95
    scale_max: float = 1.05
    crop_pad: int | None = None  # None -> ceil(S / 16)
    jitter: float = 10.0
    apply_probability: float = 1.0
    enabled: bool = True

    def __post_init__(self):
        if self.rotation_deg < 0:
            raise ValueError("rotation_deg is a half-range and must be >= 0")
        if not 0 < self.scale_min <= self.scale_max:
            raise ValueError("need 0 < scale_min <= scale_max")
        if self.crop_pad is not None and self.crop_pad < 0:
            raise ValueError("crop_pad must be >= 0")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")
        if not 0.0 <= self.apply_probability <= 1.0:
            raise ValueError("apply_probability must lie in [0, 1]")

    def pad_for(self, size: int) -> int:
        return math.ceil(size / 16) if self.crop_pad is None else int(self.crop_pad)


@dataclass(frozen=True)
class TransformSample:
    angle: float = 0.0  # degrees, positive turns clockwise on screen (rows point down)
    scale: float = 1.0
    crop_offset: tuple | None = None  # (row, col) of the crop window
    crop_pad: int = 0
    jitter: tuple = ()

    @property
    def is_identity(self) -> bool:
        return (self.angle == 0.0 and self.scale == 1.0
                and (self.crop_offset is None or self.crop_pad == 0)
                and not any(self.jitter))


IDENTITY = TransformSample()


def sample_transform(params: TransformParams, rng: np.random.Generator, shape) -> TransformSample:
    """Draw one transform for an image of ``shape = (H, W, C)``.

    The same number of values is drawn whether or not the transform ends up
    applied, so the stream position depends only on the call count.
    """
    if not params.enabled:
        return IDENTITY
    h, w, c = shape
    pad = min(params.pad_for(min(h, w)), (min(h, w) - 1) // 2)
    apply = rng.random() < params.apply_probability
    angle = rng.uniform(-params.rotation_deg, params.rotation_deg)
    scale = rng.uniform(params.scale_min, params.scale_max)
    offset = (int(rng.integers(0, 2 * pad + 1)), int(rng.integers(0, 2 * pad + 1)))
    jitter = rng.uniform(-params.jitter, params.jitter, size=c)
    if not apply:
        return IDENTITY
    return TransformSample(float(angle), float(scale), offset, pad, tuple(float(j) for j in jitter))


def _snap(a):
    r = np.round(a)
    return np.where(np.abs(a - r) < _SNAP, r, a)


def bilinear_sample(img: np.ndarray, sy: np.ndarray, sx: np.ndarray, fill: np.ndarray) -> np.ndarray:
    """Sample ``img`` at fractional ``(sy, sx)``; outside the grid use ``fill``."""
    h, w, _ = img.shape
    sy = _snap(sy)
    sx = _snap(sx)
    inside = (sy >= 0) & (sy <= h - 1) & (sx >= 0) & (sx <= w - 1)
    y0 = np.clip(np.floor(sy), 0, max(h - 2, 0)).astype(int)
    x0 = np.clip(np.floor(sx), 0, max(w - 2, 0)).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = np.clip(sy - y0, 0.0, 1.0)[..., None]
    wx = np.clip(sx - x0, 0.0, 1.0)[..., None]
    top = img[y0, x0] * (1 - wx) + img[y0, x1] * wx
    bottom = img[y1, x0] * (1 - wx) + img[y1, x1] * wx
    out = top * (1 - wy) + bottom * wy
    return np.where(inside[..., None], out, fill)


def _rotate_scale(img, angle_deg, scale):
    h, w, _ = img.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    t = math.radians(angle_deg)
    cos, sin = math.cos(t), math.sin(t)
    rows, cols = np.mgrid[0:h, 0:w].astype(np.float64)
    dy, dx = rows - cy, cols - cx
    sx = (cos * dx + sin * dy) / scale + cx
    sy = (-sin * dx + cos * dy) / scale + cy
    return bilinear_sample(img, sy, sx, img.mean(axis=(0, 1)))


def _crop_resize(img, offset, pad):
    h, w, _ = img.shape
    ch, cw = h - 2 * pad, w - 2 * pad
    oy, ox = offset
    rows, cols = np.mgrid[0:h, 0:w].astype(np.float64)
    sy = oy + rows * ((ch - 1) / (h - 1) if h > 1 else 0.0)
    sx = ox + cols * ((cw - 1) / (w - 1) if w > 1 else 0.0)
    return bilinear_sample(img, sy, sx, img.mean(axis=(0, 1)))


def apply_transform(img, s: TransformSample) -> np.ndarray:
    img = check_image(img)
    if s.scale <= 0:
        raise ValueError("scale must be positive")
    if s.is_identity:
        return img.copy()
    out = img
    if s.angle != 0.0 or s.scale != 1.0:
        out = _rotate_scale(out, s.angle, s.scale)
    if s.crop_offset is not None and s.crop_pad > 0:
        out = _crop_resize(out, s.crop_offset, s.crop_pad)
    if any(s.jitter):
        jitter = np.asarray(s.jitter, dtype=np.float64)
        if jitter.size not in (1, out.shape[2]):
            raise ValueError(f"jitter has {jitter.size} entries for {out.shape[2]} channels")
        out = out + jitter
    return clamp(out)
