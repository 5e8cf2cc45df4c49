"""Circular masks and the most-activated-region search.

Coordinates are ``(x, y)`` = (row, column). A disk of radius ``r`` is the
closed Euclidean ball, so radius 0 selects exactly one pixel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .exceptions import ShapeError


class PixelCoord(NamedTuple):
    x: int  # row
    y: int  # column


@dataclass(frozen=True)
class RadiusSchedule:
    r0: float = 1.0
    r_max: float = 150.0
    ramp_iters: int = 150

    def __post_init__(self):
        if self.r0 < 0 or self.r0 > self.r_max:
            raise ValueError(f"need 0 <= r0 <= r_max, got r0={self.r0}, r_max={self.r_max}")
        if self.ramp_iters < 1:
            raise ValueError("ramp_iters must be >= 1")


def radius_at(i: int, sched: RadiusSchedule = RadiusSchedule()) -> float:
    """Linear growth from ``r0`` to ``r_max`` over ``ramp_iters``, then constant."""
    if i < 0:
        raise ValueError("iteration index must be >= 0")
    if i >= sched.ramp_iters:
        return float(sched.r_max)
    return sched.r0 + (sched.r_max - sched.r0) * (i / sched.ramp_iters)


def _check_center(center, extent):
    h, w = extent
    x, y = int(center[0]), int(center[1])
    if not (0 <= x < h and 0 <= y < w):
        raise ValueError(f"center {tuple(center)} outside {h}x{w} image")
    return PixelCoord(x, y)


def circ(center, radius: float, extent) -> np.ndarray:
    """``(H, W)`` float mask: 1 inside the closed disk, 0 outside."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    h, w = int(extent[0]), int(extent[1])
    c = _check_center(center, (h, w))
    rows = np.arange(h)[:, None] - c.x
    cols = np.arange(w)[None, :] - c.y
    return (rows * rows + cols * cols <= radius * radius).astype(np.float64)


@dataclass(frozen=True)
class CircMask:
    center: PixelCoord
    radius: float
    extent: tuple

    def array(self) -> np.ndarray:
        return circ(self.center, self.radius, self.extent)


def disk_kernel(radius: float) -> np.ndarray:
    k = int(np.floor(radius))
    d = np.arange(-k, k + 1)
    return (d[:, None] ** 2 + d[None, :] ** 2 <= radius * radius).astype(np.float64)


def region_scores(lr_map, radius: float) -> np.ndarray:
    """Sum of ``|lr_map|`` (channels summed) inside the disk around every pixel.

    Disks that cross the border are clipped.
    """
    v = np.abs(np.asarray(lr_map, dtype=np.float64))
    if v.ndim == 3:
        v = v.sum(axis=2)
    return ndimage.correlate(v, disk_kernel(radius), mode="constant", cval=0.0)


def most_activated_center(lr_map, radius: float) -> PixelCoord:
    """Center whose disk holds the largest total ``|lr_map|``.

    Scores equal to the maximum within a relative 1e-12 count as ties and
    go to the smallest row-major index.
    """
    if not radius > 0:
        raise ValueError("selection radius must be positive")
    values = getattr(lr_map, "values", lr_map)
    scores = region_scores(values, radius)
    best = scores.max()
    flat = int(np.flatnonzero(scores >= best - 1e-12 * abs(best))[0])
    x, y = np.unravel_index(flat, scores.shape)
    return PixelCoord(int(x), int(y))


def apply_mask(lr_map, mask) -> np.ndarray:
    """Element-wise product; the result is deliberately not renormalised."""
    values = np.asarray(getattr(lr_map, "values", lr_map), dtype=np.float64)
    m = mask.array() if isinstance(mask, CircMask) else np.asarray(mask, dtype=np.float64)
    if m.ndim == 2:
        m = m[:, :, None]
    if m.shape[:2] != values.shape[:2] or m.shape[2] not in (1, values.shape[2]):
        raise ShapeError(f"mask {m.shape} incompatible with lr map {values.shape}")
    return values * m
