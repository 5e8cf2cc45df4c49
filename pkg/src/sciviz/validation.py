"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import numpy as np

from .exceptions import NumericalError, ShapeError


def check_image(img, *, name="image", copy=False) -> np.ndarray:
    """Return ``img`` as a finite float64 ``(H, W, C)`` array.

    A 2-D array is promoted to a single channel. Channels must be 1 or 3.
    """
    arr = np.array(img, dtype=np.float64) if copy else np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ShapeError(f"{name} must be (H, W) or (H, W, C), got shape {arr.shape}")
    if arr.shape[2] not in (1, 3):
        raise ShapeError(f"{name} must have 1 or 3 channels, got {arr.shape[2]}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} is empty: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains NaN or Inf")
    return arr


def check_images(X, input_shape=None, *, name="X") -> np.ndarray:
    """Return a batch of images as a float64 ``(N, H, W, C)`` array.

    Accepts ``(N, H, W, C)``, ``(N, H, W)`` or, when ``input_shape`` is
    given, flat ``(N, H*W*C)`` rows as produced by most tabular loaders.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2 and input_shape is not None:
        if arr.shape[1] != int(np.prod(input_shape)):
            raise ShapeError(
                f"{name} has {arr.shape[1]} features, expected {int(np.prod(input_shape))}"
            )
        arr = arr.reshape((arr.shape[0],) + tuple(input_shape))
    elif arr.ndim == 3:
        arr = arr[..., None]
    if arr.ndim != 4:
        raise ShapeError(f"{name} must be a batch of images, got shape {arr.shape}")
    if input_shape is not None and arr.shape[1:] != tuple(input_shape):
        raise ShapeError(f"{name} images have shape {arr.shape[1:]}, expected {tuple(input_shape)}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains NaN or Inf")
    return arr


def check_class_index(c, num_classes) -> int:
    if isinstance(c, (bool, np.bool_)) or int(c) != c:
        raise ValueError(f"class index must be an integer, got {c!r}")
    c = int(c)
    if not 0 <= c < num_classes:
        raise ValueError(f"class index {c} out of range [0, {num_classes})")
    return c


def check_same_shape(a: np.ndarray, b: np.ndarray, what="arrays") -> None:
    if np.shape(a) != np.shape(b):
        raise ShapeError(f"{what} differ in shape: {np.shape(a)} vs {np.shape(b)}")
