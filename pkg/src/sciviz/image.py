"""Image tensors, canvas initialisation, raster I/O and the IDX dataset reader.

Images are plain ``float64`` arrays of shape ``(H, W, C)`` holding
intensities in ``[0, 255]``. Every public function that produces an image
returns a fresh array; nothing here mutates its inputs.
"""

from __future__ import annotations

import gzip
import importlib.util
import os
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .exceptions import CorruptFileError, ShapeError
from .validation import check_image, check_images

INTENSITY_MIN = 0.0
INTENSITY_MAX = 255.0

MNIST_DIR_ENV = "SCIVIZ_MNIST_DIR"


def clamp(img: np.ndarray) -> np.ndarray:
    """Clip intensities to ``[0, 255]``."""
    return np.clip(img, INTENSITY_MIN, INTENSITY_MAX)


def dataset_mean(images) -> np.ndarray:
    """Per-element arithmetic mean of a collection of equally shaped images.

    ``images`` may be an ``(N, H, W[, C])`` array or any iterable of
    ``(H, W[, C])`` arrays. Iterables are consumed in a single streaming pass.
    """
    if isinstance(images, np.ndarray):
        if images.shape[0] == 0:
            raise ValueError("cannot take the mean of an empty dataset")
        batch = check_images(images, name="images")
        return batch.mean(axis=0)

    total = None
    count = 0
    for img in images:
        arr = check_image(img)
        if total is None:
            total = np.zeros_like(arr)
        elif arr.shape != total.shape:
            raise ShapeError(f"image {count} has shape {arr.shape}, expected {total.shape}")
        total += arr
        count += 1
    if count == 0:
        raise ValueError("cannot take the mean of an empty dataset")
    return total / count


def constant_image(shape, value: float = 127.5) -> np.ndarray:
    """Constant-fill canvas, the alternative to a dataset mean."""
    if len(shape) == 2:
        shape = (*shape, 1)
    return clamp(np.full(shape, float(value)))


def init_canvas(mean: np.ndarray, noise_amplitude: float, seed: int) -> np.ndarray:
    """``clamp(mean + U[0, noise_amplitude])`` drawn independently per element."""
    if noise_amplitude < 0:
        raise ValueError(f"noise_amplitude must be >= 0, got {noise_amplitude}")
    mean = check_image(mean, name="mean")
    rng = np.random.default_rng(seed)
    noise = rng.uniform(0.0, noise_amplitude, size=mean.shape)
    return clamp(mean + noise)


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Quantise to 8 bits, rounding half up."""
    return np.floor(clamp(img) + 0.5).astype(np.uint8)


def write_image(img: np.ndarray, path) -> None:
    """Write ``img`` as an 8-bit PNG (grayscale for C=1, RGB for C=3)."""
    img = check_image(img)
    q = to_uint8(img)
    if q.shape[2] == 1:
        pil = Image.fromarray(q[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(q, mode="RGB")
    pil.save(os.fspath(path), format="PNG")


def read_image(path) -> np.ndarray:
    """Read a PNG written by :func:`write_image` back to float64 ``(H, W, C)``."""
    try:
        with Image.open(os.fspath(path)) as pil:
            pil.load()
            if pil.mode not in ("L", "RGB"):
                pil = pil.convert("RGB")
            arr = np.asarray(pil, dtype=np.float64)
    except (OSError, SyntaxError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise CorruptFileError(f"cannot decode image {path}: {exc}") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return arr


# --------------------------------------------------------------------------
# IDX files

_IDX_DTYPES = {
    0x08: np.dtype(np.uint8),
    0x09: np.dtype(np.int8),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}


def _open_maybe_gzip(path, mode="rb"):
    path = os.fspath(path)
    if path.endswith(".gz"):
        return gzip.open(path, mode)
    return open(path, mode)


def read_idx(path) -> np.ndarray:
    """Read an IDX file (optionally gzip-compressed)."""
    with _open_maybe_gzip(path) as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[0] != 0 or raw[1] != 0:
        raise CorruptFileError(f"{path}: bad IDX magic")
    code, ndim = raw[2], raw[3]
    if code not in _IDX_DTYPES:
        raise CorruptFileError(f"{path}: unknown IDX type code {code:#x}")
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise CorruptFileError(f"{path}: truncated IDX header")
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    dtype = _IDX_DTYPES[code]
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    if len(raw) - header != expected:
        raise CorruptFileError(
            f"{path}: expected {expected} payload bytes, found {len(raw) - header}"
        )
    return np.frombuffer(raw, dtype=dtype, offset=header).reshape(dims).astype(dtype.newbyteorder("="))


def write_idx(arr: np.ndarray, path) -> None:
    """Write an unsigned-byte array as IDX."""
    arr = np.asarray(arr)
    if arr.dtype != np.uint8:
        raise ValueError("write_idx only supports uint8 arrays")
    header = bytes([0, 0, 0x08, arr.ndim]) + struct.pack(f">{arr.ndim}I", *arr.shape)
    with _open_maybe_gzip(path, "wb") as fh:
        fh.write(header + arr.tobytes())


_MNIST_FILES = {
    "X_train": "train-images-idx3-ubyte",
    "y_train": "train-labels-idx1-ubyte",
    "X_test": "t10k-images-idx3-ubyte",
    "y_test": "t10k-labels-idx1-ubyte",
}


def _find_idx(directory: Path, stem: str) -> Path | None:
    for name in (stem, stem + ".gz", stem.replace("-idx", ".idx")):
        p = directory / name
        if p.exists():
            return p
    return None


def _bundled_subset(test_per_class: int = 100):
    """Real MNIST digits shipped with mlxtend (500 per class)."""
    found = importlib.util.find_spec("mlxtend")
    if found is None or not found.submodule_search_locations:
        raise FileNotFoundError(
            f"no MNIST IDX directory given (set {MNIST_DIR_ENV}) and mlxtend is not installed"
        )
    path = Path(list(found.submodule_search_locations)[0]) / "data" / "data" / "mnist_5k.csv.gz"
    with gzip.open(path, "rt") as fh:
        table = np.loadtxt(fh, delimiter=",", dtype=np.float64)
    X = table[:, :-1].astype(np.uint8).reshape(-1, 28, 28)
    y = table[:, -1].astype(np.uint8)
    test_idx = []
    train_idx = []
    for c in range(10):
        idx = np.flatnonzero(y == c)
        train_idx.append(idx[:-test_per_class])
        test_idx.append(idx[-test_per_class:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    return X[train_idx], y[train_idx], X[test_idx], y[test_idx]


def load_mnist(data_dir=None):
    """Return ``(X_train, y_train, X_test, y_test)`` as uint8 arrays.

    Images have shape ``(N, 28, 28)``. The standard four IDX files are read
    from ``data_dir`` (or ``$SCIVIZ_MNIST_DIR``). Without a directory, the
    5000-digit MNIST subset bundled with ``mlxtend`` is used, split
    deterministically into 400 train / 100 test digits per class.
    """
    data_dir = data_dir or os.environ.get(MNIST_DIR_ENV)
    if not data_dir:
        return _bundled_subset()
    directory = Path(data_dir)
    out = {}
    for key, stem in _MNIST_FILES.items():
        p = _find_idx(directory, stem)
        if p is None:
            raise FileNotFoundError(f"{stem}[.gz] not found in {directory}")
        out[key] = read_idx(p)
    for split in ("train", "test"):
        if len(out[f"X_{split}"]) != len(out[f"y_{split}"]):
            raise CorruptFileError(f"{split} images and labels differ in length")
    return out["X_train"], out["y_train"], out["X_test"], out["y_test"]
