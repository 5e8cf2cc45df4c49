"""A small differentiable convolutional classifier written directly in numpy.

The network maps an image in intensity units ``[0, 255]`` to pre-softmax
logits. Intensities are normalised internally with ``(v - 127.5) / 127.5``
before the first layer, and :func:`input_gradient` folds that scaling back
in, so gradients are always with respect to raw intensities.

Tensors use NHWC layout throughout. Synthesis-path arithmetic is float64.

Anything that exposes ``num_classes``, ``input_shape``,
``forward_logits(img)`` and ``input_gradient(img, objective)`` satisfies
the :class:`Classifier` protocol and can drive the synthesizer.
"""

from __future__ import annotations

import hashlib
import json
import logging
import struct
import zlib
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import (
    CorruptFileError,
    FingerprintMismatchError,
    NumericalError,
    ShapeError,
    TrainingDivergedError,
)
from .validation import check_class_index, check_image

logger = logging.getLogger(__name__)

NORM_CENTER = 127.5
NORM_SCALE = 127.5

LAYER_KINDS = ("conv", "relu", "maxpool", "flatten", "dense")


@runtime_checkable
class Classifier(Protocol):
    """Minimal contract the synthesizer depends on."""

    num_classes: int
    input_shape: tuple

    def forward_logits(self, img: np.ndarray) -> np.ndarray: ...

    def input_gradient(self, img: np.ndarray, objective) -> np.ndarray: ...


@dataclass(frozen=True)
class LayerSpec:
    """One layer of the network.

    ``conv`` uses ``kernel``, ``in_channels``, ``out_channels``, ``stride``
    and ``padding`` (``"same"`` or ``"valid"``); ``maxpool`` uses ``pool``
    (non-overlapping, stride equals pool size, trailing rows dropped);
    ``dense`` uses ``in_features`` and ``out_features``.
    """

    kind: str
    kernel: tuple = (0, 0)
    in_channels: int = 0
    out_channels: int = 0
    stride: int = 1
    padding: str = "same"
    pool: int = 2
    in_features: int = 0
    out_features: int = 0

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.kind == "conv" and self.padding not in ("same", "valid"):
            raise ValueError(f"padding must be 'same' or 'valid', got {self.padding!r}")
        object.__setattr__(self, "kernel", tuple(int(k) for k in self.kernel))

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "conv":
            d.update(kernel=list(self.kernel), in_channels=self.in_channels,
                     out_channels=self.out_channels, stride=self.stride, padding=self.padding)
        elif self.kind == "maxpool":
            d.update(pool=self.pool)
        elif self.kind == "dense":
            d.update(in_features=self.in_features, out_features=self.out_features)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LayerSpec":
        d = dict(d)
        if "kernel" in d:
            d["kernel"] = tuple(d["kernel"])
        return cls(**d)

    @property
    def has_params(self) -> bool:
        return self.kind in ("conv", "dense")


def conv(kernel, in_channels, out_channels, stride=1, padding="same") -> LayerSpec:
    if np.isscalar(kernel):
        kernel = (kernel, kernel)
    return LayerSpec("conv", kernel=kernel, in_channels=in_channels,
                     out_channels=out_channels, stride=stride, padding=padding)


def dense(in_features, out_features) -> LayerSpec:
    return LayerSpec("dense", in_features=in_features, out_features=out_features)


def default_architecture(input_shape=(28, 28, 1), num_classes=10) -> tuple:
    """conv3x3x16 -> relu -> pool2 -> conv3x3x32 -> relu -> pool2 -> flatten -> dense."""
    h, w, c = input_shape
    flat = (h // 2 // 2) * (w // 2 // 2) * 32
    return (
        conv(3, c, 16),
        LayerSpec("relu"),
        LayerSpec("maxpool", pool=2),
        conv(3, 16, 32),
        LayerSpec("relu"),
        LayerSpec("maxpool", pool=2),
        LayerSpec("flatten"),
        dense(flat, num_classes),
    )


def _conv_out(n, k, stride, padding):
    if padding == "same":
        return -(-n // stride)
    return (n - k) // stride + 1


def _same_pads(n, k, stride):
    out = -(-n // stride)
    total = max((out - 1) * stride + k - n, 0)
    return total // 2, total - total // 2


def infer_shapes(input_shape, layers) -> list:
    """Per-layer output shapes (without batch axis); raises on incompatibility."""
    shape = tuple(input_shape)
    shapes = []
    for i, layer in enumerate(layers):
        if layer.kind == "conv":
            if len(shape) != 3 or shape[2] != layer.in_channels:
                raise ShapeError(f"layer {i} (conv) expects {layer.in_channels} channels, got {shape}")
            kh, kw = layer.kernel
            ho = _conv_out(shape[0], kh, layer.stride, layer.padding)
            wo = _conv_out(shape[1], kw, layer.stride, layer.padding)
            if ho < 1 or wo < 1:
                raise ShapeError(f"layer {i} (conv) produces empty output from {shape}")
            shape = (ho, wo, layer.out_channels)
        elif layer.kind == "maxpool":
            if len(shape) != 3 or shape[0] < layer.pool or shape[1] < layer.pool:
                raise ShapeError(f"layer {i} (maxpool) cannot pool {shape}")
            shape = (shape[0] // layer.pool, shape[1] // layer.pool, shape[2])
        elif layer.kind == "flatten":
            shape = (int(np.prod(shape)),)
        elif layer.kind == "dense":
            if len(shape) != 1 or shape[0] != layer.in_features:
                raise ShapeError(f"layer {i} (dense) expects {layer.in_features} features, got {shape}")
            shape = (layer.out_features,)
        shapes.append(shape)
    if len(shape) != 1:
        raise ShapeError(f"network must end in a vector, ends in {shape}")
    return shapes


def architecture_fingerprint(input_shape, layers, num_classes) -> str:
    desc = {
        "input_shape": [int(s) for s in input_shape],
        "layers": [layer.to_dict() for layer in layers],
        "num_classes": int(num_classes),
    }
    blob = json.dumps(desc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass
class NetworkWeights:
    """Architecture plus per-layer parameters.

    ``params[i]`` is ``(kernel, bias)`` for conv/dense layers and ``None``
    otherwise. Conv kernels are ``(kh, kw, in, out)``; dense matrices are
    ``(in, out)``.
    """

    input_shape: tuple
    layers: tuple
    params: list
    num_classes: int = field(init=False)

    def __post_init__(self):
        self.input_shape = tuple(int(s) for s in self.input_shape)
        self.layers = tuple(self.layers)
        shapes = infer_shapes(self.input_shape, self.layers)
        self.num_classes = shapes[-1][0]
        if len(self.params) != len(self.layers):
            raise ShapeError("params and layers differ in length")
        for i, (layer, p) in enumerate(zip(self.layers, self.params)):
            if layer.has_params:
                if p is None or len(p) != 2:
                    raise ShapeError(f"layer {i} ({layer.kind}) needs (kernel, bias)")
                k, b = p
                if layer.kind == "conv":
                    want = (*layer.kernel, layer.in_channels, layer.out_channels)
                    nb = layer.out_channels
                else:
                    want = (layer.in_features, layer.out_features)
                    nb = layer.out_features
                if np.shape(k) != want or np.shape(b) != (nb,):
                    raise ShapeError(f"layer {i} parameters have wrong shape")
                if not (np.all(np.isfinite(k)) and np.all(np.isfinite(b))):
                    raise NumericalError(f"layer {i} parameters contain NaN or Inf")
            elif p is not None:
                raise ShapeError(f"layer {i} ({layer.kind}) takes no parameters")

    @property
    def fingerprint(self) -> str:
        return architecture_fingerprint(self.input_shape, self.layers, self.num_classes)

    def copy(self) -> "NetworkWeights":
        return NetworkWeights(
            self.input_shape,
            self.layers,
            [None if p is None else (p[0].copy(), p[1].copy()) for p in self.params],
        )

    def tensors(self) -> list:
        return [t for p in self.params if p is not None for t in p]


def init_weights(input_shape=(28, 28, 1), layers=None, seed=0, scale="he") -> NetworkWeights:
    """He-normal kernels, zero biases; ``scale="zero"`` gives all-zero parameters."""
    if layers is None:
        layers = default_architecture(input_shape)
    rng = np.random.default_rng(seed)
    params = []
    for layer in layers:
        if layer.kind == "conv":
            kh, kw = layer.kernel
            shape = (kh, kw, layer.in_channels, layer.out_channels)
            fan_in = kh * kw * layer.in_channels
            nb = layer.out_channels
        elif layer.kind == "dense":
            shape = (layer.in_features, layer.out_features)
            fan_in = layer.in_features
            nb = layer.out_features
        else:
            params.append(None)
            continue
        if scale == "zero":
            k = np.zeros(shape)
        else:
            k = rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)
        params.append((k, np.zeros(nb)))
    return NetworkWeights(input_shape, layers, params)


# --------------------------------------------------------------------------
# layer kernels


def _pad_input(x, layer):
    kh, kw = layer.kernel
    if layer.padding == "valid":
        return x, (0, 0)
    pt, pb = _same_pads(x.shape[1], kh, layer.stride)
    pl, pr = _same_pads(x.shape[2], kw, layer.stride)
    return np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0))), (pt, pl)


def _conv_windows(xp, layer, out_hw):
    kh, kw = layer.kernel
    s = layer.stride
    ho, wo = out_hw
    win = sliding_window_view(xp, (kh, kw), axis=(1, 2))  # (N, H', W', C, kh, kw)
    return win[:, : (ho - 1) * s + 1 : s, : (wo - 1) * s + 1 : s]


def _conv_forward(x, kernel, bias, layer):
    n, h, w, _ = x.shape
    kh, kw = layer.kernel
    ho = _conv_out(h, kh, layer.stride, layer.padding)
    wo = _conv_out(w, kw, layer.stride, layer.padding)
    xp, _ = _pad_input(x, layer)
    win = _conv_windows(xp, layer, (ho, wo))
    out = np.tensordot(win, kernel, axes=([3, 4, 5], [2, 0, 1])) + bias
    return out, (x.shape, xp.shape, win)


def _conv_backward(dout, kernel, cache, layer, need_params):
    x_shape, xp_shape, win = cache
    kh, kw = layer.kernel
    s = layer.stride
    _, ho, wo, _ = dout.shape
    dk = db = None
    if need_params:
        dk = np.tensordot(win, dout, axes=([0, 1, 2], [0, 1, 2])).transpose(1, 2, 0, 3)
        db = dout.sum(axis=(0, 1, 2))
    dcols = np.tensordot(dout, kernel, axes=([3], [3]))  # (N, Ho, Wo, kh, kw, Cin)
    dxp = np.zeros(xp_shape)
    for i in range(kh):
        for j in range(kw):
            dxp[:, i : i + s * (ho - 1) + 1 : s, j : j + s * (wo - 1) + 1 : s, :] += dcols[:, :, :, i, j, :]
    if layer.padding == "same":
        pt, _ = _same_pads(x_shape[1], kh, s)
        pl, _ = _same_pads(x_shape[2], kw, s)
        dxp = dxp[:, pt : pt + x_shape[1], pl : pl + x_shape[2], :]
    return dxp, dk, db


def _pool_forward(x, p):
    n, h, w, c = x.shape
    ho, wo = h // p, w // p
    xc = x[:, : ho * p, : wo * p, :]
    blocks = xc.reshape(n, ho, p, wo, p, c).transpose(0, 1, 3, 5, 2, 4).reshape(n, ho, wo, c, p * p)
    # np.argmax returns the first maximum: row-major tie-break inside each window
    arg = np.argmax(blocks, axis=-1)
    out = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]
    return out, (x.shape, arg)


def _pool_backward(dout, cache, p):
    x_shape, arg = cache
    n, h, w, c = x_shape
    ho, wo = h // p, w // p
    onehot = np.zeros((n, ho, wo, c, p * p))
    np.put_along_axis(onehot, arg[..., None], dout[..., None], axis=-1)
    dx = np.zeros(x_shape)
    dx[:, : ho * p, : wo * p, :] = (
        onehot.reshape(n, ho, wo, c, p, p).transpose(0, 1, 4, 2, 5, 3).reshape(n, ho * p, wo * p, c)
    )
    return dx


def normalize_intensity(x):
    return (np.asarray(x, dtype=np.float64) - NORM_CENTER) / NORM_SCALE


def _forward(weights: NetworkWeights, xn: np.ndarray, keep_cache=False):
    caches = []
    a = xn
    for layer, p in zip(weights.layers, weights.params):
        cache = None
        if layer.kind == "conv":
            a, cache = _conv_forward(a, p[0], p[1], layer)
        elif layer.kind == "relu":
            cache = a > 0
            a = np.where(cache, a, 0.0)
        elif layer.kind == "maxpool":
            a, cache = _pool_forward(a, layer.pool)
        elif layer.kind == "flatten":
            cache = a.shape
            a = a.reshape(a.shape[0], -1)
        elif layer.kind == "dense":
            cache = a
            a = a @ p[0] + p[1]
        if keep_cache:
            caches.append(cache)
    if not np.all(np.isfinite(a)):
        raise NumericalError("non-finite logits (exploding weights?)")
    return a, caches


def _backward(weights: NetworkWeights, caches, dlogits, need_params=False):
    grads = [None] * len(weights.layers)
    d = dlogits
    for idx in range(len(weights.layers) - 1, -1, -1):
        layer, p, cache = weights.layers[idx], weights.params[idx], caches[idx]
        if layer.kind == "conv":
            d, dk, db = _conv_backward(d, p[0], cache, layer, need_params)
            if need_params:
                grads[idx] = (dk, db)
        elif layer.kind == "relu":
            d = np.where(cache, d, 0.0)
        elif layer.kind == "maxpool":
            d = _pool_backward(d, cache, layer.pool)
        elif layer.kind == "flatten":
            d = d.reshape(cache)
        elif layer.kind == "dense":
            if need_params:
                grads[idx] = (cache.T @ d, d.sum(axis=0))
            d = d @ p[0].T
    return d, grads


def _check_input(weights, img):
    img = check_image(img)
    if img.shape != weights.input_shape:
        raise ShapeError(f"image shape {img.shape} does not match network input {weights.input_shape}")
    return img


def forward_batch(weights: NetworkWeights, X: np.ndarray) -> np.ndarray:
    """Logits for a batch ``(N, H, W, C)`` of intensity images."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1:] != weights.input_shape:
        raise ShapeError(f"batch images have shape {X.shape[1:]}, expected {weights.input_shape}")
    logits, _ = _forward(weights, normalize_intensity(X))
    return logits


def forward_logits(weights: NetworkWeights, img: np.ndarray) -> np.ndarray:
    """Pre-softmax logits of one ``(H, W, C)`` image."""
    img = _check_input(weights, img)
    logits, _ = _forward(weights, normalize_intensity(img)[None])
    return logits[0]


def _objective_vector(objective, num_classes):
    if np.ndim(objective) == 0:
        c = check_class_index(objective, num_classes)
        v = np.zeros(num_classes)
        v[c] = 1.0
        return v
    v = np.asarray(objective, dtype=np.float64)
    if v.shape != (num_classes,):
        raise ShapeError(f"objective weights must have shape ({num_classes},)")
    return v


def logits_and_input_gradient(weights: NetworkWeights, img: np.ndarray, objective):
    """Logits and the gradient of ``objective . logits`` w.r.t. the raw image.

    ``objective`` is a class index (the gradient of that logit) or a vector
    of per-class weights for a linear functional of the logits.
    """
    img = _check_input(weights, img)
    v = _objective_vector(objective, weights.num_classes)
    logits, caches = _forward(weights, normalize_intensity(img)[None], keep_cache=True)
    dx, _ = _backward(weights, caches, v[None, :])
    return logits[0], dx[0] / NORM_SCALE


def input_gradient(weights: NetworkWeights, img: np.ndarray, objective) -> np.ndarray:
    """Gradient of the selected logit (or linear functional) w.r.t. the image."""
    return logits_and_input_gradient(weights, img, objective)[1]


def activation_pattern(weights: NetworkWeights, img: np.ndarray) -> list:
    """ReLU on/off masks and max-pool argmax indices for one image.

    Two inputs with equal patterns lie in the same linear piece of the
    network, so finite differences between them are exact up to rounding.
    """
    img = _check_input(weights, img)
    _, caches = _forward(weights, normalize_intensity(img)[None], keep_cache=True)
    pattern = []
    for layer, cache in zip(weights.layers, caches):
        if layer.kind == "relu":
            pattern.append(cache)
        elif layer.kind == "maxpool":
            pattern.append(cache[1])
    return pattern


def _same_pattern(pa, pb) -> bool:
    return all(np.array_equal(a, b) for a, b in zip(pa, pb))


# --------------------------------------------------------------------------
# training


def softmax(logits: np.ndarray, axis=-1) -> np.ndarray:
    z = logits - np.max(logits, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def cross_entropy_and_grads(weights: NetworkWeights, X: np.ndarray, y: np.ndarray):
    """Mean cross-entropy of a batch and its gradients w.r.t. every parameter."""
    logits, caches = _forward(weights, normalize_intensity(X), keep_cache=True)
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    n = X.shape[0]
    loss = -logp[np.arange(n), y].mean()
    dlogits = np.exp(logp)
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    _, grads = _backward(weights, caches, dlogits, need_params=True)
    return loss, grads


def accuracy(weights: NetworkWeights, X: np.ndarray, y: np.ndarray, batch_size=500) -> float:
    correct = 0
    for start in range(0, len(X), batch_size):
        logits = forward_batch(weights, X[start : start + batch_size])
        correct += int(np.sum(np.argmax(logits, axis=1) == y[start : start + batch_size]))
    return correct / len(X)


def train_classifier(
    X,
    y,
    *,
    epochs=3,
    batch_size=32,
    step_size=0.05,
    seed=0,
    layers=None,
    X_test=None,
    y_test=None,
):
    """Mini-batch SGD on softmax cross-entropy.

    Returns ``(weights, history)``; ``history`` holds the mean loss of each
    epoch and, when a test split is given, the final test accuracy.
    Deterministic for a fixed ``seed``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 4:
        raise ShapeError(f"X must be (N, H, W, C), got {X.shape}")
    weights = init_weights(X.shape[1:], layers, seed=seed)
    if y.min() < 0 or y.max() >= weights.num_classes:
        raise ValueError(f"labels must lie in [0, {weights.num_classes})")
    rng = np.random.default_rng(seed + 1)
    history = {"epoch_loss": []}
    n = len(X)
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    loss, grads = cross_entropy_and_grads(weights, X[idx], y[idx])
            except NumericalError:
                loss = float("nan")
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"loss became {loss} in epoch {epoch + 1} at sample {start}; "
                    f"try a smaller step size (currently {step_size})"
                )
            total += loss * len(idx)
            if step_size != 0:
                for p, g in zip(weights.params, grads):
                    if p is not None:
                        kernel, bias = p
                        kernel -= step_size * g[0]
                        bias -= step_size * g[1]
        history["epoch_loss"].append(float(total / n))
        logger.info("epoch %d/%d  loss %.4f", epoch + 1, epochs, total / n)
    for i, p in enumerate(weights.params):
        if p is not None and not (np.all(np.isfinite(p[0])) and np.all(np.isfinite(p[1]))):
            raise TrainingDivergedError(f"layer {i} parameters became non-finite")
    if X_test is not None and y_test is not None:
        acc = accuracy(weights, np.asarray(X_test, dtype=np.float64), np.asarray(y_test))
        history["test_accuracy"] = acc
        logger.info("test accuracy %.4f", acc)
    return weights, history


# --------------------------------------------------------------------------
# serialisation
#
# layout (little-endian):
#   b"SCIW" | u16 version | 32-byte sha256 fingerprint | u32 len | arch JSON
#   | u32 tensor count | per tensor: u8 ndim, u32 * ndim shape, f8 data
#   | u32 crc32 of all preceding bytes

_MAGIC = b"SCIW"
_VERSION = 1


def _arch_json(weights: NetworkWeights) -> bytes:
    desc = {
        "input_shape": list(weights.input_shape),
        "layers": [layer.to_dict() for layer in weights.layers],
        "num_classes": weights.num_classes,
    }
    return json.dumps(desc, sort_keys=True, separators=(",", ":")).encode()


def dumps_weights(weights: NetworkWeights) -> bytes:
    arch = _arch_json(weights)
    parts = [_MAGIC, struct.pack("<H", _VERSION), bytes.fromhex(weights.fingerprint),
             struct.pack("<I", len(arch)), arch]
    tensors = weights.tensors()
    parts.append(struct.pack("<I", len(tensors)))
    for t in tensors:
        t = np.ascontiguousarray(t, dtype="<f8")
        parts.append(struct.pack("<B", t.ndim) + struct.pack(f"<{t.ndim}I", *t.shape))
        parts.append(t.tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


class _Reader:
    def __init__(self, buf):
        self.buf = buf
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise CorruptFileError("weights file is truncated")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def loads_weights(buf: bytes, expected_fingerprint: str | None = None) -> NetworkWeights:
    if len(buf) < 4 or buf[:4] != _MAGIC:
        raise CorruptFileError("not a weights file (bad magic)")
    if len(buf) < 8:
        raise CorruptFileError("weights file is truncated")
    body, (crc,) = buf[:-4], struct.unpack("<I", buf[-4:])
    r = _Reader(body)
    r.take(4)
    (version,) = r.unpack("<H")
    if version != _VERSION:
        raise CorruptFileError(f"unsupported weights version {version}")
    stored_fp = r.take(32).hex()
    (alen,) = r.unpack("<I")
    try:
        desc = json.loads(r.take(alen))
        layers = tuple(LayerSpec.from_dict(d) for d in desc["layers"])
        input_shape = tuple(desc["input_shape"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptFileError(f"bad architecture record: {exc}") from exc
    (count,) = r.unpack("<I")
    tensors = []
    for _ in range(count):
        (ndim,) = r.unpack("<B")
        shape = r.unpack(f"<{ndim}I")
        size = int(np.prod(shape, dtype=np.int64))
        tensors.append(np.frombuffer(r.take(8 * size), dtype="<f8").reshape(shape).astype(np.float64))
    if r.pos != len(body) or zlib.crc32(body) != crc:
        raise CorruptFileError("weights file checksum mismatch")
    if expected_fingerprint is not None and stored_fp != expected_fingerprint:
        raise FingerprintMismatchError(
            f"weights were saved for architecture {stored_fp[:12]}, expected {expected_fingerprint[:12]}"
        )
    params = []
    it = iter(tensors)
    try:
        for layer in layers:
            params.append((next(it), next(it)) if layer.has_params else None)
    except StopIteration:
        raise CorruptFileError("weights file holds too few tensors") from None
    try:
        weights = NetworkWeights(input_shape, layers, params)
    except (ShapeError, ValueError) as exc:
        raise CorruptFileError(f"inconsistent weights record: {exc}") from exc
    if weights.fingerprint != stored_fp:
        raise CorruptFileError("stored fingerprint does not match the architecture record")
    return weights


def save_weights(weights: NetworkWeights, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps_weights(weights))


def load_weights(path, expected_fingerprint: str | None = None) -> NetworkWeights:
    """Load weights; raises :class:`FingerprintMismatchError` if the stored
    architecture differs from ``expected_fingerprint``."""
    with open(path, "rb") as fh:
        return loads_weights(fh.read(), expected_fingerprint)


# --------------------------------------------------------------------------
# gradient checking


def relative_error(a, b, floor=1e-7):
    """``|a - b| / max(|a|, |b|, floor)``; the floor keeps near-zero pairs from
    turning rounding noise into large ratios."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def gradient_check(weights, img, c, epsilon=1e-3, n_samples=200, seed=0, return_details=False):
    """Worst relative error between :func:`input_gradient` and central differences.

    ``n_samples`` elements are drawn without replacement (all of them if the
    image is smaller). An element is excluded when the ``+-epsilon`` stencil
    changes any ReLU state or max-pool winner, since the network is not
    differentiable across those kinks.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    img = _check_input(weights, img)
    analytic = input_gradient(weights, img, c)
    rng = np.random.default_rng(seed)
    size = img.size
    picks = rng.choice(size, size=min(n_samples, size), replace=False)
    base_pattern = activation_pattern(weights, img)
    errors = []
    excluded = []
    for flat in np.sort(picks):
        idx = np.unravel_index(flat, img.shape)
        plus = img.copy()
        minus = img.copy()
        plus[idx] += epsilon
        minus[idx] -= epsilon
        if not (_same_pattern(activation_pattern(weights, plus), base_pattern)
                and _same_pattern(activation_pattern(weights, minus), base_pattern)):
            excluded.append(int(flat))
            continue
        numeric = (forward_logits(weights, plus)[c] - forward_logits(weights, minus)[c]) / (2 * epsilon)
        errors.append(float(relative_error(analytic[idx], numeric)))
    worst = max(errors) if errors else 0.0
    if return_details:
        return worst, {"checked": len(errors), "excluded": excluded}
    return worst
