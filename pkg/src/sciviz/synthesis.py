"""Class impression synthesis by gradient ascent on a classifier's logits.

Three single-class modes share one iteration loop:

``ci_baseline``
    uniform learning rate, no mask.
``pre_only``
    per-pixel learning rates from accumulated normalised gradients
    (:mod:`sciviz.saliency`).
``full_sci``
    ``pre_only``, then pick the disk with the largest learning-rate mass
    and develop the image again inside a disk that grows from that center.

:meth:`SaliencyClassImpressions.fuse` alternates two classes, each growing
from its own seed pixel.

Each iteration does, in order: compute the gradient, take the ascent step,
take a TV descent step (every ``tv_period_k``-th iteration), apply a random
transform (if enabled for the phase), then update the saliency state.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import NumericalError, ShapeError
from .image import clamp, constant_image, dataset_mean, init_canvas, write_image
from .network import Classifier
from .region import PixelCoord, RadiusSchedule, circ, most_activated_center, radius_at
from .saliency import (
    ACCUMULATION_MODES,
    SIGN_MODES,
    CumulativeGradient,
    LrMap,
    RampSchedule,
    normalize_lr_map,
    uniform_lr_map,
    update_cumulative,
)
from .transforms import TransformParams, apply_transform, sample_transform
from .tv import TvConfig, tv_gradient, tv_value
from .validation import check_class_index, check_image, check_images, check_same_shape

logger = logging.getLogger(__name__)

PHASE_MODES = ("ci_baseline", "pre_only", "full_sci")
POST_INITS = ("fresh_canvas", "continue_pre")

# schedules quoted for 224 px canvases and 500 iterations are rescaled by these
REFERENCE_SIZE = 224
REFERENCE_ITERATIONS = 500
REFERENCE_RAMP = 150
REFERENCE_RADIUS = 150.0


def ascend_step(img, grad, lr, base_step: float) -> np.ndarray:
    """``clamp(img + base_step * lr * grad)``."""
    grad = np.asarray(grad, dtype=np.float64)
    if not np.all(np.isfinite(grad)):
        raise NumericalError("gradient contains NaN or Inf")
    lr = np.asarray(getattr(lr, "values", lr), dtype=np.float64)
    return clamp(img + base_step * (lr * grad))


def tv_step(img, tv, step: float, mask=None) -> np.ndarray:
    """``clamp(img - step * lambda1 * (mask * tv_gradient(img)))``.

    ``tv`` is a :class:`TvConfig` with a resolved ``lambda1`` or a bare float.
    """
    if not step > 0:
        raise ValueError("TV step size must be positive")
    lam = tv.lambda1 if isinstance(tv, TvConfig) else float(tv)
    if lam is None:
        raise ValueError("lambda1 must be resolved before taking a TV step")
    g = tv_gradient(img)
    if mask is not None:
        m = np.asarray(mask, dtype=np.float64)
        g = g * (m[:, :, None] if m.ndim == 2 else m)
    return clamp(img - step * lam * g)


@dataclass
class RunResult:
    """Final image of one synthesis run and everything needed to redo it."""

    image: np.ndarray
    trace: list
    config: dict
    target_class: int | tuple
    mode: str
    weights_fingerprint: str | None = None
    initial_logit: float | None = None
    final_logit: float | None = None
    base_step: float | None = None
    lambda1: float | None = None
    canvas: np.ndarray | None = None
    post_canvas: np.ndarray | None = None
    lr_map: LrMap | None = None
    center: PixelCoord | None = None
    extras: dict = field(default_factory=dict)

    def trace_lines(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.trace)

    def save(self, directory, stem: str) -> dict:
        """Write ``<stem>.png``, ``<stem>.trace.jsonl`` and ``<stem>.config.json``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {
            "image": directory / f"{stem}.png",
            "trace": directory / f"{stem}.trace.jsonl",
            "config": directory / f"{stem}.config.json",
        }
        write_image(self.image, paths["image"])
        paths["trace"].write_text(self.trace_lines())
        snapshot = {
            "config": self.config,
            "target_class": self.target_class,
            "mode": self.mode,
            "weights_fingerprint": self.weights_fingerprint,
            "base_step": self.base_step,
            "lambda1": self.lambda1,
            "center": None if self.center is None else list(self.center),
        }
        paths["config"].write_text(json.dumps(snapshot, sort_keys=True, indent=2) + "\n")
        return paths


@dataclass
class _Track:
    """Per-class optimisation state inside one run."""

    target: int
    saliency: bool
    ramp: RampSchedule
    center: PixelCoord | None = None
    radius: RadiusSchedule | None = None
    cum: CumulativeGradient | None = None
    lr: LrMap | None = None
    i: int = 0


@dataclass
class _RunState:
    base_step: float | None
    lambda1: float | None
    first_ascent: float | None = None
    transform_rng: np.random.Generator | None = None
    transform_count: int = 0
    iteration: int = 0


class SaliencyClassImpressions(TransformerMixin, BaseEstimator):
    """Synthesize class impressions from a differentiable classifier.

    Parameters
    ----------
    classifier : Classifier
        Anything exposing ``num_classes``, ``input_shape``,
        ``forward_logits`` and ``input_gradient`` (e.g. a fitted
        :class:`sciviz.ConvNetClassifier`).
    mode : {"full_sci", "pre_only", "ci_baseline"}
    iterations_pre, iterations_post : int
        Iteration budgets of the unmasked and masked phases.
    base_step : float or "auto"
        Multiplier of ``lr * grad`` in the ascent step. ``"auto"`` picks it on
        the first iteration so that the largest pixel change is ``step_px``.
    tv_lambda1 : float or "auto"
        TV weight. ``"auto"`` makes the first TV step's largest pixel change
        ``tv_ratio`` times the first ascent step's.
    tv_period_k : int
        A TV step is taken on iterations divisible by this.
    c2, ramp_t, accumulation_mode, lr_sign_mode
        Saliency accumulation settings; ``ramp_t=None`` scales 150 by
        ``iterations / 500`` for each phase.
    r0, r_max, radius_ramp_iters, selection_radius
        Mask schedule. ``None`` values are scaled from the 224 px reference:
        ``r_max = 150 * S / 224``, ramp length as ``ramp_t``,
        ``selection_radius = r_max / 10``.
    post_init : {"fresh_canvas", "continue_pre"}
        Start of the masked phase: the run's initial canvas or the pre-phase
        result.
    init : {"mean", "constant"}
        Base of the canvas; ``"mean"`` uses the mean of ``X`` given to fit.
    noise_amplitude : float
        Canvas is ``clamp(base + U[0, noise_amplitude])``.
    rotation_deg, scale_min, scale_max, crop_pad, jitter, transform_probability
        Random transform ranges (see :class:`TransformParams`).
    transforms_pre, transforms_post : bool
        Whether transforms run in the unmasked and masked phases.
    fuse_blocks, fuse_block_a, fuse_block_b
        Fusion schedule: ``fuse_blocks`` alternations, block lengths default
        to ``iterations_post // 4``.
    random_state : int
    """

    def __init__(
        self,
        classifier=None,
        *,
        mode="full_sci",
        iterations_pre=500,
        iterations_post=500,
        base_step="auto",
        step_px=2.0,
        tv_lambda1="auto",
        tv_period_k=1,
        tv_ratio=0.1,
        c2=4.0,
        ramp_t=None,
        accumulation_mode="literal",
        lr_sign_mode="magnitude",
        r0=1.0,
        r_max=None,
        radius_ramp_iters=None,
        selection_radius=None,
        post_init="fresh_canvas",
        init="mean",
        constant_value=127.5,
        noise_amplitude=255.0,
        rotation_deg=5.0,
        scale_min=0.95,
        scale_max=1.05,
        crop_pad=None,
        jitter=10.0,
        transform_probability=1.0,
        transforms_pre=True,
        transforms_post=False,
        fuse_blocks=2,
        fuse_block_a=None,
        fuse_block_b=None,
        fuse_radius="half_gap",
        random_state=0,
    ):
        self.classifier = classifier
        self.mode = mode
        self.iterations_pre = iterations_pre
        self.iterations_post = iterations_post
        self.base_step = base_step
        self.step_px = step_px
        self.tv_lambda1 = tv_lambda1
        self.tv_period_k = tv_period_k
        self.tv_ratio = tv_ratio
        self.c2 = c2
        self.ramp_t = ramp_t
        self.accumulation_mode = accumulation_mode
        self.lr_sign_mode = lr_sign_mode
        self.r0 = r0
        self.r_max = r_max
        self.radius_ramp_iters = radius_ramp_iters
        self.selection_radius = selection_radius
        self.post_init = post_init
        self.init = init
        self.constant_value = constant_value
        self.noise_amplitude = noise_amplitude
        self.rotation_deg = rotation_deg
        self.scale_min = scale_min
        self.scale_max = scale_max
        self.crop_pad = crop_pad
        self.jitter = jitter
        self.transform_probability = transform_probability
        self.transforms_pre = transforms_pre
        self.transforms_post = transforms_post
        self.fuse_blocks = fuse_blocks
        self.fuse_block_a = fuse_block_a
        self.fuse_block_b = fuse_block_b
        self.fuse_radius = fuse_radius
        self.random_state = random_state

    # ------------------------------------------------------------------
    # fitting

    def _validate_params(self):
        if not isinstance(self.classifier, Classifier):
            raise TypeError("classifier must provide num_classes, input_shape, "
                            "forward_logits and input_gradient")
        if self.mode not in PHASE_MODES:
            raise ValueError(f"mode must be one of {PHASE_MODES}, got {self.mode!r}")
        if self.post_init not in POST_INITS:
            raise ValueError(f"post_init must be one of {POST_INITS}, got {self.post_init!r}")
        if self.accumulation_mode not in ACCUMULATION_MODES:
            raise ValueError(f"accumulation_mode must be one of {ACCUMULATION_MODES}")
        if self.lr_sign_mode not in SIGN_MODES:
            raise ValueError(f"lr_sign_mode must be one of {SIGN_MODES}")
        if self.init not in ("mean", "constant"):
            raise ValueError("init must be 'mean' or 'constant'")
        if self.iterations_pre < 1 or self.iterations_post < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.base_step != "auto" and not float(self.base_step) > 0:
            raise ValueError("base_step must be positive or 'auto'")
        if self.tv_lambda1 != "auto" and float(self.tv_lambda1) < 0:
            raise ValueError("tv_lambda1 must be >= 0 or 'auto'")
        if self.noise_amplitude < 0:
            raise ValueError("noise_amplitude must be >= 0")
        if self.fuse_blocks < 1:
            raise ValueError("fuse_blocks must be >= 1")

    def fit(self, X=None, y=None):
        """Learn the canvas base (dataset mean) and resolve all schedules.

        ``X`` is a batch of training images; it may be omitted when
        ``init="constant"``.
        """
        self._validate_params()
        shape = tuple(self.classifier.input_shape)
        if self.init == "mean":
            if X is None:
                raise ValueError("init='mean' needs training images X")
            X = check_images(X, shape)
            self.mean_ = dataset_mean(X)
        else:
            self.mean_ = constant_image(shape, self.constant_value)
        self.input_shape_ = shape
        self.num_classes_ = int(self.classifier.num_classes)
        self.tv_ = TvConfig(None if self.tv_lambda1 == "auto" else float(self.tv_lambda1),
                            int(self.tv_period_k))
        self.transform_params_ = TransformParams(
            rotation_deg=self.rotation_deg, scale_min=self.scale_min, scale_max=self.scale_max,
            crop_pad=self.crop_pad, jitter=self.jitter,
            apply_probability=self.transform_probability, enabled=True,
        )
        self.size_scale_ = min(shape[0], shape[1]) / REFERENCE_SIZE
        self.r_max_ = (REFERENCE_RADIUS * self.size_scale_ if self.r_max is None
                       else float(self.r_max))
        self.selection_radius_ = (self.r_max_ / 10 if self.selection_radius is None
                                  else float(self.selection_radius))
        self.ramp_pre_ = self._ramp(self.iterations_pre)
        logger.info("size scale %.4f, r_max %.3f, selection radius %.3f, pre ramp t=%d",
                    self.size_scale_, self.r_max_, self.selection_radius_, self.ramp_pre_.t)
        return self

    def _scaled_length(self, n_iter, explicit):
        if explicit is not None:
            return int(explicit)
        return max(1, int(round(REFERENCE_RAMP * n_iter / REFERENCE_ITERATIONS)))

    def _ramp(self, n_iter) -> RampSchedule:
        return RampSchedule(float(self.c2), self._scaled_length(n_iter, self.ramp_t))

    def _radius(self, n_iter) -> RadiusSchedule:
        return RadiusSchedule(float(self.r0), self.r_max_,
                              self._scaled_length(n_iter, self.radius_ramp_iters))

    def resolved_config(self) -> dict:
        """Constructor parameters plus every derived schedule value."""
        check_is_fitted(self, "mean_")
        params = {k: v for k, v in self.get_params(deep=False).items() if k != "classifier"}
        post_ramp = self._ramp(self.iterations_post)
        post_radius = self._radius(self.iterations_post)
        params["resolved"] = {
            "input_shape": list(self.input_shape_),
            "size_scale": self.size_scale_,
            "iteration_scale_pre": self.iterations_pre / REFERENCE_ITERATIONS,
            "iteration_scale_post": self.iterations_post / REFERENCE_ITERATIONS,
            "ramp_t_pre": self.ramp_pre_.t,
            "ramp_t_post": post_ramp.t,
            "r_max": self.r_max_,
            "radius_ramp_iters": post_radius.ramp_iters,
            "selection_radius": self.selection_radius_,
            "crop_pad": self.transform_params_.pad_for(min(self.input_shape_[:2])),
        }
        return params

    # ------------------------------------------------------------------
    # the iteration

    def _new_state(self) -> _RunState:
        return _RunState(
            base_step=None if self.base_step == "auto" else float(self.base_step),
            lambda1=self.tv_.lambda1,
            transform_rng=np.random.default_rng([int(self.random_state), 1]),
        )

    def initial_canvas(self) -> np.ndarray:
        check_is_fitted(self, "mean_")
        return init_canvas(self.mean_, self.noise_amplitude, int(self.random_state))

    def _new_track(self, target, *, saliency, n_iter, center=None, r_max=None) -> _Track:
        track = _Track(target=target, saliency=saliency, ramp=self._ramp(n_iter))
        track.cum = CumulativeGradient.zeros(self.input_shape_)
        track.lr = uniform_lr_map(self.input_shape_)
        if center is not None:
            track.center = PixelCoord(int(center[0]), int(center[1]))
            track.radius = self._radius(n_iter)
            if r_max is not None:
                track.radius = RadiusSchedule(min(track.radius.r0, r_max), r_max,
                                              track.radius.ramp_iters)
        return track

    def _step(self, img, track: _Track, state: _RunState, *, phase, transforms, trace, callback):
        i = track.i + 1
        logits, grad = _logits_and_gradient(self.classifier, img, track.target)
        lr_map = track.lr
        lr = lr_map.values
        mask = None
        radius = None
        if track.center is not None:
            radius = radius_at(i - 1, track.radius)
            mask = circ(track.center, radius, self.input_shape_[:2])
            lr = lr * mask[:, :, None]

        delta = lr * grad
        if state.base_step is None:
            peak = np.max(np.abs(delta))
            state.base_step = float(self.step_px / peak) if peak > 0 else 1.0
        if state.first_ascent is None:
            state.first_ascent = float(state.base_step * np.max(np.abs(delta)))
        img = ascend_step(img, grad, lr, state.base_step)

        tv_applied = False
        if self.tv_.active(i):
            if state.lambda1 is None:
                g = tv_gradient(img)
                if mask is not None:
                    g = g * mask[:, :, None]
                peak = np.max(np.abs(g))
                state.lambda1 = (float(self.tv_ratio * state.first_ascent / (state.base_step * peak))
                                 if peak > 0 and state.first_ascent > 0 else 0.0)
            if state.lambda1 > 0:
                img = tv_step(img, state.lambda1, state.base_step, mask)
                tv_applied = True

        sample_id = None
        if transforms:
            sample = sample_transform(self.transform_params_, state.transform_rng, img.shape)
            sample_id = state.transform_count
            state.transform_count += 1
            img = apply_transform(img, sample)

        if track.saliency:
            track.cum = update_cumulative(track.cum, grad, i, track.ramp, self.accumulation_mode)
            track.lr = normalize_lr_map(track.cum, self.lr_sign_mode)
        track.i = i
        state.iteration += 1

        record = {
            "iteration": state.iteration,
            "phase": phase,
            "phase_iteration": i,
            "target_class": track.target,
            "logit": float(logits[track.target]),
            "tv": tv_value(img),
            "tv_applied": tv_applied,
            "radius": radius,
            "center": None if track.center is None else list(track.center),
            "lr_degenerate": bool(lr_map.degenerate),
            "transform_id": sample_id,
            "base_step": state.base_step,
            "lambda1": state.lambda1,
        }
        trace.append(record)
        if callback is not None:
            callback(record, img)
        return img

    def _result(self, img, trace, target, mode, state, **kw) -> RunResult:
        final_logit = None
        if np.ndim(target) == 0:
            final_logit = float(self.classifier.forward_logits(img)[target])
        return RunResult(
            image=img,
            trace=trace,
            config=self.resolved_config(),
            target_class=target,
            mode=mode,
            weights_fingerprint=getattr(self.classifier, "fingerprint", None),
            initial_logit=trace[0]["logit"] if trace and np.ndim(target) == 0 else None,
            final_logit=final_logit,
            base_step=state.base_step,
            lambda1=state.lambda1,
            **kw,
        )

    # ------------------------------------------------------------------
    # public synthesis entry points

    def _check_class(self, c) -> int:
        check_is_fitted(self, "mean_")
        return check_class_index(c, self.num_classes_)

    def _unmasked(self, c, *, saliency, phase, state, trace, callback):
        img = self.initial_canvas()
        track = self._new_track(c, saliency=saliency, n_iter=self.iterations_pre)
        for _ in range(self.iterations_pre):
            img = self._step(img, track, state, phase=phase, transforms=self.transforms_pre,
                             trace=trace, callback=callback)
        return img, track

    def ci_baseline(self, target_class, callback=None) -> RunResult:
        """Uniform learning rate, no mask."""
        c = self._check_class(target_class)
        state, trace = self._new_state(), []
        canvas = self.initial_canvas()
        img, _ = self._unmasked(c, saliency=False, phase="ci", state=state, trace=trace,
                                callback=callback)
        return self._result(img, trace, c, "ci_baseline", state, canvas=canvas)

    def pre_ci(self, target_class, callback=None) -> RunResult:
        """Saliency-driven learning rates, no mask; ``lr_map`` holds the final map."""
        c = self._check_class(target_class)
        state, trace = self._new_state(), []
        canvas = self.initial_canvas()
        img, track = self._unmasked(c, saliency=True, phase="pre", state=state, trace=trace,
                                    callback=callback)
        return self._result(img, trace, c, "pre_only", state, canvas=canvas, lr_map=track.lr)

    def sci(self, target_class, callback=None) -> RunResult:
        """Pre phase, region selection, then masked region growing."""
        c = self._check_class(target_class)
        state, trace = self._new_state(), []
        canvas = self.initial_canvas()
        pre_img, pre_track = self._unmasked(c, saliency=True, phase="pre", state=state,
                                            trace=trace, callback=callback)
        center = most_activated_center(pre_track.lr, self.selection_radius_)
        start = canvas.copy() if self.post_init == "fresh_canvas" else pre_img.copy()
        img = self._develop(start, [(c, center, self.iterations_post, None)], [c] * self.iterations_post,
                            state, trace, callback, phase="post")
        return self._result(img, trace, c, "full_sci", state, canvas=canvas, post_canvas=start,
                            lr_map=pre_track.lr, center=center,
                            extras={"pre_image": pre_img})

    def _develop(self, img, tracks_spec, schedule, state, trace, callback, phase):
        tracks = {
            c: self._new_track(c, saliency=True, n_iter=n, center=center, r_max=cap)
            for c, center, n, cap in tracks_spec
        }
        for c in schedule:
            img = self._step(img, tracks[c], state, phase=phase, transforms=self.transforms_post,
                             trace=trace, callback=callback)
        return img

    def develop_region(self, target_class, center, n_iter, canvas=None, callback=None) -> RunResult:
        """Masked saliency-driven growth of one class from ``center``."""
        c = self._check_class(target_class)
        if canvas is None:
            canvas = self.initial_canvas()
        canvas = check_image(canvas, copy=True)
        check_same_shape(canvas, self.mean_, "canvas and network input")
        state, trace = self._new_state(), []
        center = PixelCoord(int(center[0]), int(center[1]))
        circ(center, 0, self.input_shape_[:2])  # bounds check
        img = self._develop(canvas.copy(), [(c, center, n_iter, None)], [c] * n_iter, state, trace,
                            callback, phase="post")
        return self._result(img, trace, c, "region", state, post_canvas=canvas, center=center)

    def fuse(self, class_a, class_b, seed_a, seed_b, callback=None) -> RunResult:
        """Alternate blocks of class ``a`` grown from ``seed_a`` and class ``b``
        grown from ``seed_b`` on one canvas."""
        a = self._check_class(class_a)
        b = self._check_class(class_b)
        if a == b:
            raise ValueError("fusion needs two different classes")
        seed_a = PixelCoord(int(seed_a[0]), int(seed_a[1]))
        seed_b = PixelCoord(int(seed_b[0]), int(seed_b[1]))
        if seed_a == seed_b:
            raise ValueError("fusion seeds must be distinct pixels")
        extent = self.input_shape_[:2]
        circ(seed_a, 0, extent)
        circ(seed_b, 0, extent)
        default = max(1, self.iterations_post // 4)
        len_a = default if self.fuse_block_a is None else int(self.fuse_block_a)
        len_b = default if self.fuse_block_b is None else int(self.fuse_block_b)
        if len_a < 0 or len_b < 0 or len_a + len_b == 0:
            raise ValueError("fusion block lengths must be >= 0 and not both zero")
        schedule = ([a] * len_a + [b] * len_b) * int(self.fuse_blocks)
        cap = None
        if self.fuse_radius == "half_gap" and len_b > 0:
            cap = min(self.r_max_, 0.5 * float(np.hypot(seed_a[0] - seed_b[0], seed_a[1] - seed_b[1])))
        elif self.fuse_radius not in ("half_gap", None):
            cap = float(self.fuse_radius)
        specs = [(a, seed_a, len_a * self.fuse_blocks, cap)]
        if len_b > 0:
            specs.append((b, seed_b, len_b * self.fuse_blocks, cap))
        state, trace = self._new_state(), []
        canvas = self.initial_canvas()
        img = self._develop(canvas.copy(), specs, schedule, state, trace, callback, phase="fuse")
        result = self._result(img, trace, (a, b), "fuse", state, canvas=canvas, post_canvas=canvas)
        logits = np.asarray(self.classifier.forward_logits(img))
        result.extras["logits"] = logits
        result.extras["seeds"] = (seed_a, seed_b)
        return result

    def synthesize(self, target_class, callback=None) -> RunResult:
        """Run the configured ``mode`` for one class."""
        check_is_fitted(self, "mean_")
        if self.mode == "ci_baseline":
            return self.ci_baseline(target_class, callback)
        if self.mode == "pre_only":
            return self.pre_ci(target_class, callback)
        return self.sci(target_class, callback)

    def transform(self, classes):
        """Stack of synthesized images, one per requested class index."""
        check_is_fitted(self, "mean_")
        classes = np.atleast_1d(classes)
        return np.stack([self.synthesize(int(c)).image for c in classes])


def _logits_and_gradient(classifier, img, c):
    if hasattr(classifier, "logits_and_input_gradient"):
        logits, grad = classifier.logits_and_input_gradient(img, c)
    else:
        logits = classifier.forward_logits(img)
        grad = classifier.input_gradient(img, c)
    logits = np.asarray(logits, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != img.shape:
        raise ShapeError(f"classifier returned gradient of shape {grad.shape} for image {img.shape}")
    if not np.all(np.isfinite(logits)):
        raise NumericalError("classifier returned non-finite logits")
    return logits, grad


# functional wrappers ------------------------------------------------------

def synthesize_ci_baseline(model, X=None, **params) -> RunResult:
    target = params.pop("target_class")
    return SaliencyClassImpressions(model, mode="ci_baseline", **params).fit(X).ci_baseline(target)


def synthesize_pre_ci(model, X=None, **params):
    target = params.pop("target_class")
    run = SaliencyClassImpressions(model, mode="pre_only", **params).fit(X).pre_ci(target)
    return run, run.lr_map


def synthesize_sci(model, X=None, **params) -> RunResult:
    target = params.pop("target_class")
    return SaliencyClassImpressions(model, mode="full_sci", **params).fit(X).sci(target)


def fuse_classes(model, class_a, class_b, seed_a, seed_b, X=None, **params) -> RunResult:
    return SaliencyClassImpressions(model, **params).fit(X).fuse(class_a, class_b, seed_a, seed_b)
