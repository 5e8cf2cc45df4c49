"""Saliency-driven per-pixel learning rates.

Every iteration the input gradient is normalised to unit L2 norm and folded
into a running state::

    cum_i = cum_{i-1} * i + C_i * grad_i / ||grad_i||

where ``C_i`` ramps linearly from 0 to ``c2`` over ``t`` iterations. The
learning-rate map is ``cum_i / ||cum_i||`` and is used one iteration late:
iteration ``i`` steps with the map built after iteration ``i - 1``, and
the first iteration uses a uniform map.

The literal ``* i`` factor makes the state grow factorially (it overflows
float64 near i = 171), so the state is stored as ``values * exp(log_scale)``
and renormalised whenever ``values`` gets large. The map only depends on the
direction, so this changes nothing but the representable range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError
from .validation import check_same_shape

NORM_EPS = 1e-12
_RESCALE_ABOVE = 1e100

ACCUMULATION_MODES = ("literal", "running_average")
SIGN_MODES = ("signed", "magnitude")


@dataclass(frozen=True)
class RampSchedule:
    c2: float = 4.0
    t: int = 150

    def __post_init__(self):
        if not self.c2 > 0:
            raise ValueError(f"c2 must be positive, got {self.c2}")
        if self.t < 1:
            raise ValueError(f"t must be >= 1, got {self.t}")


def ramp_coefficient(i: int, sched: RampSchedule = RampSchedule()) -> float:
    if i < 0:
        raise ValueError("iteration index must be >= 0")
    if i < sched.t:
        return sched.c2 * i / sched.t
    return sched.c2


@dataclass(frozen=True)
class CumulativeGradient:
    """Accumulator state after ``iteration`` updates.

    The represented tensor is ``values * exp(log_scale)``; use :meth:`dense`
    to materialise it (which may overflow for long literal runs).
    """

    values: np.ndarray
    iteration: int = 0
    log_scale: float = 0.0

    @classmethod
    def zeros(cls, shape) -> "CumulativeGradient":
        return cls(np.zeros(shape), 0, 0.0)

    def dense(self) -> np.ndarray:
        return self.values * np.exp(self.log_scale)


def _unit(g: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(g)
    if n < NORM_EPS:
        return np.zeros_like(g)
    return g / n


def update_cumulative(prev: CumulativeGradient, grad_i, i: int,
                      sched: RampSchedule = RampSchedule(), mode: str = "literal") -> CumulativeGradient:
    """One accumulation step. ``mode="running_average"`` uses
    ``(cum_{i-1} * (i - 1) + C_i * g) / i`` instead of the literal ``* i``."""
    grad_i = np.asarray(grad_i, dtype=np.float64)
    check_same_shape(prev.values, grad_i, "cumulative state and gradient")
    if not np.all(np.isfinite(grad_i)):
        raise NumericalError("gradient contains NaN or Inf")
    if i != prev.iteration + 1:
        raise ValueError(f"expected iteration {prev.iteration + 1}, got {i}")
    if mode not in ACCUMULATION_MODES:
        raise ValueError(f"unknown accumulation mode {mode!r}")

    contribution = ramp_coefficient(i, sched) * _unit(grad_i)
    if mode == "literal":
        grow, shrink = float(i), 1.0
    else:
        grow, shrink = float(i - 1), float(i)
    # cum_new = (S * v * grow + contribution) / shrink with S = exp(log_scale)
    log_growth = prev.log_scale + (np.log(grow) if grow > 0 else -np.inf)
    if log_growth < np.log(_RESCALE_ABOVE):
        factor = grow if prev.log_scale == 0.0 else np.exp(log_growth)
        values = (prev.values * factor + contribution) / shrink
        log_scale = 0.0
    else:
        # contribution * exp(-log_scale) underflows to exact zero once S is huge
        log_scale = log_growth
        values = (prev.values + contribution * np.exp(-log_scale)) / shrink
    n = np.linalg.norm(values)
    if n > _RESCALE_ABOVE:
        values = values / n
        log_scale += np.log(n)
    return CumulativeGradient(values, i, float(log_scale))


@dataclass(frozen=True)
class LrMap:
    """Unit-norm learning-rate map; ``degenerate`` marks the uniform fallback."""

    values: np.ndarray
    degenerate: bool = False

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def uniform_lr_map(shape) -> LrMap:
    size = int(np.prod(shape))
    return LrMap(np.full(shape, 1.0 / np.sqrt(size)), degenerate=False)


def normalize_lr_map(cum: CumulativeGradient, sign_mode: str = "signed") -> LrMap:
    """``cum / ||cum||``; falls back to the uniform map when the norm vanishes.

    ``sign_mode="magnitude"`` takes the absolute value before normalising.
    """
    if sign_mode not in SIGN_MODES:
        raise ValueError(f"unknown sign mode {sign_mode!r}")
    v = np.asarray(cum.values, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise NumericalError("cumulative gradient contains NaN or Inf")
    if sign_mode == "magnitude":
        v = np.abs(v)
    n = np.linalg.norm(v)
    if n == 0 or np.log(n) + cum.log_scale < np.log(NORM_EPS):
        u = uniform_lr_map(v.shape)
        return LrMap(u.values, degenerate=True)
    return LrMap(v / n)
