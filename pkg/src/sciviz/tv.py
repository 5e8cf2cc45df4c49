"""Anisotropic total variation and its subgradient.

Differences are taken between each pixel and its lower and right
neighbours only; pairs that would leave the image are omitted, and every
channel is treated independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_image


@dataclass(frozen=True)
class TvConfig:
    """Weight of the TV term and how often a TV step is taken.

    ``lambda1=None`` means "calibrate on the first TV step" (see
    :class:`sciviz.synthesis.SaliencyClassImpressions`).
    """

    lambda1: float | None = None
    period_k: int = 1

    def __post_init__(self):
        if self.period_k < 1:
            raise ValueError(f"period_k must be >= 1, got {self.period_k}")
        if self.lambda1 is not None and self.lambda1 < 0:
            raise ValueError(f"lambda1 must be >= 0, got {self.lambda1}")

    def active(self, i: int) -> bool:
        """Whether iteration ``i`` (1-based) takes a TV step."""
        return i % self.period_k == 0


def tv_value(img) -> float:
    img = check_image(img)
    dv = np.abs(np.diff(img, axis=0)).sum()
    dh = np.abs(np.diff(img, axis=1)).sum()
    return float(dv + dh)


def tv_gradient(img) -> np.ndarray:
    """Subgradient of :func:`tv_value`, using ``sign(0) = 0``."""
    img = check_image(img)
    g = np.zeros_like(img)
    sv = np.sign(img[1:] - img[:-1])
    sh = np.sign(img[:, 1:] - img[:, :-1])
    g[1:] += sv
    g[:-1] -= sv
    g[:, 1:] += sh
    g[:, :-1] -= sh
    return g
