"""Saliency-driven class impressions for differentiable image classifiers."""

from .classifier import ConvNetClassifier
from .network import Classifier, NetworkWeights, load_weights, save_weights
from .synthesis import RunResult, SaliencyClassImpressions

__all__ = [
    "Classifier",
    "ConvNetClassifier",
    "NetworkWeights",
    "RunResult",
    "SaliencyClassImpressions",
    "load_weights",
    "save_weights",
]

__version__ = "0.1.0"
