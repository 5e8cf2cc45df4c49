"""scikit-learn estimator wrapper around :mod:`sciviz.network`."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from . import network
from .validation import check_images


class ConvNetClassifier(ClassifierMixin, BaseEstimator):
    """Small numpy CNN trained with mini-batch SGD on cross-entropy.

    ``X`` may be ``(N, H, W, C)``, ``(N, H, W)`` or flat rows of
    ``H * W * C`` intensities in ``[0, 255]``; labels must be integers in
    ``[0, n_classes)``. Fitted instances satisfy the
    :class:`sciviz.network.Classifier` protocol.
    """

    def __init__(self, input_shape=(28, 28, 1), n_classes=10, layers=None, epochs=10,
                 batch_size=64, step_size=0.1, random_state=0):
        self.input_shape = input_shape
        self.n_classes = n_classes
        self.layers = layers
        self.epochs = epochs
        self.batch_size = batch_size
        self.step_size = step_size
        self.random_state = random_state

    def fit(self, X, y, X_val=None, y_val=None):
        X = check_images(X, tuple(self.input_shape))
        y = np.asarray(y).astype(np.int64)
        if len(X) != len(y):
            raise ValueError(f"X has {len(X)} samples but y has {len(y)}")
        layers = self.layers
        if layers is None:
            layers = network.default_architecture(tuple(self.input_shape), self.n_classes)
        if X_val is not None:
            X_val = check_images(X_val, tuple(self.input_shape))
        self.weights_, self.history_ = network.train_classifier(
            X, y, epochs=self.epochs, batch_size=self.batch_size, step_size=self.step_size,
            seed=self.random_state, layers=layers, X_test=X_val, y_test=y_val,
        )
        self.classes_ = np.arange(self.weights_.num_classes)
        return self

    @classmethod
    def from_weights(cls, weights: network.NetworkWeights) -> "ConvNetClassifier":
        est = cls(input_shape=weights.input_shape, n_classes=weights.num_classes,
                  layers=weights.layers)
        est.weights_ = weights
        est.history_ = {}
        est.classes_ = np.arange(weights.num_classes)
        return est

    @classmethod
    def load(cls, path) -> "ConvNetClassifier":
        return cls.from_weights(network.load_weights(path))

    def save(self, path) -> None:
        check_is_fitted(self, "weights_")
        network.save_weights(self.weights_, path)

    # Classifier protocol --------------------------------------------------

    @property
    def num_classes(self) -> int:
        check_is_fitted(self, "weights_")
        return self.weights_.num_classes

    @property
    def fingerprint(self) -> str:
        check_is_fitted(self, "weights_")
        return self.weights_.fingerprint

    def forward_logits(self, img) -> np.ndarray:
        check_is_fitted(self, "weights_")
        return network.forward_logits(self.weights_, img)

    def input_gradient(self, img, objective) -> np.ndarray:
        check_is_fitted(self, "weights_")
        return network.input_gradient(self.weights_, img, objective)

    def logits_and_input_gradient(self, img, objective):
        check_is_fitted(self, "weights_")
        return network.logits_and_input_gradient(self.weights_, img, objective)

    # sklearn surface ----------------------------------------------------------

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "weights_")
        X = check_images(X, self.weights_.input_shape)
        return np.concatenate([network.forward_batch(self.weights_, X[s : s + 500])
                               for s in range(0, len(X), 500)])

    def predict_proba(self, X) -> np.ndarray:
        return network.softmax(self.decision_function(X), axis=1)

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]
