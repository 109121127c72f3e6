"""Scikit-learn style estimators wrapping the inference kernels.

CosineCentroidClassifier is the single building block: fit on visual
support embeddings for the visual route, or on prompt embeddings grouped
by class label for the textual route; the math is the same class-mean
plus cosine-softmax either way. StackedFusionClassifier combines a
prefit textual classifier with a visual one fitted on support data.

The evaluation harness calls the kernels directly; these estimators are
the composable interface for notebook use and pipelines.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import ConfigError
from .inference import (
    DEFAULT_TEMPERATURE,
    FUSE_MODES,
    fuse,
    mean_by_slot,
    predict as argmax_predict,
    renormalize_rows,
    similarity_matrix,
    softmax_rows,
)


class CosineCentroidClassifier(ClassifierMixin, BaseEstimator):
    """Nearest class-mean classifier under cosine similarity.

    Fitting stores one unnormalized centroid per class. Scoring computes
    cosine similarity to each centroid and a temperature softmax over the
    similarity rows.

    Args:
        temperature: softmax temperature; smaller values sharpen the
            output distribution.
    """

    def __init__(self, temperature: float = DEFAULT_TEMPERATURE):
        self.temperature = temperature

    def fit(self, X, y) -> "CosineCentroidClassifier":
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, slots = np.unique(y, return_inverse=True)
        if self.classes_.shape[0] < 2:
            raise ValueError("CosineCentroidClassifier needs at least 2 classes")
        self.centroids_ = mean_by_slot(X, slots, self.classes_.shape[0], "support")
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "centroids_")
        X = check_array(X, dtype=np.float64)
        return similarity_matrix(X, self.centroids_)

    def transform(self, X) -> np.ndarray:
        """Cosine similarity of each row to each fitted centroid."""
        return self.decision_function(X)

    def predict_proba(self, X) -> np.ndarray:
        return softmax_rows(self.decision_function(X), self.temperature)

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "centroids_")
        return self.classes_[argmax_predict(self.predict_proba(X))]


class StackedFusionClassifier(ClassifierMixin, BaseEstimator):
    """Class-wise fusion of a prefit textual classifier with a visual one.

    The textual side is passed in already fitted (its training data are
    prompt embeddings, not the support set). ``fit`` trains the visual
    side on support embeddings and checks that both sides agree on the
    class vocabulary; prediction fuses the two probability distributions
    by element-wise max or mean and takes the argmax.

    Args:
        text_classifier: fitted CosineCentroidClassifier over prompt
            embeddings.
        mode: "max" or "avg" fusion of the two probability rows.
        temperature: softmax temperature for the visual side.
    """

    def __init__(
        self,
        text_classifier: CosineCentroidClassifier,
        mode: str = "max",
        temperature: float = DEFAULT_TEMPERATURE,
    ):
        self.text_classifier = text_classifier
        self.mode = mode
        self.temperature = temperature

    def fit(self, X, y) -> "StackedFusionClassifier":
        if self.mode not in FUSE_MODES:
            raise ConfigError(f"fuse mode must be one of {FUSE_MODES}, got {self.mode!r}")
        check_is_fitted(self.text_classifier, "centroids_")
        visual = CosineCentroidClassifier(temperature=self.temperature)
        visual.fit(X, y)
        if not np.array_equal(visual.classes_, self.text_classifier.classes_):
            raise ValueError("textual and visual classifiers disagree on class labels")
        self.visual_classifier_ = visual
        self.classes_ = visual.classes_
        self.n_features_in_ = visual.n_features_in_
        return self

    def _fused_weights(self, X) -> np.ndarray:
        check_is_fitted(self, "visual_classifier_")
        return fuse(
            self.visual_classifier_.predict_proba(X),
            self.text_classifier.predict_proba(X),
            self.mode,
        )

    def predict_proba(self, X) -> np.ndarray:
        # Max-fused rows sum to more than 1 by construction; rescale so
        # this matches the row-stochastic predict_proba contract. The
        # argmax, and hence predict, is unaffected.
        return renormalize_rows(self._fused_weights(X))

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "visual_classifier_")
        return self.classes_[argmax_predict(self._fused_weights(X))]
