"""Shared plumbing for the wrapper-box estimators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..errors import ValidationError
from ..validation import check_features, check_labels, check_query


@dataclass
class SupportSet:
    """The training rows a wrapper box consulted for one prediction.

    ``indices`` are positions into the fitted training set, ranked by the
    model's own notion of centrality (most relevant first); ``relevance`` is
    the negative distance backing that ranking.
    """

    prediction: int
    indices: np.ndarray
    relevance: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.relevance = np.asarray(self.relevance, dtype=np.float64)


class WrapperBox(BaseEstimator, ClassifierMixin):
    """Base class for classifiers whose predictions cite training rows.

    Subclasses implement ``_fit`` and ``support``; prediction is the
    majority label of the support set, so explanations are faithful by
    construction.
    """

    def fit(self, X, y):
        X = check_features(X)
        y, n_classes = check_labels(y, X.shape[0], getattr(self, "n_classes", None))
        self.X_ = X
        self.y_ = y
        self.n_classes_ = n_classes
        self.n_dims_ = X.shape[1]
        self._fit(X, y)
        return self

    def _fit(self, X, y):
        raise NotImplementedError

    def support(self, x) -> SupportSet:
        """Prediction plus the ranked training rows that produced it."""
        raise NotImplementedError

    def rank_candidates(self, x) -> np.ndarray:
        """Candidate training rows for attribution, most relevant first."""
        raise NotImplementedError

    def predict_one(self, x) -> int:
        return self.support(x).prediction

    def predict(self, X):
        check_is_fitted(self, "X_")
        X = check_features(X)
        if X.shape[1] != self.n_dims_:
            raise ValidationError(
                f"dimension mismatch: X has {X.shape[1]} features, model expects {self.n_dims_}"
            )
        return np.array([self.predict_one(row) for row in X], dtype=np.int64)

    def _check_query(self, x):
        check_is_fitted(self, "X_")
        return check_query(x, self.n_dims_)


def ranked_by_distance(X, rows, point) -> tuple[np.ndarray, np.ndarray]:
    """Sort ``rows`` by squared distance to ``point``; ties by ascending row.

    Returns the reordered rows and the matching distances (not squared).
    """
    rows = np.asarray(rows, dtype=np.int64)
    d2 = ((X[rows] - point) ** 2).sum(axis=1)
    order = np.lexsort((rows, d2))
    return rows[order], np.sqrt(d2[order])
