"""Input validation helpers used by every estimator and pipeline entry point."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def check_features(X, *, name="X") -> np.ndarray:
    """Coerce to a 2-D float64 matrix with only finite values."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D matrix, got ndim={X.ndim}")
    if X.shape[0] == 0:
        raise ValidationError(f"{name} is empty")
    if not np.all(np.isfinite(X)):
        bad = int(np.argwhere(~np.isfinite(X).all(axis=1))[0, 0])
        raise ValidationError(f"{name} contains a non-finite value at row {bad}")
    return X


def check_labels(y, n_rows, n_classes=None, *, name="y") -> tuple[np.ndarray, int]:
    """Coerce labels to int64, validate range, and resolve n_classes.

    When ``n_classes`` is None it is inferred as ``max(y) + 1``.
    """
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValidationError(f"{name} must be a 1-D vector, got ndim={y.ndim}")
    if y.shape[0] != n_rows:
        raise ValidationError(
            f"{name} length {y.shape[0]} does not match {n_rows} feature rows"
        )
    if not np.issubdtype(y.dtype, np.integer):
        y_int = y.astype(np.int64)
        if not np.array_equal(y_int, y):
            raise ValidationError(f"{name} must hold integer class ids")
        y = y_int
    else:
        y = y.astype(np.int64)
    if y.size and y.min() < 0:
        raise ValidationError(f"{name} contains a negative class id")
    if n_classes is None:
        n_classes = int(y.max()) + 1 if y.size else 0
    elif y.size and y.max() >= n_classes:
        raise ValidationError(
            f"{name} contains class id {int(y.max())} >= n_classes={n_classes}"
        )
    return y, int(n_classes)


def check_query(x, n_dims, *, name="x") -> np.ndarray:
    """Coerce a single query point to 1-D float64 of the fitted width."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != n_dims:
        raise ValidationError(
            f"dimension mismatch: {name} has {x.shape[0]} features, model expects {n_dims}"
        )
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"{name} contains a non-finite value")
    return x


def check_query_matrix(X, n_dims, *, name="X") -> np.ndarray:
    X = check_features(X, name=name)
    if X.shape[1] != n_dims:
        raise ValidationError(
            f"dimension mismatch: {name} has {X.shape[1]} features, model expects {n_dims}"
        )
    return X


def majority_label(labels, n_classes) -> int:
    """Majority vote; ties broken toward the lowest class id."""
    counts = np.bincount(labels, minlength=n_classes)
    return int(np.argmax(counts))
