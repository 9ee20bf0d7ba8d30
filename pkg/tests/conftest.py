import numpy as np
import pytest


def brute_force_neighbors(X, q, k):
    """Full-scan k-NN oracle: k smallest (squared distance, row index)."""
    X = np.asarray(X, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    d2 = ((X - q) ** 2).sum(axis=1)
    order = np.lexsort((np.arange(X.shape[0]), d2))
    return order[:k], d2[order[:k]]


def vote(labels, n_classes):
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=n_classes)
    return int(np.argmax(counts))


def brute_force_knn_predict(X, y, q, k, n_classes):
    idx, _ = brute_force_neighbors(X, q, min(k, X.shape[0]))
    return vote(np.asarray(y)[idx], n_classes)


def oracle_knn_subset(X, y, k, x, n_classes):
    """Remove-one-retrain oracle: physically delete the nearest predicted-label
    row, re-run brute-force kNN on what is left, stop at the first flip."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    idx, _ = brute_force_neighbors(X, x, min(k, X.shape[0]))
    y_t = vote(y[idx], n_classes)
    remaining = list(range(X.shape[0]))
    removed = []
    while True:
        ranked, _ = brute_force_neighbors(X[remaining], x, len(remaining))
        target = next((r for r in ranked if y[remaining[r]] == y_t), None)
        if target is None:
            return y_t, None
        removed.append(remaining.pop(target))
        if not remaining:
            return y_t, None
        kk = min(k, len(remaining))
        widx, _ = brute_force_neighbors(X[remaining], x, kk)
        pred = vote(y[np.asarray(remaining)[widx]], n_classes)
        if pred != y_t:
            return y_t, removed


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
