"""Nearest-centroid classification over k-means clusters (Lloyd's algorithm)."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ..validation import majority_label
from .base import SupportSet, WrapperBox


def kmeans_plusplus(X, n_clusters, rng):
    """Seed centroids: first uniform, the rest proportional to squared distance."""
    n = X.shape[0]
    centroids = np.empty((n_clusters, X.shape[1]), dtype=np.float64)
    centroids[0] = X[rng.integers(n)]
    d2 = ((X - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, n_clusters):
        total = d2.sum()
        if total > 0:
            pick = int(rng.choice(n, p=d2 / total))
        else:
            pick = int(rng.integers(n))  # all remaining mass on duplicates
        centroids[c] = X[pick]
        d2 = np.minimum(d2, ((X - centroids[c]) ** 2).sum(axis=1))
    return centroids


class LMeansBox(WrapperBox):
    """L-means wrapper box: clusters carry the majority label of their members.

    Prediction assigns the label of the nearest centroid; the cluster's
    members, ranked by centrality, are the explanation. ``n_clusters=None``
    defaults to one cluster per class.
    """

    def __init__(
        self, n_clusters=None, max_iter=300, tol=1e-4, n_init=10, random_state=0, n_classes=None
    ):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.tol = tol
        self.n_init = n_init
        self.random_state = random_state
        self.n_classes = n_classes

    def _lloyd(self, X, L, rng):
        n = X.shape[0]
        centroids = kmeans_plusplus(X, L, rng)
        assignments = np.full(n, -1, dtype=np.int64)
        inertia_history = []
        x2 = (X * X).sum(axis=1)
        for _ in range(self.max_iter):
            c2 = (centroids * centroids).sum(axis=1)
            d2 = np.maximum(x2[:, None] + c2[None, :] - 2.0 * (X @ centroids.T), 0.0)
            new_assign = np.argmin(d2, axis=1)
            new_assign = self._repair_empty(d2, new_assign, L)
            prev_centroids = centroids
            onehot = (new_assign[:, None] == np.arange(L)[None, :]).astype(np.float64)
            counts = onehot.sum(axis=0)
            centroids = (onehot.T @ X) / counts[:, None]
            unchanged = bool(np.array_equal(new_assign, assignments))
            assignments = new_assign
            inertia = float(((X - centroids[assignments]) ** 2).sum())
            inertia_history.append(inertia)
            shift = float(np.sqrt(((centroids - prev_centroids) ** 2).sum(axis=1)).max())
            if shift < self.tol or unchanged:
                break
        return centroids, assignments, inertia_history

    def _fit(self, X, y):
        n = X.shape[0]
        L = self.n_clusters if self.n_clusters is not None else self.n_classes_
        if not 1 <= L <= n:
            raise ValidationError(f"n_clusters={L} outside [1, n_train={n}]")
        if self.n_init < 1:
            raise ValidationError(f"n_init={self.n_init} must be >= 1")
        rng = np.random.default_rng(self.random_state)
        # Lloyd only finds a local optimum; restart from fresh seeds and keep
        # the lowest-inertia run.
        best = None
        for _ in range(self.n_init):
            run = self._lloyd(X, L, rng)
            if best is None or run[2][-1] < best[2][-1]:
                best = run
        centroids, assignments, inertia_history = best

        self.L_ = L
        self.centroids_ = centroids
        self.assignments_ = assignments
        self.inertia_ = inertia_history[-1]
        self.inertia_history_ = inertia_history
        self.cluster_labels_ = np.array(
            [majority_label(y[assignments == c], self.n_classes_) for c in range(L)],
            dtype=np.int64,
        )
        members, dists = [], []
        for c in range(L):
            rows = np.flatnonzero(assignments == c)
            dc = np.sqrt(((X[rows] - centroids[c]) ** 2).sum(axis=1))
            order = np.lexsort((rows, dc))
            members.append(rows[order])
            dists.append(dc[order])
        self.cluster_members_ = members
        self._member_dists = dists

    @staticmethod
    def _repair_empty(d2, assign, L):
        """Give each empty cluster the point farthest from its own centroid.

        Only points from clusters that still have at least two members are
        eligible, so a repair never creates a new empty cluster.
        """
        counts = np.bincount(assign, minlength=L)
        if np.all(counts > 0):
            return assign
        assign = assign.copy()
        own_d2 = d2[np.arange(assign.size), assign]
        for c in range(L):
            if counts[c] > 0:
                continue
            eligible = counts[assign] > 1
            if not np.any(eligible):
                raise ValidationError("cannot repair empty cluster: too few points")
            cand = np.where(eligible, own_d2, -np.inf)
            mover = int(np.argmax(cand))
            counts[assign[mover]] -= 1
            assign[mover] = c
            counts[c] = 1
            own_d2[mover] = 0.0
        return assign

    def cluster_of(self, x) -> int:
        x = self._check_query(x)
        d2 = ((self.centroids_ - x) ** 2).sum(axis=1)
        return int(np.argmin(d2))

    def support(self, x) -> SupportSet:
        c = self.cluster_of(x)
        return SupportSet(
            prediction=int(self.cluster_labels_[c]),
            indices=self.cluster_members_[c],
            relevance=-self._member_dists[c],
        )

    def rank_candidates(self, x) -> np.ndarray:
        """Members of the nearest cluster, ranked by centroid proximity."""
        return self.cluster_members_[self.cluster_of(x)]

    def predict_one(self, x) -> int:
        return int(self.cluster_labels_[self.cluster_of(x)])

    def get_state(self) -> dict:
        return {
            "centroids": self.centroids_.tolist(),
            "assignments": self.assignments_.tolist(),
            "cluster_labels": self.cluster_labels_.tolist(),
        }

    def set_state(self, state, X, y):
        X = np.asarray(X, dtype=np.float64)
        self.X_ = X
        self.y_ = np.asarray(y, dtype=np.int64)
        self.n_classes_ = self.n_classes or int(self.y_.max()) + 1
        self.n_dims_ = X.shape[1]
        self.centroids_ = np.asarray(state["centroids"], dtype=np.float64)
        self.assignments_ = np.asarray(state["assignments"], dtype=np.int64)
        self.cluster_labels_ = np.asarray(state["cluster_labels"], dtype=np.int64)
        self.L_ = self.centroids_.shape[0]
        members, dists = [], []
        for c in range(self.L_):
            rows = np.flatnonzero(self.assignments_ == c)
            dc = np.sqrt(((X[rows] - self.centroids_[c]) ** 2).sum(axis=1))
            order = np.lexsort((rows, dc))
            members.append(rows[order])
            dists.append(dc[order])
        self.cluster_members_ = members
        self._member_dists = dists
        return self
