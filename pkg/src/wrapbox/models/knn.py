"""Exact k-nearest-neighbor classification over a bucketed kd-tree."""

from __future__ import annotations

import heapq

import numpy as np

from ..errors import ValidationError
from ..validation import majority_label
from .base import SupportSet, WrapperBox

_LEAF_SIZE = 32


class _Node:
    __slots__ = ("axis", "split", "left", "right", "idx", "block")

    def __init__(self, axis=-1, split=0.0, left=None, right=None, idx=None, block=None):
        self.axis = axis
        self.split = split
        self.left = left
        self.right = right
        self.idx = idx
        self.block = block


class KdTree:
    """Exact Euclidean k-NN; distance ties broken by ascending row index.

    Query results are identical to a brute-force scan ordered by
    (squared distance, row index).
    """

    def __init__(self, X, leaf_size=_LEAF_SIZE):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.leaf_size = int(leaf_size)
        self.n, self.d = self.X.shape
        self.root = self._build(np.arange(self.n, dtype=np.int64), 0)

    def _leaf(self, idx):
        # Leaf blocks are copied contiguously so query-time row sums use
        # the same reduction order as a brute-force scan.
        idx = np.sort(idx)
        return _Node(idx=idx, block=self.X[idx])

    def _build(self, idx, depth):
        if idx.size <= self.leaf_size:
            return self._leaf(idx)
        for probe in range(self.d):
            axis = (depth + probe) % self.d
            values = self.X[idx, axis]
            if values.min() < values.max():
                break
        else:
            return self._leaf(idx)  # all remaining points identical
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        # Left child holds values strictly below split, right holds >= split;
        # both sides stay nonempty.
        mid = idx.size // 2
        split = float(sorted_vals[mid])
        mid = int(np.searchsorted(sorted_vals, split, side="left"))
        if mid == 0:
            mid = int(np.searchsorted(sorted_vals, split, side="right"))
            split = float(sorted_vals[mid])
        left = self._build(idx[order[:mid]], depth + 1)
        right = self._build(idx[order[mid:]], depth + 1)
        return _Node(axis=axis, split=split, left=left, right=right)

    def query(self, q, k):
        """Indices and squared distances of the k nearest rows, best first."""
        q = np.asarray(q, dtype=np.float64)
        if not 1 <= k <= self.n:
            raise ValidationError(f"k={k} outside [1, {self.n}]")
        # Max-heap of the current k best, keyed by (-d2, -idx).
        heap: list[tuple[float, int]] = []
        self._visit(self.root, q, k, heap)
        best = sorted((-neg_d2, -neg_i) for neg_d2, neg_i in heap)
        idx = np.array([i for _, i in best], dtype=np.int64)
        d2 = np.array([d for d, _ in best], dtype=np.float64)
        return idx, d2

    def _visit(self, node, q, k, heap):
        if node.idx is not None:
            d2 = ((node.block - q) ** 2).sum(axis=1)
            order = np.lexsort((node.idx, d2))
            for j in order:
                cand = (float(d2[j]), int(node.idx[j]))
                if len(heap) < k:
                    heapq.heappush(heap, (-cand[0], -cand[1]))
                else:
                    worst = (-heap[0][0], -heap[0][1])
                    if cand < worst:
                        heapq.heapreplace(heap, (-cand[0], -cand[1]))
                    else:
                        break
            return
        diff = q[node.axis] - node.split
        near, far = (node.left, node.right) if diff < 0 else (node.right, node.left)
        self._visit(near, q, k, heap)
        # Equality must still descend: an equidistant point with a lower row
        # index can displace the current worst.
        if len(heap) < k or diff * diff <= -heap[0][0]:
            self._visit(far, q, k, heap)


class KnnBox(WrapperBox):
    """Unweighted k-NN wrapper box; the k neighbors are the explanation.

    Majority-vote ties go to the lowest class id; equal distances rank by
    ascending training-row index.
    """

    def __init__(self, k=5, n_classes=None):
        self.k = k
        self.n_classes = n_classes

    def _fit(self, X, y):
        if not 1 <= self.k <= X.shape[0]:
            raise ValidationError(f"k={self.k} outside [1, n_train={X.shape[0]}]")
        self.tree_ = KdTree(X)
        self.train_ref_ = np.arange(X.shape[0], dtype=np.int64)

    def kneighbors(self, x, k=None):
        x = self._check_query(x)
        k = self.k if k is None else int(k)
        idx, d2 = self.tree_.query(x, k)
        return idx, np.sqrt(d2)

    def support(self, x, k=None) -> SupportSet:
        idx, dist = self.kneighbors(x, k)
        label = majority_label(self.y_[idx], self.n_classes_)
        return SupportSet(prediction=label, indices=idx, relevance=-dist)

    def rank_candidates(self, x) -> np.ndarray:
        """All training rows ranked by proximity to the query."""
        x = self._check_query(x)
        d2 = ((self.X_ - x) ** 2).sum(axis=1)
        return np.lexsort((np.arange(self.X_.shape[0]), d2)).astype(np.int64)

    def get_state(self) -> dict:
        return {"train_ref": self.train_ref_.tolist()}

    def set_state(self, state, X, y):
        self.fit(X, y)  # kd-tree rebuild is deterministic
        self.train_ref_ = np.asarray(state["train_ref"], dtype=np.int64)
        return self
