"""CART decision tree with Gini impurity and explicit leaf membership."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ..validation import majority_label
from .base import SupportSet, WrapperBox, ranked_by_distance


def _gini(counts, total):
    if total == 0:
        return 0.0
    p = counts / total
    return 1.0 - float((p * p).sum())


def best_split(X, y, rows, n_classes, min_samples_leaf):
    """Exhaustive CART split search over one node.

    Thresholds sit at midpoints of consecutive distinct sorted values;
    the best Gini gain wins with ties resolved to the lower feature index
    and then the lower threshold. Returns None when no split improves.
    """
    n = rows.size
    parent_counts = np.bincount(y[rows], minlength=n_classes).astype(np.float64)
    parent_gini = _gini(parent_counts, n)
    onehot = np.eye(n_classes, dtype=np.float64)
    best = None  # (gain, feature, threshold)
    for f in range(X.shape[1]):
        values = X[rows, f]
        order = np.argsort(values, kind="stable")
        sv = values[order]
        # left_counts[i] = class histogram of the i smallest values
        left = np.cumsum(onehot[y[rows[order]]], axis=0)
        sizes = np.arange(1, n, dtype=np.float64)
        thresholds = (sv[:-1] + sv[1:]) / 2.0
        valid = (sv[1:] > sv[:-1]) & (thresholds > sv[:-1])
        valid &= (sizes >= min_samples_leaf) & (n - sizes >= min_samples_leaf)
        if not valid.any():
            continue
        lc = left[:-1]
        rc = parent_counts - lc
        gini_l = 1.0 - ((lc / sizes[:, None]) ** 2).sum(axis=1)
        gini_r = 1.0 - ((rc / (n - sizes)[:, None]) ** 2).sum(axis=1)
        gains = parent_gini - (sizes * gini_l + (n - sizes) * gini_r) / n
        gains[~valid] = -np.inf
        top = float(gains.max())
        if top <= 0:
            continue
        # thresholds ascend with i, so the first argmax is the lowest one
        i = int(np.argmax(gains))
        if best is None or top > best[0]:
            best = (top, f, float(thresholds[i]))
    return best


class TreeBox(WrapperBox):
    """Decision-tree wrapper box; a leaf's members are the explanation.

    Routing rule: a query goes right when ``x[feature] >= threshold``.
    """

    def __init__(self, max_depth=3, min_samples_leaf=20, n_classes=None):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.n_classes = n_classes

    def _fit(self, X, y):
        if self.max_depth < 0:
            raise ValidationError(f"max_depth={self.max_depth} must be >= 0")
        if not 1 <= self.min_samples_leaf <= X.shape[0]:
            raise ValidationError(
                f"min_samples_leaf={self.min_samples_leaf} outside [1, n_train={X.shape[0]}]"
            )
        self.nodes_ = []
        self._grow(np.arange(X.shape[0], dtype=np.int64), 0)
        self.leaf_ids_ = [i for i, nd in enumerate(self.nodes_) if nd["kind"] == "leaf"]

    def _grow(self, rows, depth) -> int:
        node_id = len(self.nodes_)
        self.nodes_.append(None)  # reserve slot so children index after parent
        split = None
        if depth < self.max_depth and rows.size >= 2 * self.min_samples_leaf:
            counts = np.bincount(self.y_[rows], minlength=self.n_classes_)
            if np.count_nonzero(counts) > 1:
                split = best_split(
                    self.X_, self.y_, rows, self.n_classes_, self.min_samples_leaf
                )
        if split is None:
            self.nodes_[node_id] = {
                "kind": "leaf",
                "members": np.sort(rows),
                "label": majority_label(self.y_[rows], self.n_classes_),
            }
            return node_id
        _, feature, threshold = split
        go_right = self.X_[rows, feature] >= threshold
        left_id = self._grow(rows[~go_right], depth + 1)
        right_id = self._grow(rows[go_right], depth + 1)
        self.nodes_[node_id] = {
            "kind": "split",
            "feature": int(feature),
            "threshold": float(threshold),
            "left": left_id,
            "right": right_id,
        }
        return node_id

    def apply_one(self, x) -> int:
        """Leaf id reached by the query."""
        x = self._check_query(x)
        node_id = 0
        node = self.nodes_[0]
        while node["kind"] == "split":
            node_id = node["right"] if x[node["feature"]] >= node["threshold"] else node["left"]
            node = self.nodes_[node_id]
        return node_id

    def support(self, x) -> SupportSet:
        leaf = self.nodes_[self.apply_one(x)]
        x = np.asarray(x, dtype=np.float64).ravel()
        members, dist = ranked_by_distance(self.X_, leaf["members"], x)
        return SupportSet(prediction=leaf["label"], indices=members, relevance=-dist)

    def rank_candidates(self, x) -> np.ndarray:
        """Members of the reached leaf, ranked by proximity to the query."""
        return self.support(x).indices

    def predict_one(self, x) -> int:
        return self.nodes_[self.apply_one(x)]["label"]

    def leaf_members(self, leaf_id) -> np.ndarray:
        node = self.nodes_[leaf_id]
        if node["kind"] != "leaf":
            raise ValidationError(f"node {leaf_id} is not a leaf")
        return node["members"]

    def get_state(self) -> dict:
        nodes = []
        for nd in self.nodes_:
            if nd["kind"] == "leaf":
                nodes.append(
                    {"kind": "leaf", "members": nd["members"].tolist(), "label": nd["label"]}
                )
            else:
                nodes.append(dict(nd))
        return {"nodes": nodes}

    def set_state(self, state, X, y):
        X = np.asarray(X, dtype=np.float64)
        self.X_ = X
        self.y_ = np.asarray(y, dtype=np.int64)
        self.n_classes_ = self.n_classes or int(self.y_.max()) + 1
        self.n_dims_ = X.shape[1]
        self.nodes_ = []
        for nd in state["nodes"]:
            if nd["kind"] == "leaf":
                self.nodes_.append(
                    {
                        "kind": "leaf",
                        "members": np.asarray(nd["members"], dtype=np.int64),
                        "label": int(nd["label"]),
                    }
                )
            else:
                self.nodes_.append(
                    {
                        "kind": "split",
                        "feature": int(nd["feature"]),
                        "threshold": float(nd["threshold"]),
                        "left": int(nd["left"]),
                        "right": int(nd["right"]),
                    }
                )
        self.leaf_ids_ = [i for i, nd in enumerate(self.nodes_) if nd["kind"] == "leaf"]
        return self
