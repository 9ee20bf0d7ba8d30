import numpy as np
import pytest

from conftest import vote
from wrapbox import TreeBox, ValidationError


def oracle_best_split(X, y, n_classes, min_samples_leaf):
    """Independent exhaustive search: every feature, every midpoint, direct Gini."""

    def gini(labels):
        if labels.size == 0:
            return 0.0
        p = np.bincount(labels, minlength=n_classes) / labels.size
        return 1.0 - float((p * p).sum())

    n = X.shape[0]
    best = None
    for f in range(X.shape[1]):
        for t in np.unique(X[:, f]):
            for other in np.unique(X[:, f]):
                if other <= t:
                    continue
                thr = (t + other) / 2.0
                if not thr > t:
                    continue
                left = X[:, f] < thr
                nl, nr = int(left.sum()), int((~left).sum())
                if nl < min_samples_leaf or nr < min_samples_leaf:
                    continue
                gain = gini(y) - (nl * gini(y[left]) + nr * gini(y[~left])) / n
                if best is None or gain > best[0] + 1e-12:
                    best = (gain, f, thr)
    return best


class TestTreeExamples:
    def test_separable_depth1(self, rng):
        x = np.concatenate([rng.uniform(0, 4.5, 30), rng.uniform(5.5, 10, 30)])
        y = (x > 5).astype(int)
        box = TreeBox(max_depth=1, min_samples_leaf=5).fit(x.reshape(-1, 1), y)
        root = box.nodes_[0]
        assert root["kind"] == "split"
        lo = x[y == 0].max()
        hi = x[y == 1].min()
        assert lo < root["threshold"] < hi
        assert (box.predict(x.reshape(-1, 1)) == y).all()
        # independent oracle agrees this is the best achievable gain
        gain, feat, thr = oracle_best_split(x.reshape(-1, 1), y, 2, 5)
        assert feat == root["feature"] == 0
        assert lo < thr < hi

    def test_depth0_is_the_prior(self):
        X = np.arange(10, dtype=float).reshape(-1, 1)
        y = np.array([0] * 6 + [1] * 4)
        box = TreeBox(max_depth=0, min_samples_leaf=1).fit(X, y)
        assert len(box.nodes_) == 1
        assert box.nodes_[0]["label"] == 0
        assert box.predict_one([99.0]) == 0
        # single leaf: support is the whole training set
        assert sorted(box.support([99.0]).indices.tolist()) == list(range(10))

    def test_pure_labels_single_leaf(self):
        X = np.arange(8, dtype=float).reshape(-1, 1)
        y = np.zeros(8, dtype=int)
        box = TreeBox(max_depth=3, min_samples_leaf=1, n_classes=2).fit(X, y)
        assert len(box.nodes_) == 1

    def test_min_samples_leaf_too_large(self):
        X = np.arange(5, dtype=float).reshape(-1, 1)
        with pytest.raises(ValidationError, match="min_samples_leaf"):
            TreeBox(min_samples_leaf=6).fit(X, np.array([0, 0, 1, 1, 1]))


class TestRouting:
    def test_query_at_threshold_goes_right(self):
        X = np.array([[0.0], [1.0], [3.0], [4.0]])
        y = np.array([0, 0, 1, 1])
        box = TreeBox(max_depth=1, min_samples_leaf=1).fit(X, y)
        thr = box.nodes_[0]["threshold"]
        assert thr == 2.0
        right_leaf = box.apply_one([thr])
        assert right_leaf == box.nodes_[0]["right"]
        assert box.predict_one([thr]) == 1

    def test_support_is_leaf_ranked_by_distance(self, rng):
        x = np.concatenate([rng.uniform(0, 4, 20), rng.uniform(6, 10, 20)])
        y = (x > 5).astype(int)
        box = TreeBox(max_depth=1, min_samples_leaf=3).fit(x.reshape(-1, 1), y)
        sup = box.support([2.0])
        members = box.leaf_members(box.apply_one([2.0]))
        assert sorted(sup.indices.tolist()) == sorted(members.tolist())
        dists = np.abs(x[sup.indices] - 2.0)
        assert (np.diff(dists) >= -1e-12).all()


class TestTreeInvariants:
    def test_leaves_partition_training_rows(self, rng):
        X = rng.standard_normal((120, 4))
        y = rng.integers(0, 3, 120)
        box = TreeBox(max_depth=3, min_samples_leaf=10).fit(X, y)
        seen = np.concatenate([box.nodes_[i]["members"] for i in box.leaf_ids_])
        assert np.array_equal(np.sort(seen), np.arange(120))
        for i in box.leaf_ids_:
            leaf = box.nodes_[i]
            assert leaf["members"].size >= 10
            assert leaf["label"] == vote(y[leaf["members"]], box.n_classes_)

    def test_faithfulness(self, rng):
        X = rng.standard_normal((80, 3))
        y = rng.integers(0, 2, 80)
        box = TreeBox(max_depth=3, min_samples_leaf=5).fit(X, y)
        for q in rng.standard_normal((50, 3)):
            sup = box.support(q)
            assert sup.prediction == vote(box.y_[sup.indices], box.n_classes_)

    def test_split_beats_every_alternative(self, rng):
        # Fitted root split must match the independent exhaustive oracle.
        for trial in range(5):
            X = rng.standard_normal((40, 3))
            y = rng.integers(0, 2, 40)
            box = TreeBox(max_depth=1, min_samples_leaf=2).fit(X, y)
            best = oracle_best_split(X, y, 2, 2)
            root = box.nodes_[0]
            if best is None:
                assert root["kind"] == "leaf"
                continue
            gain, feat, thr = best
            assert root["kind"] == "split"
            assert (root["feature"], root["threshold"]) == (feat, thr) or np.isclose(
                gain, self._achieved_gain(X, y, root, 2), atol=1e-12
            )

    @staticmethod
    def _achieved_gain(X, y, root, n_classes):
        def gini(labels):
            if labels.size == 0:
                return 0.0
            p = np.bincount(labels, minlength=n_classes) / labels.size
            return 1.0 - float((p * p).sum())

        left = X[:, root["feature"]] < root["threshold"]
        n = X.shape[0]
        return gini(y) - (left.sum() * gini(y[left]) + (~left).sum() * gini(y[~left])) / n
