import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import vote
from wrapbox import (
    KnnBox,
    LMeansBox,
    Policy,
    PolicyUnavailableError,
    TreeBox,
    ValidationError,
    explain,
)


def ranked_knn():
    # query 0 sees ranks 1..5 with labels [1, 0, 0, 1, 0]; majority is 0
    X = np.array([[1.0], [2.0], [3.0], [4.0], [5.0]])
    y = np.array([1, 0, 0, 1, 0])
    return KnnBox(k=5).fit(X, y), np.array([0.0])


def rule_trace(labels, prediction, m, n_classes):
    """Independent re-statement of the downsampling rule, on rank positions."""
    chosen = list(range(m))
    used = m
    while vote(labels[chosen], n_classes) != prediction:
        bad = [p for p in chosen if labels[p] != prediction]
        drop = max(bad)
        add = next(r for r in range(used, len(labels)) if labels[r] == prediction)
        chosen.remove(drop)
        chosen.append(add)
        used = add + 1
        chosen.sort()
    return chosen


class TestCaseI:
    def test_full_support_faithful(self):
        box, q = ranked_knn()
        exp = explain(box, q, Policy.CASE_I)
        assert exp.shown.tolist() == [0, 1, 2, 3, 4]
        assert exp.faithful is True
        assert exp.n_used == 5
        assert exp.prediction == 0

    def test_m_ignored(self):
        box, q = ranked_knn()
        exp = explain(box, q, Policy.CASE_I, m=2)
        assert exp.shown.size == 5


class TestCaseII:
    def test_m2_keeps_pure_prefix_because_tie_breaks_to_prediction(self):
        box, q = ranked_knn()
        exp = explain(box, q, Policy.CASE_II, m=2)
        # top-2 labels {1, 0}: tie-broken mode is 0 == prediction, no swap
        assert exp.shown.tolist() == [0, 1]
        assert exp.faithful is False

    def test_m1_skips_to_nearest_prediction_label(self):
        box, q = ranked_knn()
        exp = explain(box, q, Policy.CASE_II, m=1)
        # nearest row is label 1, so the nearest label-0 row is shown instead
        assert exp.shown.tolist() == [1]
        assert exp.faithful is False

    def test_m_equals_n_is_faithful(self):
        box, q = ranked_knn()
        exp = explain(box, q, Policy.CASE_II, m=5)
        assert exp.faithful is True
        assert exp.shown.size == 5

    def test_m_too_large_rejected(self):
        box, q = ranked_knn()
        with pytest.raises(ValidationError, match="m=6 exceeds"):
            explain(box, q, Policy.CASE_II, m=6)

    def test_tree_leaf_downsample(self, rng):
        # depth-0 tree: one 40-member leaf, majority label 1
        X = rng.standard_normal((40, 2))
        y = np.array([0] * 15 + [1] * 25)
        box = TreeBox(max_depth=0, min_samples_leaf=1).fit(X, y)
        q = rng.standard_normal(2)
        exp = explain(box, q, Policy.CASE_II, m=3)
        assert exp.prediction == 1
        assert vote(y[exp.shown], 2) == 1
        sup = box.support(q)
        trace = rule_trace(y[sup.indices], 1, 3, 2)
        assert exp.shown.tolist() == sup.indices[trace].tolist()

    @given(
        labels=st.lists(st.integers(0, 2), min_size=2, max_size=25),
        m=st.integers(1, 25),
        seed=st.integers(0, 9999),
    )
    @settings(max_examples=120, deadline=None)
    def test_property_consistency(self, labels, m, seed):
        rng = np.random.default_rng(seed)
        y = np.array(labels)
        n = y.size
        if m > n:
            m = n
        X = np.sort(rng.uniform(1, 10, n)).reshape(-1, 1)
        box = KnnBox(k=n, n_classes=3).fit(X, y)
        exp = explain(box, [0.0], Policy.CASE_II, m=m)
        # consistency: mode of shown labels equals the prediction
        assert vote(y[exp.shown], 3) == exp.prediction
        assert exp.shown.size == m
        # proximity is only ever sacrificed for label reasons: every unchosen
        # candidate outranking a chosen one carries a non-predicted label
        sup = box.support([0.0])
        chosen = set(exp.shown.tolist())
        ranked = sup.indices.tolist()
        worst_rank = max(ranked.index(i) for i in chosen)
        for row in ranked[:worst_rank]:
            if row not in chosen:
                assert y[row] != exp.prediction

    @given(
        labels=st.lists(st.integers(0, 1), min_size=2, max_size=25),
        m=st.integers(1, 25),
        seed=st.integers(0, 9999),
    )
    @settings(max_examples=120, deadline=None)
    def test_property_prefix_optimality_binary(self, labels, m, seed):
        # binary form: swapping any outranking unchosen row in for the
        # worst-ranked chosen row must break label consistency
        rng = np.random.default_rng(seed)
        y = np.array(labels)
        n = y.size
        if m > n:
            m = n
        X = np.sort(rng.uniform(1, 10, n)).reshape(-1, 1)
        box = KnnBox(k=n, n_classes=2).fit(X, y)
        exp = explain(box, [0.0], Policy.CASE_II, m=m)
        assert vote(y[exp.shown], 2) == exp.prediction
        sup = box.support([0.0])
        chosen = set(exp.shown.tolist())
        ranked = sup.indices.tolist()
        worst_rank = max(ranked.index(i) for i in chosen)
        for row in ranked[:worst_rank]:
            if row in chosen:
                continue
            swapped = (chosen - {ranked[worst_rank]}) | {row}
            assert vote(y[sorted(swapped)], 2) != exp.prediction

    def test_relevance_is_negative_distance(self):
        box, q = ranked_knn()
        exp = explain(box, q, Policy.CASE_II, m=2)
        assert np.allclose(exp.relevance, [-1.0, -2.0])


class TestCaseIII:
    def test_knn_reduced_inference_set(self):
        box, q = ranked_knn()
        exp = explain(box, q, Policy.CASE_III, m=3)
        # the model is re-run with k=3: labels {1,0,0} vote 0
        assert exp.shown.tolist() == [0, 1, 2]
        assert exp.prediction == 0
        assert exp.faithful is True
        assert exp.n_used == 3

    def test_prediction_may_differ_from_full_k(self):
        X = np.array([[1.0], [2.0], [3.0], [4.0], [5.0]])
        y = np.array([1, 1, 0, 0, 0])
        box = KnnBox(k=5).fit(X, y)
        assert box.predict_one([0.0]) == 0
        exp = explain(box, [0.0], Policy.CASE_III, m=2)
        assert exp.prediction == 1

    def test_unavailable_for_tree_and_lmeans(self, rng):
        X = rng.standard_normal((30, 2))
        y = rng.integers(0, 2, 30)
        tree = TreeBox(max_depth=1, min_samples_leaf=5).fit(X, y)
        lm = LMeansBox(random_state=0).fit(X, y)
        for box in (tree, lm):
            with pytest.raises(PolicyUnavailableError, match="policy unavailable"):
                explain(box, X[0], Policy.CASE_III, m=2)


class TestFaithfulnessAcrossBoxes:
    def test_case1_mode_matches_prediction_everywhere(self, rng):
        X = rng.standard_normal((60, 3))
        y = rng.integers(0, 3, 60)
        boxes = [
            KnnBox(k=7).fit(X, y),
            TreeBox(max_depth=2, min_samples_leaf=5).fit(X, y),
            LMeansBox(n_clusters=4, random_state=0).fit(X, y),
        ]
        for box in boxes:
            for q in rng.standard_normal((25, 3)):
                exp = explain(box, q, Policy.CASE_I)
                assert exp.faithful
                assert vote(y[exp.shown], 3) == exp.prediction
