"""Find minimal-ish training subsets whose removal flips a prediction.

The generic selector removes ranked candidates in cumulative bins with a
model refit per bin, then refines the found subset until it stops
shrinking. The kNN selector exploits unweighted voting to simulate
removals with zero refits.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from math import ceil

import numpy as np
from sklearn.base import clone

from .errors import ValidationError, WrapboxError
from .models import KnnBox, WrapperBox
from .validation import majority_label

log = logging.getLogger(__name__)


@dataclass
class SubsetResult:
    test_row: int
    original_prediction: int
    subset: np.ndarray
    found: bool
    verified: bool = False
    retrain_count: int = 0
    wall_time: float = 0.0
    diagnostic: str | None = None
    refinement_sizes: list = field(default_factory=list)

    def __post_init__(self):
        self.subset = np.asarray(self.subset, dtype=np.int64)

    @property
    def size(self) -> int:
        return int(self.subset.size)


@dataclass
class AttributionConfig:
    bins: int = 10
    phi: int = 100

    def __post_init__(self):
        if self.bins < 1:
            raise ValidationError(f"bins={self.bins} must be >= 1")
        if self.phi < 1:
            raise ValidationError(f"phi={self.phi} must be >= 1")


def _refit(model, X, y, keep):
    if keep.size == 0:
        raise ValidationError("no training rows left after removal")
    refit = clone(model)
    refit.set_params(n_classes=model.n_classes_)
    if isinstance(model, KnnBox) and model.k > keep.size:
        # The k-window shrinks when fewer rows remain; the vote covers them all.
        refit.set_params(k=int(keep.size))
    return refit.fit(X[keep], y[keep])


def find_subset_greedy(
    model: WrapperBox,
    X,
    y,
    x,
    config: AttributionConfig | None = None,
    test_row: int = -1,
) -> SubsetResult:
    """Chunked greedy removal with refinement (any wrapper box).

    ``model`` must be fitted on exactly (X, y); candidate rows come from its
    own support universe for ``x`` and are filtered to the predicted label.
    Every removal refits a clone on the surviving rows.
    """
    config = config or AttributionConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    start = time.perf_counter()
    y_t = model.predict_one(x)
    ranked = model.rank_candidates(x)
    candidates = ranked[y[ranked] == y_t]
    all_rows = np.arange(X.shape[0], dtype=np.int64)

    state = {"retrains": 0, "diagnostic": None}

    def find_subset(cand: np.ndarray, bins: int) -> np.ndarray:
        if cand.size == 0:
            return cand
        b = ceil(cand.size / bins)
        prev_end = 0
        for i in range(1, bins + 1):
            end = min(i * b, cand.size)
            if end == prev_end:
                continue
            prev_end = end
            prefix = cand[:end]
            keep = np.setdiff1d(all_rows, prefix, assume_unique=True)
            try:
                refit = _refit(model, X, y, keep)
                state["retrains"] += 1
                if refit.predict_one(x) != y_t:
                    return prefix
            except WrapboxError as exc:
                state["diagnostic"] = f"refit failed after removing {end} rows: {exc}"
        return np.empty(0, dtype=np.int64)

    subset = find_subset(candidates, config.bins)
    sizes = [int(subset.size)]
    previous_size = 0
    while subset.size > 0 and subset.size != previous_size:
        previous_size = subset.size
        if subset.size < config.phi:
            subset = find_subset(subset, subset.size)
        else:
            subset = find_subset(subset, config.bins)
        sizes.append(int(subset.size))

    found = subset.size > 0
    return SubsetResult(
        test_row=test_row,
        original_prediction=int(y_t),
        subset=subset,
        found=found,
        retrain_count=state["retrains"],
        wall_time=time.perf_counter() - start,
        diagnostic=None if found else state["diagnostic"],
        refinement_sizes=sizes,
    )


def find_subset_knn(model: KnnBox, x, test_row: int = -1) -> SubsetResult:
    """Retrain-free selector for unweighted kNN.

    Drops the nearest remaining neighbor of the predicted label and
    re-reads the majority inside the current k-window until it flips.
    """
    start = time.perf_counter()
    ranked = model.rank_candidates(x)
    labels = model.y_[ranked]
    k = model.k
    y_t = majority_label(labels[:k], model.n_classes_)
    matching = np.flatnonzero(labels == y_t)

    alive = np.ones(ranked.size, dtype=bool)
    for i in range(matching.size):
        alive[matching[i]] = False
        window = np.flatnonzero(alive)[:k]
        if window.size == 0:
            break
        if majority_label(labels[window], model.n_classes_) != y_t:
            return SubsetResult(
                test_row=test_row,
                original_prediction=int(y_t),
                subset=ranked[matching[: i + 1]],
                found=True,
                retrain_count=0,
                wall_time=time.perf_counter() - start,
            )
    return SubsetResult(
        test_row=test_row,
        original_prediction=int(y_t),
        subset=np.empty(0, dtype=np.int64),
        found=False,
        retrain_count=0,
        wall_time=time.perf_counter() - start,
        diagnostic="no removal within the candidate set changes the vote",
    )


def verify_flip(model: WrapperBox, X, y, subset, x, y_t) -> bool:
    """Refit on train-minus-subset with identical hyperparameters; did it flip?"""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    subset = np.asarray(subset, dtype=np.int64)
    keep = np.setdiff1d(np.arange(X.shape[0], dtype=np.int64), subset, assume_unique=True)
    try:
        refit = _refit(model, X, y, keep)
    except WrapboxError as exc:
        log.warning("verification refit failed: %s", exc)
        return False
    return bool(refit.predict_one(x) != y_t)


def attribution_metrics(results: list[SubsetResult]) -> dict:
    """Coverage %, correctness %, and median size over verified subsets."""
    if not results:
        raise ValidationError("no attribution results to summarize")
    n = len(results)
    found = sum(1 for r in results if r.found)
    verified = sum(1 for r in results if r.verified)
    sizes = sorted(r.size for r in results if r.verified)
    median = float(np.median(sizes)) if sizes else None
    return {
        "n": n,
        "coverage": 100.0 * found / n,
        "correctness": 100.0 * verified / n,
        "median_size": median,
    }
