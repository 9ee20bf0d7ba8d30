"""Turn support sets into explanations under the three fidelity policies.

Case I shows every consulted row (faithful, possibly overwhelming).
Case II shows m of them, nudged so their majority matches the prediction.
Case III re-runs the model with a smaller inference set (kNN only) and
shows all of it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import PolicyUnavailableError, ValidationError
from .models import KnnBox, WrapperBox
from .validation import majority_label


class Policy(str, enum.Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"
    CASE_III = "CaseIII"


@dataclass
class Explanation:
    prediction: int
    n_used: int
    shown: np.ndarray
    relevance: np.ndarray
    faithful: bool
    policy: Policy

    def __post_init__(self):
        self.shown = np.asarray(self.shown, dtype=np.int64)
        self.relevance = np.asarray(self.relevance, dtype=np.float64)


def _downsample(indices, relevance, labels, prediction, m, n_classes):
    """Pick m rows whose majority label matches the prediction.

    Start from the m top-ranked rows; while the mode disagrees, swap the
    worst-ranked row of a non-predicted label for the next unused row of
    the predicted label. Deviates from pure proximity only as far as label
    consistency demands.
    """
    chosen = list(range(m))
    used = m
    while majority_label(labels[chosen], n_classes) != prediction:
        drop = max(
            (pos for pos in chosen if labels[pos] != prediction),
            default=None,
        )
        add = next(
            (r for r in range(used, len(indices)) if labels[r] == prediction),
            None,
        )
        if drop is None or add is None:
            raise ValidationError(
                "cannot build a label-consistent subset of the support set"
            )
        chosen.remove(drop)
        chosen.append(add)
        used = add + 1
        chosen.sort()
    chosen = np.asarray(chosen, dtype=np.int64)
    return indices[chosen], relevance[chosen]


def explain(model: WrapperBox, x, policy: Policy, m: int | None = None) -> Explanation:
    policy = Policy(policy)

    if policy is Policy.CASE_III:
        if not isinstance(model, KnnBox):
            raise PolicyUnavailableError(
                f"policy unavailable for model class {type(model).__name__}: "
                "its inference-set size is structural"
            )
        if m is None or m < 1:
            raise ValidationError("CaseIII requires m >= 1")
        sup = model.support(x, k=m)
        return Explanation(
            prediction=sup.prediction,
            n_used=m,
            shown=sup.indices,
            relevance=sup.relevance,
            faithful=True,
            policy=policy,
        )

    sup = model.support(x)
    n_used = sup.indices.size
    if policy is Policy.CASE_I:
        return Explanation(
            prediction=sup.prediction,
            n_used=n_used,
            shown=sup.indices,
            relevance=sup.relevance,
            faithful=True,
            policy=policy,
        )

    # Case II
    if m is None or m < 1:
        raise ValidationError("CaseII requires m >= 1")
    if m > n_used:
        raise ValidationError(f"m={m} exceeds the {n_used} rows used for inference")
    labels = model.y_[sup.indices]
    shown, relevance = _downsample(
        sup.indices, sup.relevance, labels, sup.prediction, m, model.n_classes_
    )
    return Explanation(
        prediction=sup.prediction,
        n_used=n_used,
        shown=shown,
        relevance=relevance,
        faithful=bool(m == n_used),
        policy=policy,
    )
