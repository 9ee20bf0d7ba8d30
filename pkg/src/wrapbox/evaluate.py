"""Classification metrics, pooled two-proportion z-test, 2-D PCA projection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .validation import check_labels

ALPHA = 0.05


@dataclass
class MetricReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class: list[dict]
    n: int
    confusion: np.ndarray

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class": self.per_class,
            "n": self.n,
            "confusion": self.confusion.tolist(),
        }


@dataclass
class SignificanceResult:
    z: float
    p: float
    alpha: float = ALPHA

    @property
    def significant(self) -> bool:
        return self.p < self.alpha

    def to_dict(self) -> dict:
        return {
            "z": self.z,
            "p": self.p,
            "alpha": self.alpha,
            "significant": self.significant,
        }


def classification_metrics(y_true, y_pred, n_classes) -> MetricReport:
    """Accuracy plus macro precision/recall/F1, all as percentages.

    Macro averages run over all n_classes; a class absent from both truth
    and prediction contributes zeros.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise ValidationError("empty evaluation input")
    if y_true.shape != y_pred.shape:
        raise ValidationError(
            f"prediction length {y_pred.size} != truth length {y_true.size}"
        )
    y_true, n_classes = check_labels(y_true, y_true.size, n_classes, name="y_true")
    y_pred, _ = check_labels(y_pred, y_pred.size, n_classes, name="y_pred")

    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)

    n = int(y_true.size)
    accuracy = 100.0 * float(np.trace(confusion)) / n
    per_class = []
    for c in range(n_classes):
        tp = float(confusion[c, c])
        col = float(confusion[:, c].sum())
        row = float(confusion[c, :].sum())
        precision = 100.0 * tp / col if col > 0 else 0.0
        recall = 100.0 * tp / row if row > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class.append(
            {"class": c, "precision": precision, "recall": recall, "f1": f1, "support": int(row)}
        )
    return MetricReport(
        accuracy=accuracy,
        macro_precision=float(np.mean([pc["precision"] for pc in per_class])),
        macro_recall=float(np.mean([pc["recall"] for pc in per_class])),
        macro_f1=float(np.mean([pc["f1"] for pc in per_class])),
        per_class=per_class,
        n=n,
        confusion=confusion,
    )


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def two_proportion_z(m1: float, n1: int, m2: float, n2: int) -> SignificanceResult:
    """Pooled two-proportion z-test with a two-sided p-value.

    Rates are proportions in [0, 1]; counts are the sample sizes behind
    them. Degenerate pooled rates (0 or 1) imply equal rates and yield
    z=0, p=1.
    """
    for name, rate in (("m1", m1), ("m2", m2)):
        if not 0.0 <= rate <= 1.0:
            raise ValidationError(f"{name}={rate} outside [0, 1]")
    for name, count in (("n1", n1), ("n2", n2)):
        if count < 1:
            raise ValidationError(f"{name}={count} must be >= 1")
    pooled = (n1 * m1 + n2 * m2) / (n1 + n2)
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    if se == 0.0:
        return SignificanceResult(z=0.0, p=1.0)
    z = (m1 - m2) / se
    p = 2.0 * (1.0 - normal_cdf(abs(z)))
    return SignificanceResult(z=z, p=p)


def pca2_project(features) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-2 principal components by power iteration with deflation.

    Returns (coordinates n x 2, explained-variance fractions, components
    2 x d). Components are orthonormal; fractions are descending in [0, 1].
    Zero-variance input projects to zeros with zero fractions.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("pca2_project needs a matrix with at least 2 rows")
    n, d = X.shape
    Xc = X - X.mean(axis=0)
    denom = n - 1
    total_var = float((Xc * Xc).sum()) / denom

    def cov_apply(v):
        return Xc.T @ (Xc @ v) / denom

    def e_vec(j):
        e = np.zeros(d)
        e[j] = 1.0
        return e

    variances = (Xc * Xc).sum(axis=0) / denom
    if total_var == 0.0:
        components = np.vstack([e_vec(0), e_vec(min(1, d - 1))])
        return np.zeros((n, 2)), np.zeros(2), components

    def deflate(v, ortho):
        # Projected twice: one Gram-Schmidt pass loses orthogonality when v
        # is nearly parallel to a previous component.
        for _ in range(2):
            for u in ortho:
                v -= (u @ v) * u
        return v

    def power_iterate(start, ortho):
        v = deflate(start.copy(), ortho)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            return None, 0.0
        v /= norm
        lam = 0.0
        for _ in range(1000):
            w = deflate(cov_apply(v), ortho)
            norm = np.linalg.norm(w)
            if norm == 0.0:
                break  # v spans a null direction of the deflated operator
            w /= norm
            lam_new = float(w @ cov_apply(w))
            v = w
            if abs(lam_new - lam) <= 1e-13 * max(abs(lam_new), 1.0):
                lam = lam_new
                break
            lam = lam_new
        v = deflate(v, ortho)
        v /= np.linalg.norm(v)
        return v, float(v @ cov_apply(v))

    order = np.argsort(-variances, kind="stable")
    v1, lam1 = power_iterate(e_vec(int(order[0])), [])
    v2, lam2 = None, 0.0
    for j in list(order) + [0]:
        v2, lam2 = power_iterate(e_vec(int(j)), [v1])
        if v2 is not None:
            break
    if v2 is None:
        # Rank-1 data: any unit vector orthogonal to v1 completes the basis.
        basis = np.eye(d)[np.argmin(np.abs(v1))]
        v2 = basis - (v1 @ basis) * v1
        v2 /= np.linalg.norm(v2)
        lam2 = float(v2 @ cov_apply(v2))

    if lam2 > lam1:
        v1, v2, lam1, lam2 = v2, v1, lam2, lam1
    components = np.vstack([v1, v2])
    fractions = np.clip(np.array([lam1, lam2]) / total_var, 0.0, 1.0)
    coords = Xc @ components.T
    return coords, fractions, components
