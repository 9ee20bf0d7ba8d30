"""Gaussian-blob benchmark datasets, a desk-scale stand-in for embeddings."""

from __future__ import annotations

import numpy as np

from .dataspace import EmbeddingDataset
from .errors import ValidationError


def make_blobs(
    n_per_class: int,
    n_dims: int,
    n_classes: int = 2,
    separation: float = 8.0,
    skew: float = 1.0,
    seed: int = 0,
) -> EmbeddingDataset:
    """Unit-variance Gaussian blobs, one per class, centers ``separation`` apart.

    Class c sits at ``separation`` along axis c, so n_classes must not
    exceed n_dims. ``skew`` multiplies class 0's row count: skew=3 on a
    binary task yields the 3:1 histogram of a skewed corpus.
    """
    if n_per_class < 1:
        raise ValidationError(f"n_per_class={n_per_class} must be >= 1")
    if n_classes < 1:
        raise ValidationError(f"n_classes={n_classes} must be >= 1")
    if n_classes > n_dims:
        raise ValidationError(
            f"n_classes={n_classes} exceeds n_dims={n_dims}: no axis left per class"
        )
    if skew <= 0:
        raise ValidationError(f"skew={skew} must be positive")

    rng = np.random.default_rng(seed)
    counts = [max(1, round(n_per_class * skew))] + [n_per_class] * (n_classes - 1)
    blocks, labels = [], []
    for c in range(n_classes):
        center = np.zeros(n_dims)
        center[c] = separation
        blocks.append(rng.standard_normal((counts[c], n_dims)) + center)
        labels.append(np.full(counts[c], c, dtype=np.uint32))
    features = np.vstack(blocks).astype(np.float32)
    labels = np.concatenate(labels)
    return EmbeddingDataset(
        features=features,
        labels=labels,
        row_ids=np.arange(features.shape[0], dtype=np.uint64),
        n_classes=n_classes,
    )
