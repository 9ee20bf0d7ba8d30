"""Wrapper boxes: interpretable classifiers fitted on neural embeddings.

Classic models (kNN, decision tree, L-means) predict from extracted
representations, every prediction cites the training rows that produced
it, and audits can find minimal training subsets whose removal flips a
decision.
"""

from .attribute import (
    AttributionConfig,
    SubsetResult,
    attribution_metrics,
    find_subset_greedy,
    find_subset_knn,
    verify_flip,
)
from .dataspace import (
    EmbeddingDataset,
    SplitSpec,
    load_dataset,
    stratified_split,
    write_dataset,
    write_dataset_csv,
)
from .errors import (
    DatasetFormatError,
    PolicyUnavailableError,
    ValidationError,
    WrapboxError,
)
from .evaluate import (
    MetricReport,
    SignificanceResult,
    classification_metrics,
    pca2_project,
    two_proportion_z,
)
from .explain import Explanation, Policy, explain
from .models import (
    KdTree,
    KnnBox,
    LMeansBox,
    LogisticBox,
    SupportSet,
    TreeBox,
    restore_model,
    serialize_model,
)
from .synth import make_blobs


def logit_transform(model: LogisticBox, ds: EmbeddingDataset) -> EmbeddingDataset:
    """Replace features with the fitted regressor's pre-softmax logits."""
    return ds.with_features(model.transform(ds.features))


__all__ = [
    "AttributionConfig",
    "SubsetResult",
    "attribution_metrics",
    "find_subset_greedy",
    "find_subset_knn",
    "verify_flip",
    "EmbeddingDataset",
    "SplitSpec",
    "load_dataset",
    "stratified_split",
    "write_dataset",
    "write_dataset_csv",
    "DatasetFormatError",
    "PolicyUnavailableError",
    "ValidationError",
    "WrapboxError",
    "MetricReport",
    "SignificanceResult",
    "classification_metrics",
    "pca2_project",
    "two_proportion_z",
    "Explanation",
    "Policy",
    "explain",
    "KdTree",
    "KnnBox",
    "LMeansBox",
    "LogisticBox",
    "SupportSet",
    "TreeBox",
    "restore_model",
    "serialize_model",
    "make_blobs",
    "logit_transform",
]

__version__ = "0.1.0"
