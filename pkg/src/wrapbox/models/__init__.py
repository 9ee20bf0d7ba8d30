from .base import SupportSet, WrapperBox
from .knn import KdTree, KnnBox
from .lmeans import LMeansBox, kmeans_plusplus
from .logreg import LogisticBox, loss_and_gradient, softmax
from .serialize import MODEL_KINDS, kind_of, restore_model, serialize_model
from .tree import TreeBox, best_split

__all__ = [
    "SupportSet",
    "WrapperBox",
    "KdTree",
    "KnnBox",
    "TreeBox",
    "LMeansBox",
    "LogisticBox",
    "kmeans_plusplus",
    "loss_and_gradient",
    "softmax",
    "best_split",
    "MODEL_KINDS",
    "kind_of",
    "serialize_model",
    "restore_model",
]
