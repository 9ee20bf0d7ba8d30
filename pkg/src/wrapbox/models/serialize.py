"""Fitted-model JSON documents: type tag, parameters, fitted structures."""

from __future__ import annotations

from ..errors import ValidationError
from .knn import KnnBox
from .lmeans import LMeansBox
from .logreg import LogisticBox
from .tree import TreeBox

MODEL_FORMAT = "wrapbox-model/v1"

MODEL_KINDS = {
    "knn": KnnBox,
    "tree": TreeBox,
    "lmeans": LMeansBox,
    "logreg": LogisticBox,
}


def kind_of(box) -> str:
    for kind, cls in MODEL_KINDS.items():
        if type(box) is cls:
            return kind
    raise ValidationError(f"unknown model class {type(box).__name__}")


def serialize_model(box, split=None) -> dict:
    doc = {
        "format": MODEL_FORMAT,
        "kind": kind_of(box),
        "params": box.get_params(),
        "n_classes": int(box.n_classes_),
        "state": box.get_state(),
    }
    if split is not None:
        doc["split"] = split.to_dict()
    return doc


def restore_model(doc, X=None, y=None):
    """Rebuild a fitted box from its document and the training rows it cites."""
    if doc.get("format") != MODEL_FORMAT:
        raise ValidationError(f"not a model document: format={doc.get('format')!r}")
    kind = doc["kind"]
    if kind not in MODEL_KINDS:
        raise ValidationError(f"unknown model kind {kind!r}")
    params = dict(doc["params"])
    params["n_classes"] = int(doc["n_classes"])
    box = MODEL_KINDS[kind](**params)
    box.set_state(doc["state"], X, y)
    return box
