"""JSON encoding of fitted tree models.

A document carries the model kind, its constructor parameters, the class
labels and the trees (see :meth:`Tree.to_dict`).  Floats are written with
``repr`` precision, so a load reproduces every threshold and leaf value
exactly and predictions round-trip bit for bit.
"""
from __future__ import annotations

import json

import numpy as np

from ._tree import Tree
from .models import (DecisionTreeClassifier, GradientBoostingClassifier,
                     RandomForestClassifier)

FORMAT_VERSION = 1

_KINDS = {
    "decision_tree": DecisionTreeClassifier,
    "random_forest": RandomForestClassifier,
    "gradient_boosting": GradientBoostingClassifier,
}


def _kind_of(model) -> str:
    for kind, cls in _KINDS.items():
        if type(model) is cls:
            return kind
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _py(v):
    return v.item() if isinstance(v, np.generic) else v


def model_to_dict(model) -> dict:
    kind = _kind_of(model)
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "params": {k: _py(v) for k, v in model.get_params().items()},
        "classes": [_py(c) for c in model.classes_],
        "n_features": int(model.n_features_in_),
    }
    if kind == "decision_tree":
        doc["tree"] = model.tree_.to_dict()
    elif kind == "random_forest":
        doc["tree_seeds"] = list(model.tree_seeds_)
        doc["trees"] = [t.to_dict() for t in model.trees_]
    else:
        doc["learning_rate"] = model.learning_rate
        doc["init_scores"] = model.init_scores_.tolist()
        doc["train_loss"] = model.train_loss_.tolist()
        doc["stages"] = [[t.to_dict() for t in stage] for stage in model.estimators_]
    return doc


def model_from_dict(doc: dict):
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format {doc.get('format_version')!r}")
    kind = doc["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    model = _KINDS[kind](**doc["params"])
    model.classes_ = np.asarray(doc["classes"])
    model.n_classes_ = model.classes_.size
    model.n_features_in_ = doc["n_features"]
    if kind == "decision_tree":
        model.tree_ = Tree.from_dict(doc["tree"])
    elif kind == "random_forest":
        model.tree_seeds_ = list(doc["tree_seeds"])
        model.trees_ = [Tree.from_dict(t) for t in doc["trees"]]
    else:
        model.init_scores_ = np.asarray(doc["init_scores"], dtype=float)
        model.train_loss_ = np.asarray(doc["train_loss"], dtype=float)
        model.estimators_ = [[Tree.from_dict(t) for t in stage]
                             for stage in doc["stages"]]
    return model


def dumps(model) -> str:
    return json.dumps(model_to_dict(model), separators=(",", ":"))


def loads(text: str):
    return model_from_dict(json.loads(text))


def save_model(model, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(model))


def load_model(path):
    with open(path) as fh:
        return loads(fh.read())
