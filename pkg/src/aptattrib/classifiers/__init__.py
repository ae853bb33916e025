"""From-scratch classifiers behind a single fit / predict contract.

Parameter layout of a fitted model (``FittedModel.params``), per kind:

* KNN: ``X`` training matrix, ``y`` label indices, ``k``, ``n_classes``.
* DecisionTree: ``tree`` with parallel node arrays ``feature`` (-1 at
  leaves), ``threshold`` (go left when ``x <= threshold``), ``left``,
  ``right`` and ``value`` (class distribution per node).
* RandomForest: ``trees``, a list of trees as above.
* AdaBoost: ``stumps`` (trees), ``alphas``, ``errors``, ``weight_trace``
  (sample weights before each round), ``n_classes``.
* LinearSVM: ``weights`` of shape (classes, d + 1); the last column is the bias.
* RbfSVM: ``support`` rows, ``coef`` (alpha * y per class) and ``gamma``.
* GaussianNB: ``means``, ``variances`` (smoothed), ``log_prior``, ``epsilon``.
* NeuralNet: ``W0``, ``b0``, ``W1``, ``b1`` ... and the training ``losses``.
"""

from __future__ import annotations

import json

import numpy as np

from ..intel_model import ActorName
from .base import (
    ClassifierKind,
    DegenerateData,
    DimensionMismatch,
    FittedModel,
    Hyperparams,
    NonFinite,
    counter_rng,
    validate_training,
)
from .mlp import loss_and_grads, mlp_gradient_check
from .registry import FIT

__all__ = [
    "ClassifierKind",
    "DegenerateData",
    "DimensionMismatch",
    "FittedModel",
    "Hyperparams",
    "NonFinite",
    "counter_rng",
    "dump_model",
    "fit",
    "load_model",
    "loss_and_grads",
    "mlp_gradient_check",
    "predict",
    "predict_proba",
]


def fit(kind: ClassifierKind | str, X, y, hp: Hyperparams | None = None, seed: int = 0) -> FittedModel:
    kind = kind if isinstance(kind, ClassifierKind) else ClassifierKind.parse(kind)
    hp = hp or Hyperparams()
    X, y_idx, actors = validate_training(X, y)
    params = FIT[kind](X, y_idx, len(actors), hp, seed)
    return FittedModel(kind, actors, int(seed), X.shape[1], params)


def predict(model: FittedModel, x) -> ActorName:
    return model.predict(x)


def predict_proba(model: FittedModel, x) -> dict[ActorName, float]:
    return model.predict_proba(x)


def _to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        return {"dtype": str(obj.dtype), "shape": list(obj.shape), "data": obj.reshape(-1).tolist()}
    if isinstance(obj, dict):
        return {"map": {k: _to_jsonable(v) for k, v in obj.items()}}
    if isinstance(obj, list):
        return {"list": [_to_jsonable(v) for v in obj]}
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    return obj


def _from_jsonable(obj):
    if isinstance(obj, dict):
        if "dtype" in obj:
            return np.array(obj["data"], dtype=obj["dtype"]).reshape(obj["shape"])
        if "map" in obj:
            return {k: _from_jsonable(v) for k, v in obj["map"].items()}
        if "list" in obj:
            return [_from_jsonable(v) for v in obj["list"]]
    return obj


def dump_model(model: FittedModel) -> str:
    """JSON text; floats are written with full round-trip precision."""
    doc = {
        "kind": model.kind.value,
        "actors": [a.display for a in model.actors],
        "seed": model.seed,
        "n_features": model.n_features,
        "params": _to_jsonable(model.params),
    }
    return json.dumps(doc, sort_keys=True)


def load_model(text: str) -> FittedModel:
    doc = json.loads(text)
    return FittedModel(
        ClassifierKind.parse(doc["kind"]),
        tuple(ActorName.of(a) for a in doc["actors"]),
        int(doc["seed"]),
        int(doc["n_features"]),
        _from_jsonable(doc["params"]),
    )
