from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from ..errors import DataError, UsageError
from ..intel_model import ActorName

_MASK64 = (1 << 64) - 1


class DimensionMismatch(DataError):
    pass


class DegenerateData(DataError):
    pass


class NonFinite(DataError):
    pass


class ClassifierKind(str, Enum):
    # canonical (table column) order
    KNN = "KNN"
    DECISION_TREE = "DecisionTree"
    RANDOM_FOREST = "RandomForest"
    ADABOOST = "AdaBoost"
    LINEAR_SVM = "LinearSVM"
    RBF_SVM = "RbfSVM"
    GAUSSIAN_NB = "GaussianNB"
    NEURAL_NET = "NeuralNet"

    @classmethod
    def parse(cls, text: str) -> ClassifierKind:
        key = "".join(text.split()).lower()
        for k in cls:
            if k.value.lower() == key:
                return k
        raise UsageError(f"unknown classifier kind {text!r}; choose from {', '.join(k.value for k in cls)}")


@dataclass(frozen=True)
class Hyperparams:
    knn_k: int = 5
    tree_min_split: int = 2
    forest_trees: int = 100
    forest_features: int | None = None  # None: ceil(sqrt(d))
    forest_bootstrap: bool = True
    adaboost_rounds: int = 50
    linsvm_c: float = 1.0
    linsvm_epochs: int = 1000
    rbfsvm_gamma: float | None = None  # None: 1/d
    rbfsvm_c: float = 1.0
    rbfsvm_passes: int = 200
    gnb_var_smoothing: float = 1e-9
    mlp_hidden: int = 100
    mlp_learning_rate: float = 0.01
    mlp_epochs: int = 200

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None or isinstance(v, bool):
                continue
            if v <= 0:
                raise UsageError(f"hyperparameter {f.name} must be positive, got {v!r}")
        if self.tree_min_split < 2:
            raise UsageError("tree_min_split must be >= 2")

    def with_overrides(self, pairs) -> Hyperparams:
        """Apply ``key=value`` strings, coercing to each field's type."""
        types = {f.name: f.type for f in dataclasses.fields(self)}
        changes = {}
        for pair in pairs:
            key, sep, raw = pair.partition("=")
            key = key.strip()
            if not sep or key not in types:
                raise UsageError(f"bad --hp entry {pair!r}; known keys: {', '.join(types)}")
            changes[key] = _coerce(types[key], raw.strip(), key)
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(type_name: str, raw: str, key: str):
    optional = "None" in type_name
    if optional and raw.lower() in ("none", "auto", ""):
        return None
    try:
        if type_name.startswith("bool"):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if type_name.startswith("int"):
            return int(raw)
        return float(raw)
    except ValueError:
        raise UsageError(f"cannot parse value {raw!r} for {key}") from None


def counter_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, stream); no global state involved."""
    return np.random.Generator(np.random.Philox(key=np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)))


@dataclass(frozen=True, eq=False)
class FittedModel:
    kind: ClassifierKind
    actors: tuple[ActorName, ...]
    seed: int
    n_features: int
    params: dict[str, Any] = field(repr=False)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected vectors of length {self.n_features}, got shape {X.shape}")
        return X

    def predict_proba_matrix(self, X) -> np.ndarray:
        from .registry import PROBA

        return PROBA[self.kind](self.params, self._check(X))

    def predict_indices(self, X) -> np.ndarray:
        # np.argmax takes the first maximum; actors are sorted, so ties go lexicographic
        return np.argmax(self.predict_proba_matrix(X), axis=1)

    def predict_matrix(self, X) -> list[ActorName]:
        return [self.actors[i] for i in self.predict_indices(X)]

    def predict(self, x) -> ActorName:
        return self.predict_matrix(x)[0]

    def predict_proba(self, x) -> dict[ActorName, float]:
        row = self.predict_proba_matrix(x)[0]
        return {a: float(p) for a, p in zip(self.actors, row)}


def softmax_rows(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def validate_training(X, y) -> tuple[np.ndarray, np.ndarray, tuple[ActorName, ...]]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be a 2-d matrix of equal-length vectors, got shape {X.shape}")
    labels = [ActorName.of(a) for a in y]
    if X.shape[0] != len(labels):
        raise DimensionMismatch(f"{X.shape[0]} vectors but {len(labels)} labels")
    if X.shape[0] < 2:
        raise DegenerateData("need at least 2 training vectors")
    if not np.isfinite(X).all():
        raise NonFinite("training matrix contains NaN or infinite values")
    actors = tuple(sorted(set(labels)))
    if len(actors) < 2:
        raise DegenerateData(f"need at least 2 distinct labels, got {len(actors)}")
    index = {a: i for i, a in enumerate(actors)}
    y_idx = np.array([index[a] for a in labels], dtype=np.intp)
    return np.ascontiguousarray(X), y_idx, actors
