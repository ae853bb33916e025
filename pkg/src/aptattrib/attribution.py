"""Per-row hard voting of the eight classifiers over an unknown attack."""

from __future__ import annotations

import logging
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction

import numpy as np

from .classifiers import ClassifierKind, FittedModel, Hyperparams, fit
from .dataset import DEFAULT_HASH_DIM, TrainingSet, UnknownAttack, build_encoder
from .errors import DataError
from .intel_model import ActorName

log = logging.getLogger(__name__)

CLASSIFIERS = tuple(ClassifierKind)
_SIX = Decimal("0.000001")


class CountMismatch(DataError):
    pass


def format_pct(value: float | Fraction) -> str:
    """Six decimals, round-half-even on the exact value."""
    if isinstance(value, Fraction):
        exact = Decimal(value.numerator) / Decimal(value.denominator)
    else:
        exact = Decimal(value)
    out = exact.quantize(_SIX, rounding=ROUND_HALF_EVEN)
    return "0.000000" if out.is_zero() else f"{out:f}"


def aggregate_votes(votes: dict, total: int) -> dict[ActorName, float]:
    """Vote counts to percentages of ``total``."""
    if total <= 0:
        raise CountMismatch(f"total must be positive, got {total}")
    if any(c < 0 for c in votes.values()):
        raise CountMismatch("vote counts must be non-negative")
    if sum(votes.values()) != total:
        raise CountMismatch(f"vote counts sum to {sum(votes.values())}, expected {total}")
    return {ActorName.of(a): 100.0 * c / total for a, c in votes.items()}


@dataclass(frozen=True)
class VoteMatrix:
    actors: tuple[ActorName, ...]
    counts: dict[ClassifierKind, dict[ActorName, int]]
    total_rows: int
    predictions: dict[ClassifierKind, tuple[ActorName, ...]] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for kind, column in self.counts.items():
            if sum(column.values()) != self.total_rows:
                raise CountMismatch(f"{kind.value}: votes sum to {sum(column.values())}, expected {self.total_rows}")


@dataclass(frozen=True, eq=False)
class AttributionTable:
    """Actor x classifier percentage matrix.

    ``n_rows`` is the vote denominator when known; it lets rendering round
    the exact rational rather than its float approximation. Equality is
    judged at the serialized six-decimal precision.
    """

    actors: tuple[ActorName, ...]
    classifiers: tuple[ClassifierKind, ...]
    cells: np.ndarray
    n_rows: int | None = None

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.float64)
        if cells.shape != (len(self.actors), len(self.classifiers)):
            raise DataError(f"cell matrix shape {cells.shape} does not match {len(self.actors)} actors x {len(self.classifiers)} classifiers")
        if not np.isfinite(cells).all() or (cells < 0).any() or (cells > 100).any():
            raise DataError("table cells must be percentages in [0, 100]")
        if list(self.actors) != sorted(self.actors):
            raise DataError("table actors must be in canonical order")
        object.__setattr__(self, "cells", cells)

    def cell(self, actor, kind) -> float:
        i = self.actors.index(ActorName.of(actor))
        j = self.classifiers.index(ClassifierKind.parse(kind))
        return float(self.cells[i, j])

    def column(self, kind: ClassifierKind) -> dict[ActorName, float]:
        j = self.classifiers.index(kind)
        return {a: float(self.cells[i, j]) for i, a in enumerate(self.actors)}

    def column_sums(self) -> dict[ClassifierKind, float]:
        return {k: float(self.cells[:, j].sum()) for j, k in enumerate(self.classifiers)}

    def formatted(self, i: int, j: int) -> str:
        v = float(self.cells[i, j])
        if self.n_rows:
            k = round(v * self.n_rows / 100.0)
            if abs(100.0 * k / self.n_rows - v) <= 1e-9:
                return format_pct(Fraction(100 * k, self.n_rows))
        return format_pct(v)

    def formatted_matrix(self) -> list[list[str]]:
        return [[self.formatted(i, j) for j in range(len(self.classifiers))] for i in range(len(self.actors))]

    def __eq__(self, other) -> bool:
        if not isinstance(other, AttributionTable):
            return NotImplemented
        return (
            self.actors == other.actors
            and self.classifiers == other.classifiers
            and self.formatted_matrix() == other.formatted_matrix()
        )

    __hash__ = None


def table_from_votes(votes: VoteMatrix) -> AttributionTable:
    kinds = tuple(k for k in CLASSIFIERS if k in votes.counts)
    cells = np.zeros((len(votes.actors), len(kinds)))
    for j, kind in enumerate(kinds):
        pct = aggregate_votes(votes.counts[kind], votes.total_rows)
        for i, actor in enumerate(votes.actors):
            cells[i, j] = pct.get(actor, 0.0)
    return AttributionTable(votes.actors, kinds, cells, votes.total_rows)


@dataclass(frozen=True)
class ConsensusSummary:
    winners: dict[ClassifierKind, ActorName]
    plurality: ActorName
    dissenters: tuple[tuple[ClassifierKind, ActorName], ...]

    def to_dict(self) -> dict:
        return {
            "winners": {k.value: a.display for k, a in self.winners.items()},
            "plurality": self.plurality.display,
            "dissenters": [[k.value, a.display] for k, a in self.dissenters],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> ConsensusSummary:
        return cls(
            {ClassifierKind.parse(k): ActorName.of(a) for k, a in doc["winners"].items()},
            ActorName.of(doc["plurality"]),
            tuple((ClassifierKind.parse(k), ActorName.of(a)) for k, a in doc["dissenters"]),
        )


def consensus(table: AttributionTable) -> ConsensusSummary:
    winners = {
        kind: table.actors[int(np.argmax(table.cells[:, j]))] for j, kind in enumerate(table.classifiers)
    }
    tally = Counter(winners.values())
    top = max(tally.values())
    plurality = min(a for a, c in tally.items() if c == top)
    dissenters = tuple((k, a) for k, a in winners.items() if a != plurality)
    return ConsensusSummary(winners, plurality, dissenters)


def _fit_and_vote(kind, X_train, labels, X_attack, hp, seed) -> tuple[ClassifierKind, FittedModel, list[ActorName], float]:
    t0 = time.perf_counter()
    model = fit(kind, X_train, labels, hp, seed)
    preds = model.predict_matrix(X_attack)
    return kind, model, preds, time.perf_counter() - t0


def attribute(
    train: TrainingSet,
    attack: UnknownAttack,
    hp: Hyperparams | None = None,
    seed: int = 0,
    *,
    hash_dim: int = DEFAULT_HASH_DIM,
    jobs: int = 1,
    kinds=CLASSIFIERS,
) -> tuple[VoteMatrix, AttributionTable]:
    """Fit every classifier on all training rows and tally one vote per attack row.

    With ``jobs > 1`` the fits run in a thread pool; results are identical
    to the sequential run.
    """
    hp = hp or Hyperparams()
    enc = build_encoder(train, hash_dim)
    X_train = enc.encode_rows(train.rows)
    X_attack = enc.encode_rows(attack.rows)
    labels = train.labels()
    jobs_args = [(k, X_train, labels, X_attack, hp, seed) for k in kinds]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda a: _fit_and_vote(*a), jobs_args))
    else:
        results = [_fit_and_vote(*a) for a in jobs_args]

    counts, predictions = {}, {}
    for kind, model, preds, secs in results:
        log.info("%s fitted and voted in %.2fs", kind.value, secs)
        column = {a: 0 for a in train.actors}
        for p in preds:
            column[p] += 1
        counts[kind] = column
        predictions[kind] = tuple(preds)
    votes = VoteMatrix(train.actors, counts, len(attack.rows), predictions)
    return votes, table_from_votes(votes)
