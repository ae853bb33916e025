from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aptattrib.attribution import (
    CountMismatch,
    AttributionTable,
    VoteMatrix,
    aggregate_votes,
    attribute,
    consensus,
    format_pct,
    table_from_votes,
)
from aptattrib.classifiers import ClassifierKind, Hyperparams
from aptattrib.dataset import TrainingSet, UnknownAttack
from aptattrib.errors import DataError
from aptattrib.intel_model import ActorName, IndicatorRow

A, B, C = (ActorName.of(x) for x in "ABC")
KINDS = tuple(ClassifierKind)


def test_format_pct_half_even_on_exact_value():
    assert format_pct(Fraction(100 * 17, 49)) == "34.693878"
    assert format_pct(Fraction(100 * 45, 49)) == "91.836735"
    assert format_pct(0.0) == "0.000000"
    assert format_pct(Fraction(1, 8_000_000)) == "0.000000"  # 0.000000125 -> down
    assert format_pct(Fraction(3, 2_000_000)) == "0.000002"  # 0.0000015 -> even
    assert format_pct(Fraction(5, 2_000_000)) == "0.000002"  # 0.0000025 -> even


def test_aggregate_votes_examples():
    col = aggregate_votes({"Sandworm": 46, "DragonFly": 2, "APT28": 1}, 49)
    assert [format_pct(col[ActorName.of(n)]) for n in ("Sandworm", "DragonFly", "APT28")] == [
        "93.877551", "4.081633", "2.040816",
    ]
    assert aggregate_votes({"A": 1}, 1) == {A: 100.0}
    with pytest.raises(CountMismatch):
        aggregate_votes({"A": 1, "B": 1}, 3)
    with pytest.raises(CountMismatch):
        aggregate_votes({"A": 0}, 0)


def test_vote_matrix_rejects_bad_column():
    with pytest.raises(CountMismatch):
        VoteMatrix((A, B), {ClassifierKind.KNN: {A: 1, B: 0}}, 2)


def _votes(cols: dict) -> VoteMatrix:
    n = sum(next(iter(cols.values())).values())
    return VoteMatrix((A, B, C), cols, n)


def test_two_row_attack_column():
    t = table_from_votes(_votes({ClassifierKind.KNN: {A: 2, B: 0, C: 0}}))
    assert t.column(ClassifierKind.KNN) == {A: 100.0, B: 0.0, C: 0.0}


def test_table_invariants_enforced():
    with pytest.raises(DataError):
        AttributionTable((B, A), (ClassifierKind.KNN,), np.array([[50.0], [50.0]]))
    with pytest.raises(DataError):
        AttributionTable((A, B), (ClassifierKind.KNN,), np.array([[150.0], [-50.0]]))
    with pytest.raises(DataError):
        AttributionTable((A, B), (ClassifierKind.KNN,), np.zeros((3, 1)))


vote_columns = st.integers(1, 60).flatmap(
    lambda n: st.lists(
        st.lists(st.integers(0, n), min_size=2, max_size=2).map(sorted).map(lambda c: (c[0], c[1] - c[0], n - c[1])),
        min_size=1,
        max_size=8,
    ).map(lambda cols: (n, cols))
)


@settings(max_examples=300)
@given(vote_columns)
def test_column_sum_and_rationality(case):
    n, cols = case
    votes = VoteMatrix((A, B, C), {KINDS[j]: dict(zip((A, B, C), c)) for j, c in enumerate(cols)}, n)
    table = table_from_votes(votes)
    for j in range(len(cols)):
        assert abs(table.cells[:, j].sum() - 100.0) <= 1e-6
    k = table.cells * n / 100.0
    assert np.all(np.abs(k - np.round(k)) <= 1e-9)
    assert np.all((table.cells >= 0) & (table.cells <= 100))


@given(st.integers(1, 200), st.integers(0, 200))
def test_monotonicity_of_adding_a_vote(n_total, a_votes):
    a = min(a_votes, n_total)
    others = n_total - a
    old = Fraction(100 * a, n_total)
    new = Fraction(100 * (a + 1), n_total + 1)
    assert new >= old * Fraction(n_total, n_total + 1)
    if others > 0:
        assert new > old


@given(st.lists(st.integers(0, 30), min_size=3, max_size=3).filter(lambda c: sum(c) > 0), st.integers(1, 9))
def test_consensus_winner_invariant_under_scaling(counts, factor):
    cols = {ClassifierKind.KNN: dict(zip((A, B, C), counts))}
    scaled = {ClassifierKind.KNN: {a: c * factor for a, c in cols[ClassifierKind.KNN].items()}}
    w1 = consensus(table_from_votes(_votes(cols))).winners
    w2 = consensus(table_from_votes(_votes(scaled))).winners
    assert w1 == w2


def test_consensus_examples():
    same = {k: {A: 1, B: 3, C: 0} for k in KINDS}
    s = consensus(table_from_votes(_votes(same)))
    assert s.plurality == B and s.dissenters == ()
    split = {k: ({A: 3, B: 1, C: 0} if i % 2 else {A: 1, B: 3, C: 0}) for i, k in enumerate(KINDS)}
    s = consensus(table_from_votes(_votes(split)))
    assert s.plurality == A
    assert {k for k, _ in s.dissenters} == {k for i, k in enumerate(KINDS) if i % 2 == 0}
    tie_col = {ClassifierKind.KNN: {A: 0, B: 2, C: 2}}
    assert consensus(table_from_votes(_votes(tie_col))).winners[ClassifierKind.KNN] == B


def test_golden_matrix_consensus(table1):
    s = consensus(table1)
    assert s.plurality.display == "Sandworm"
    assert {(k.value, a.display) for k, a in s.dissenters} == {
        ("KNN", "EmberBear"), ("DecisionTree", "EmberBear"), ("GaussianNB", "EmberBear"),
    }
    assert s.winners[ClassifierKind.GAUSSIAN_NB].display == "EmberBear"


def test_golden_matrix_cells_are_multiples_of_one_49th(table1):
    k = table1.cells * 49 / 100
    assert np.all(np.abs(k - np.round(k)) <= 1e-6)


def _mini_sets():
    train = TrainingSet.from_rows(
        [IndicatorRow.make("tool", v, "A") for v in ("alpha.exe", "alpha2.exe", "alphaloader")]
        + [IndicatorRow.make("domain", v, "B") for v in ("beta.example", "beta2.example", "beta.cdn.example")]
    )
    attack = UnknownAttack((IndicatorRow.make("tool", "alpha.exe"), IndicatorRow.make("domain", "beta.example")), "mini")
    return train, attack


def test_attribute_small_end_to_end_and_threads_match():
    train, attack = _mini_sets()
    hp = Hyperparams(knn_k=1, forest_trees=5, adaboost_rounds=5, mlp_epochs=20)
    votes, table = attribute(train, attack, hp, seed=1)
    votes2, table2 = attribute(train, attack, hp, seed=1, jobs=4)
    assert votes == votes2 and table == table2
    assert votes.total_rows == 2
    assert table.classifiers == KINDS
    assert table.column(ClassifierKind.KNN) == {A: 50.0, B: 50.0}
    assert votes.predictions[ClassifierKind.KNN] == (A, B)
