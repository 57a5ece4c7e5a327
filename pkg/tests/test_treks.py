import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import CYCLIC_M
from lyaptrek import (
    BaseTrek,
    DiagonalNotMinusOneError,
    IncompatibleEdgeError,
    NodeOutOfRangeError,
    SelfLoopProfile,
    Trek,
    base_graph,
    enumerate_base_treks,
    enumerate_treks,
    from_matrices,
    partial_sum,
    rho,
    trek_table,
    trek_term,
    trek_weight,
)

# (trek, omega, l, n, term) for all base treks 1 -> 3 up to length 5
BASE_TREKS_1_3 = [
    ("1<-4-o4->3", "0.1", 2, 1, "0.02500000"),
    ("1<-2<-3-o3", "0.1", 2, 2, "0.01250000"),
    ("1<-4<-5<-3-o3", "0.2", 3, 3, "0.01250000"),
    ("1<-2<-1<-2<-3-o3", "-0.05", 4, 4, "-0.00156250"),
    ("1<-2<-1<-4-o4->3", "-0.05", 4, 3, "-0.00625000"),
    ("1<-2<-3<-4-o4->3", "0.025", 4, 3, "0.00312500"),
    ("1<-4<-5-o5->4->3", "0.1", 4, 2, "0.01875000"),
    ("1<-2<-3<-4<-5<-3-o3", "0.05", 5, 5, "0.00078125"),
    ("1<-2<-1<-4<-5<-3-o3", "-0.1", 5, 5, "-0.00156250"),
    ("1<-4<-5<-3<-4-o4->3", "0.05", 5, 4, "0.00390625"),
    ("1<-2<-3-o3->5->4->3", "0.05", 5, 2, "0.00781250"),
    ("1<-4-o4->3->5->4->3", "0.05", 5, 1, "0.00390625"),
]


@pytest.fixture
def G0(cyclic5):
    return base_graph(from_matrices(*cyclic5))


def test_table_rows_exact(cyclic5):
    rows = trek_table(*cyclic5, 1, 3, 5)
    assert len(rows) == 12
    got = {str(t): (w, l, n, term) for t, w, _, l, n, term in rows}
    for name, w, l, n, term in BASE_TREKS_1_3:
        assert got[name] == (float(w), l, n, float(term))


def test_table_factorization(cyclic5):
    rows = {str(r[0]): r[2] for r in trek_table(*cyclic5, 1, 3, 5)}
    assert rows["1<-2<-1<-4-o4->3"] == (0.5, -1.0, 0.2, 0.5)
    assert rows["1<-4<-5-o5->4->3"] == (0.2, 1.0, 1.0, 0.5)


def test_table_total_exact(cyclic5):
    assert partial_sum(*cyclic5, 1, 3, 5, exact=True) == 0.07890625


def test_canonical_order(G0):
    treks = enumerate_base_treks(G0, 1, 3, 5)
    keys = [(t.l, t.n) for t in treks]
    assert keys == sorted(keys)


@pytest.mark.parametrize("l_max,count,total", [(10, 74, 0.10992737), (20, 515, 0.12127330)])
def test_partial_sum_milestones(cyclic5, G0, l_max, count, total):
    assert len(enumerate_base_treks(G0, 1, 3, l_max)) == count
    assert abs(partial_sum(*cyclic5, 1, 3, l_max) - total) <= 5e-9


def test_trivial_enumerations(cyclic5, G0):
    assert [str(t) for t in enumerate_base_treks(G0, 2, 2, 0)] == ["2-o2"]
    assert trek_term(*cyclic5, BaseTrek.parse("2-o2")) == 0.5
    assert enumerate_base_treks(G0, 1, 3, -1) == []
    with pytest.raises(NodeOutOfRangeError):
        enumerate_base_treks(G0, 0, 3, 2)
    with pytest.raises(NodeOutOfRangeError):
        enumerate_base_treks(G0, 1, 6, 2)


def test_full_graph_enumeration_is_superset(cyclic5, G0):
    G = from_matrices(*cyclic5)
    full = enumerate_treks(G, 1, 3, 4)
    base = [t for t in full if t.is_base]
    assert [str(t) for t in base] == [str(t) for t in enumerate_base_treks(G0, 1, 3, 4)]
    assert any(str(t) == "1<-1<-4-o4->3" for t in full)


def test_enumerating_full_graph_as_base_strips_loops(cyclic5, G0):
    G = from_matrices(*cyclic5)
    assert enumerate_base_treks(G, 1, 3, 6) == enumerate_base_treks(G0, 1, 3, 6)


def test_string_round_trip():
    for s in ("1<-4-o4->3", "2-o2", "1<-2<-1<-4<-5<-3-o3"):
        assert str(Trek.parse(s)) == s
    t = Trek.parse("1<-4-o4->3")
    assert (t.n, t.m, t.l, t.source, t.target, t.top) == (1, 1, 2, 0, 2, (3, 3))
    assert str(t.reversed()) == "3<-4-o4->1"
    with pytest.raises(ValueError):
        Trek.parse("1<-2")
    with pytest.raises(ValueError):
        BaseTrek.parse("1<-1-o1")


def test_weight_errors(cyclic5):
    with pytest.raises(IncompatibleEdgeError):
        trek_weight(*cyclic5, Trek.parse("1<-3-o3"))
    with pytest.raises(IncompatibleEdgeError):
        trek_weight(*cyclic5, Trek.parse("1-o2"))
    M = CYCLIC_M.copy()
    M[0, 0] = -0.5
    with pytest.raises(DiagonalNotMinusOneError):
        trek_term(M, np.eye(5), BaseTrek.parse("2-o2"))


def test_weight_includes_self_loops(cyclic5):
    assert trek_weight(*cyclic5, Trek.parse("1<-1<-4-o4->3")) == pytest.approx(-0.1)


def test_symmetry_of_partial_sums(cyclic5):
    for i, j in [(1, 3), (2, 5), (4, 1)]:
        assert partial_sum(*cyclic5, i, j, 8) == pytest.approx(partial_sum(*cyclic5, j, i, 8), abs=1e-15)


def test_rho_examples():
    t = BaseTrek.parse("1<-2<-1<-4-o4->3")
    assert rho(t, SelfLoopProfile((0,) * 5, (0,) * 5)) == 1
    # node 1 appears twice on the left: 3 loops split into 2 slots -> 4 ways
    assert rho(t, SelfLoopProfile((3, 0, 0, 0, 0), (0,) * 5)) == 4
    assert rho(t, SelfLoopProfile((0, 0, 1, 0, 0), (0,) * 5)) == 0
    assert rho(t, SelfLoopProfile((1, 1, 0, 0, 0), (0, 0, 2, 1, 0))) == 2


def _profiles(d, total):
    for k in range(total + 1):
        for combo in itertools.combinations_with_replacement(range(2 * d), k):
            counts = [0] * (2 * d)
            for c in combo:
                counts[c] += 1
            yield SelfLoopProfile(tuple(counts[:d]), tuple(counts[d:]))


@pytest.mark.parametrize("i,j,L", [(1, 3, 6), (2, 2, 4), (5, 4, 5)])
def test_rho_counts_all_treks(cyclic5, G0, i, j, L):
    """Every trek is a base trek with loops inserted; rho counts the insertions."""
    G = from_matrices(*cyclic5)
    full = enumerate_treks(G, i, j, L)
    by_length = {}
    for t in enumerate_base_treks(G0, i, j, L):
        for p in _profiles(5, L - t.l):
            by_length[t.l + p.alpha_total + p.beta_total] = by_length.get(t.l + p.alpha_total + p.beta_total, 0) + rho(t, p)
    expected = {}
    for t in full:
        expected[t.l] = expected.get(t.l, 0) + 1
    assert by_length == expected


@given(st.integers(0, 10_000))
def test_unit_diagonal_sum_matches_general_route(seed):
    rng = np.random.default_rng(seed)
    d = 4
    M = np.tril(rng.uniform(-1, 1, (d, d)), -1) * (rng.random((d, d)) < 0.6)
    np.fill_diagonal(M, -1.0)
    C = np.diag(rng.uniform(0, 2, d))
    exact = partial_sum(M, C, 1, d, 6, exact=True)
    assert partial_sum(M, C, 1, d, 6) == pytest.approx(exact, abs=1e-15)


def test_trek_coefficient_term(cyclic5):
    t = BaseTrek.parse("1<-4<-5-o5->4->3")
    assert trek_term(*cyclic5, t) == pytest.approx(2**-5 * math.comb(4, 2) * 0.1, abs=1e-17)


def test_rho_worked_example():
    t = BaseTrek.parse("1<-2<-1-o1->2->1")
    assert rho(t, SelfLoopProfile((0, 0), (2, 0))) == 3


def test_acyclic_profiles_are_zero_or_one():
    t = BaseTrek.parse("3<-2<-1-o1->4")
    for a, b in itertools.product(range(3), repeat=2):
        assert rho(t, SelfLoopProfile((a, b, 0, 0), (a, 0, 0, b))) in (0, 1)


def test_full_graph_example_trek(cyclic5):
    treks = {str(t): t for t in enumerate_treks(from_matrices(*cyclic5), 1, 4, 4)}
    assert trek_weight(*cyclic5, treks["1<-4-o4->3->5->4"]) == pytest.approx(0.1)


def test_short_and_empty_enumerations(cyclic5):
    G = from_matrices(*cyclic5)
    assert [str(t) for t in enumerate_treks(G, 3, 3, 0)] == ["3-o3"]
    assert enumerate_treks(G, 1, 3, 0) == []
    assert enumerate_treks(from_matrices(-np.eye(3), np.eye(3)), 1, 2, 5) == []
    assert enumerate_base_treks(from_matrices(CYCLIC_M, np.zeros((5, 5))), 1, 3, 6) == []


@pytest.mark.parametrize("i,j", [(1, 3), (2, 5), (4, 4)])
def test_reversal_bijection(cyclic5, G0, i, j):
    forward = enumerate_base_treks(G0, i, j, 7)
    backward = enumerate_base_treks(G0, j, i, 7)
    assert sorted(t.reversed() for t in forward) == sorted(backward)
    for t in forward:
        assert trek_term(*cyclic5, t) == trek_term(*cyclic5, t.reversed())
    assert partial_sum(*cyclic5, i, j, 7) == partial_sum(*cyclic5, j, i, 7)


def test_enumeration_is_deterministic(G0):
    assert enumerate_base_treks(G0, 1, 3, 9) == enumerate_base_treks(G0, 1, 3, 9)


def test_no_zero_factors(cyclic5, G0):
    for t in enumerate_base_treks(G0, 1, 3, 8):
        assert trek_weight(*cyclic5, t) != 0
