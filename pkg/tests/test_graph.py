import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import CYCLIC_M
from lyaptrek import (
    AsymmetricCError,
    DimensionMismatchError,
    MixedGraph,
    NotStableError,
    base_graph,
    from_matrices,
    is_stable,
    rescale_to_contraction,
    spectral_radius_estimate,
)


def test_example_graph_edges(cyclic5):
    G = from_matrices(*cyclic5)
    assert len(G.directed) == 12
    assert sum(s == t for s, t, _ in G.directed) == 5
    assert len(G.blunt) == 5 and all(i == j for i, j, _ in G.blunt)


def test_zero_and_diagonal_graphs():
    G = from_matrices(np.zeros((2, 2)), np.zeros((2, 2)))
    assert G.directed == () and G.blunt == ()
    G = from_matrices(-np.eye(3), np.eye(3))
    assert [w for *_, w in G.directed] == [-1.0] * 3
    assert [w for *_, w in G.blunt] == [1.0] * 3


def test_base_graph(cyclic5):
    G0 = base_graph(from_matrices(*cyclic5))
    assert len(G0.directed) == 7 and not G0.has_directed_self_loops
    assert base_graph(G0) == G0
    assert base_graph(from_matrices(-np.eye(3), np.eye(3))).directed == ()


def test_matrices_round_trip(cyclic5):
    M, C = from_matrices(*cyclic5).to_matrices()
    assert np.array_equal(M, cyclic5[0]) and np.array_equal(C, cyclic5[1])


def test_validation_errors():
    with pytest.raises(DimensionMismatchError):
        from_matrices(np.zeros((2, 2)), np.zeros((3, 3)))
    with pytest.raises(AsymmetricCError):
        from_matrices(np.zeros((2, 2)), np.array([[1.0, 0.1], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        MixedGraph(2, ((0, 1, 0.0),))


def test_spectral_radius_examples():
    assert spectral_radius_estimate(np.diag([0.5, -0.25])) == pytest.approx(0.5, abs=0.005)
    assert spectral_radius_estimate(np.zeros((3, 3))) == 0.0
    Lam = CYCLIC_M + np.eye(5)
    true = np.abs(np.linalg.eigvals(Lam)).max()
    assert abs(spectral_radius_estimate(Lam) - true) <= 0.01 * true


def test_spectral_radius_overflow_is_inf():
    assert spectral_radius_estimate(np.full((2, 2), 1e308)) == np.inf


@given(st.integers(0, 10_000))
def test_spectral_radius_accuracy_and_powers(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(5, 5))
    rho = np.abs(np.linalg.eigvals(A)).max()
    est = spectral_radius_estimate(A)
    assert abs(est - rho) <= 0.01 * max(rho, 1e-12)
    for k in (2, 3):
        assert spectral_radius_estimate(np.linalg.matrix_power(A, k)) == pytest.approx(est**k, rel=0.02)


def test_is_stable_examples():
    assert is_stable(CYCLIC_M)
    assert not is_stable(np.eye(2))
    assert is_stable(np.diag([-1.0, -1e-6]))
    assert not is_stable(np.array([[0.0, 1.0], [-1.0, 0.0]]))


@given(st.integers(0, 10_000))
def test_is_stable_matches_eigenvalues(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(4, 4))
    abscissa = np.linalg.eigvals(A).real.max()
    M = A - (abscissa + rng.choice([-0.3, 0.3])) * np.eye(4)
    assert is_stable(M) == (np.linalg.eigvals(M).real.max() < 0)


def test_rescale_examples(cyclic5):
    Ms, Cs, s = rescale_to_contraction(*cyclic5, margin=0.05)
    assert s == 1.0 and np.abs(np.linalg.eigvals(Ms + np.eye(5))).max() < 0.95
    Ms, Cs, s = rescale_to_contraction(-4 * np.eye(2), np.eye(2), 0.1)
    assert s <= 0.25 and np.array_equal(Cs, s * np.eye(2))
    with pytest.raises(NotStableError, match="drift matrix is not stable"):
        rescale_to_contraction(np.eye(2), np.eye(2))
