"""Input validation helpers shared by the public functions and estimators."""

import numpy as np

from .exceptions import (
    AsymmetricCError,
    DimensionMismatchError,
    NodeOutOfRangeError,
    NotPSDError,
)

SYMMETRY_TOL = 1e-12


def check_square(A, name="matrix"):
    """Return ``A`` as a float64 2-D square array, raising on bad shape."""
    try:
        A = np.asarray(A, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatchError(f"{name} is not a numeric array") from exc
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatchError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionMismatchError(f"{name} contains non-finite entries")
    return A


def check_symmetric(C, name="C", tol=SYMMETRY_TOL):
    """Check ``C`` against an absolute symmetry tolerance and symmetrize it."""
    C = check_square(C, name)
    if np.max(np.abs(C - C.T)) > tol:
        raise AsymmetricCError(f"{name} is not symmetric within {tol:g}")
    return (C + C.T) / 2


def check_pair(M, C):
    """Validate a drift/volatility pair; returns ``(M, C)`` with ``C`` symmetrized."""
    M = check_square(M, "M")
    C = check_symmetric(C, "C")
    if M.shape != C.shape:
        raise DimensionMismatchError(f"M has shape {M.shape} but C has shape {C.shape}")
    return M, C


def pivoted_cholesky_min_pivot(A, stop=1e-14):
    """Smallest pivot met by a diagonally pivoted Cholesky factorization.

    The factorization runs on ``A`` scaled to unit maximal diagonal and halts
    once the largest remaining pivot drops below ``stop``.  For a positive
    semidefinite matrix the untouched remainder must then vanish, so the
    returned value is the most negative of its diagonal and of minus its
    largest off-diagonal magnitude (rescaled back).  A clearly negative
    value therefore certifies indefiniteness.
    """
    S = np.array(A, dtype=float)
    d = S.shape[0]
    scale = max(1.0, float(np.max(np.abs(np.diag(S)))))
    S /= scale
    min_pivot = np.inf
    for k in range(d):
        p = k + int(np.argmax(np.diag(S)[k:]))
        pivot = S[p, p]
        if pivot <= stop:
            rest = S[k:, k:]
            off = np.abs(rest - np.diag(np.diag(rest))).max() if rest.shape[0] > 1 else 0.0
            low = min(float(np.diag(rest).min()), -float(off), min_pivot)
            return low * scale
        min_pivot = min(min_pivot, pivot)
        S[[k, p], :] = S[[p, k], :]
        S[:, [k, p]] = S[:, [p, k]]
        col = S[k + 1:, k] / np.sqrt(pivot)
        S[k + 1:, k + 1:] -= np.outer(col, col)
        S[k + 1:, k] = 0.0
        S[k, k + 1:] = 0.0
    return float(min_pivot * scale)


def check_psd(A, name="C", floor=-1e-10):
    if pivoted_cholesky_min_pivot(A) < floor:
        raise NotPSDError(f"{name} is not positive semidefinite")
    return A


def check_node(i, d, name="node"):
    """Convert a 1-based node label to a 0-based index."""
    if isinstance(i, bool) or int(i) != i or not 1 <= int(i) <= d:
        raise NodeOutOfRangeError(f"{name} {i!r} outside 1..{d}")
    return int(i) - 1
