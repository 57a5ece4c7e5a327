"""Direct solution of the continuous Lyapunov equation ``M S + S M^T + C = 0``."""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import expm

from ._validation import check_pair, check_psd, check_square, pivoted_cholesky_min_pivot
from .exceptions import DimensionMismatchError, NotStableError, SingularSystemError
from .graph import is_stable


@dataclass(frozen=True)
class SolveReport:
    """Solution of the Lyapunov equation and its quality indicators.

    Attributes
    ----------
    sigma : ndarray
        The symmetric steady-state covariance.
    residual_norm : float
        Frobenius norm of ``M sigma + sigma M^T + C``.
    symmetrized : bool
        True when the raw linear solve was not exactly symmetric and had to be
        averaged with its transpose.
    """

    sigma: np.ndarray
    residual_norm: float
    symmetrized: bool


def lyapunov_operator(M):
    """The ``d^2 x d^2`` matrix ``M (x) I + I (x) M`` acting on ``vec(S)``."""
    M = check_square(M, "M")
    eye = np.eye(M.shape[0])
    return np.kron(M, eye) + np.kron(eye, M)


def residual(M, C, Sigma):
    """Frobenius norm of ``M Sigma + Sigma M^T + C``."""
    M = check_square(M, "M")
    C = check_square(C, "C")
    Sigma = check_square(Sigma, "Sigma")
    if not M.shape == C.shape == Sigma.shape:
        raise DimensionMismatchError("M, C and Sigma must have the same shape")
    return float(np.linalg.norm(M @ Sigma + Sigma @ M.T + C))


def solve_lyapunov(M, C):
    """Solve ``M S + S M^T + C = 0`` through the vectorized linear system.

    ``M`` must be stable and ``C`` symmetric positive semidefinite.  The
    ``d^2``-dimensional system is solved by LU with partial pivoting, so the
    cost is O(d^6); this is a reference solver for small ``d``.

    Returns
    -------
    SolveReport
    """
    M, C = check_pair(M, C)
    check_psd(C, "C")
    if not is_stable(M):
        raise NotStableError("drift matrix is not stable")
    d = M.shape[0]
    K = lyapunov_operator(M)
    try:
        # vec() is column-major; K is symmetric under the vec transposition, so
        # the ordering only has to be consistent on both sides
        x = np.linalg.solve(K, -C.reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("Kronecker system is singular") from exc
    S = x.reshape((d, d), order="F")
    if not np.all(np.isfinite(S)):
        raise SingularSystemError("Kronecker solve produced non-finite values")
    symmetrized = not np.array_equal(S, S.T)
    S = (S + S.T) / 2
    if pivoted_cholesky_min_pivot(S) < -1e-8:
        raise SingularSystemError("solution is not positive semidefinite; system is ill-conditioned")
    return SolveReport(S, residual(M, C, S), symmetrized)


def integral_quadrature(M, C, horizon, panels):
    """Composite Simpson approximation of ``int_0^h exp(tM) C exp(tM^T) dt``.

    ``panels`` is rounded up to an even number.  The propagator over one
    panel is computed once by scaling and squaring (Pade) and then applied
    repeatedly.
    """
    M, C = check_pair(M, C)
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if panels < 8:
        raise ValueError("need at least 8 panels")
    if not is_stable(M):
        raise NotStableError("drift matrix is not stable")
    panels += panels % 2
    h = horizon / panels
    step = expm(h * M)
    d = M.shape[0]
    values = np.empty((panels + 1, d, d))
    E = np.eye(d)
    for k in range(panels + 1):
        values[k] = E @ C @ E.T
        E = step @ E
    return simpson(values, dx=h, axis=0)
