"""Linear additive noise (structural equation) models ``X = B X + eps``.

Used as a contrast to the Lyapunov covariance: their one-factor models have
vanishing tetrads, and the sink variance splits exactly into a residual and a
propagated part.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from ._validation import check_psd, check_square, check_symmetric
from .exceptions import (
    DimensionMismatchError,
    ModelError,
    NotTriangularError,
    PreconditionViolationError,
    SingularIminusBError,
)


@dataclass(frozen=True)
class LanModel:
    """Coefficients ``B`` (zero diagonal) and noise covariance ``Omega``."""

    B: np.ndarray
    Omega: np.ndarray

    def __post_init__(self):
        B = check_square(self.B, "B")
        Omega = check_symmetric(self.Omega, "Omega")
        if B.shape != Omega.shape:
            raise DimensionMismatchError("B and Omega must have the same shape")
        if np.any(np.diag(B) != 0):
            raise ModelError("B must have a zero diagonal")
        check_psd(Omega, "Omega")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "Omega", Omega)


def lan_sigma(model):
    """``(I - B)^{-1} Omega (I - B)^{-T}``, symmetrized."""
    d = model.B.shape[0]
    A = np.eye(d) - model.B
    if not np.any(np.triu(model.B, 1)):
        # unit lower triangular, always invertible
        X = solve_triangular(A, model.Omega, lower=True, unit_diagonal=True)
        S = solve_triangular(A, X.T, lower=True, unit_diagonal=True)
    else:
        try:
            X = np.linalg.solve(A, model.Omega)
            S = np.linalg.solve(A, X.T)
        except np.linalg.LinAlgError as exc:
            raise SingularIminusBError("I - B is singular") from exc
        if not np.all(np.isfinite(S)):
            raise SingularIminusBError("I - B is singular")
    return (S + S.T) / 2


def lan_variance_decomposition(model):
    """Split ``Sigma_dd`` into ``(Omega_dd, B_d1 Sigma_11 B_d1^T)``.

    ``B`` must be strictly lower triangular, i.e. already in topological
    order, and the last noise term uncorrelated with the others.
    """
    B = model.B
    if np.any(np.triu(B)):
        raise NotTriangularError("B must be strictly lower triangular")
    if np.any(model.Omega[-1, :-1]):
        raise PreconditionViolationError("noise of the last node must be uncorrelated with the rest")
    d = B.shape[0]
    residual = float(model.Omega[-1, -1])
    if d == 1:
        return residual, 0.0
    S11 = lan_sigma(LanModel(B[:-1, :-1], model.Omega[:-1, :-1]))
    row = B[-1, :-1]
    return residual, float(row @ S11 @ row)
