"""Estimator-style front end over the three covariance routes."""

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_pair
from .acyclic import sigma_acyclic
from .lyapunov import residual, solve_lyapunov
from .series import MARGIN, sigma_series

METHODS = ("kron", "series", "acyclic")


class LyapunovCovariance(BaseEstimator):
    """Stationary covariance of ``dX = M X dt + C^(1/2) dW``.

    ``fit(M, C)`` takes the model itself rather than data.  After fitting,
    ``covariance_`` holds the solution and ``residual_`` the Frobenius norm of
    the Lyapunov residual.  With ``method="series"`` the attributes
    ``n_terms_``, ``tail_bound_`` and ``scale_`` are set as well (``None``
    otherwise).
    """

    def __init__(self, method="kron", tol=1e-10, margin=MARGIN):
        self.method = method
        self.tol = tol
        self.margin = margin

    def fit(self, M, C):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        M, C = check_pair(M, C)
        self.n_terms_ = self.tail_bound_ = self.scale_ = None
        if self.method == "kron":
            self.covariance_ = solve_lyapunov(M, C).sigma
        elif self.method == "series":
            res = sigma_series(M, C, tol=self.tol, margin=self.margin)
            self.covariance_ = res.sigma
            self.n_terms_ = res.terms_used
            self.tail_bound_ = res.tail_bound
            self.scale_ = res.scale_applied
        else:
            self.covariance_ = sigma_acyclic(M, C, tol=self.tol)
        self.residual_ = residual(M, C, self.covariance_)
        self.n_features_in_ = M.shape[0]
        return self

    def transform(self, X):
        """Whiten rows of ``X`` with the fitted covariance (pseudo-inverse square root)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X must have {self.n_features_in_} columns")
        w, V = np.linalg.eigh(self.covariance_)
        keep = w > w.max() * 1e-12
        W = (V[:, keep] / np.sqrt(w[keep])) @ V[:, keep].T
        return X @ W

    def score(self, X):
        """Mean Gaussian log-density of the rows of ``X`` under ``N(0, covariance_)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        sign, logdet = np.linalg.slogdet(self.covariance_)
        if sign <= 0:
            return -np.inf
        q = np.einsum("ij,ij->i", X, np.linalg.solve(self.covariance_, X.T).T)
        d = self.n_features_in_
        return float(np.mean(-0.5 * (q + logdet + d * np.log(2 * np.pi))))
