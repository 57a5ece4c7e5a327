"""Acyclic drift matrices: finite trek polynomials, closed forms and bounds."""

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ._validation import check_node, check_pair, check_square
from .exceptions import (
    CyclicGraphError,
    DiagonalNotMinusOneError,
    DiagonalOutOfRangeError,
    LambdaOutOfRangeError,
    ModelError,
    NoConvergenceError,
    PreconditionViolationError,
    ZOutOfRangeError,
)
from .graph import base_graph, from_matrices
from .lyapunov import solve_lyapunov
from .series import d_coefficient, d_level_sums
from .treks import BaseTrek, enumerate_base_treks, trek_coefficient, trek_weight

H_MAX_LEVELS = 1_000_000
H_BLOCK = 256


@dataclass(frozen=True)
class TopologicalOrder:
    """Node permutation (0-based, sources first) making ``M`` lower triangular."""

    permutation: tuple

    def apply(self, A):
        """``A`` with rows and columns reordered to the topological order."""
        p = list(self.permutation)
        return np.asarray(A)[np.ix_(p, p)]

    def labels(self):
        return [v + 1 for v in self.permutation]


def topological_order(G0):
    """Kahn's algorithm on the directed part of ``G0``, smallest node first on ties.

    Directed self-loops are ignored.  Raises :class:`CyclicGraphError` when
    the directed part has a cycle.
    """
    G0 = base_graph(G0)
    indeg = [0] * G0.d
    children = [[] for _ in range(G0.d)]
    for s, t, _ in G0.directed:
        indeg[t] += 1
        children[s].append(t)
    ready = [v for v in range(G0.d) if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, c)
    if len(order) < G0.d:
        stuck = sorted(v + 1 for v in range(G0.d) if indeg[v] > 0)
        raise CyclicGraphError(f"directed cycle among nodes {stuck}")
    return TopologicalOrder(tuple(order))


def _all_base_treks(M, C):
    """All base treks of an acyclic model, keyed by 0-based ``(i, j)``."""
    G = from_matrices(M, C)
    topological_order(G)
    d = G.d
    l_max = 2 * (d - 1)  # each side is a self-avoiding directed path
    return {(i, j): enumerate_base_treks(G, i + 1, j + 1, l_max) for i in range(d) for j in range(i, d)}


def _fill_symmetric(d, entries):
    S = np.zeros((d, d))
    for (i, j), v in entries.items():
        S[i, j] = S[j, i] = v
    return S


def sigma_acyclic_unit_diagonal(M, C):
    """Exact covariance of an acyclic model with every ``m_ii = -1``.

    Finite sum of ``2**(-l-1) binom(l, n) omega`` over all base treks.
    """
    M, C = check_pair(M, C)
    if not np.all(np.diag(M) == -1.0):
        raise DiagonalNotMinusOneError("all diagonal drift entries must equal -1")
    treks = _all_base_treks(M, C)
    entries = {
        key: math.fsum(trek_coefficient(t) * trek_weight(M, C, t) for t in ts) for key, ts in treks.items()
    }
    return _fill_symmetric(M.shape[0], entries)


def sigma_acyclic(M, C, tol=1e-10):
    """Covariance of an acyclic model as a finite sum over base treks.

    Each trek is weighted by ``2**(-l-1) D(m_11 + 1, ..., m_dd + 1, tau)``.
    Diagonal entries below -1 are first brought into ``[-1, 0)`` by a common
    rescaling of ``(M, C)``, which leaves the solution unchanged.
    """
    M, C = check_pair(M, C)
    diag = np.diag(M)
    if np.any(diag >= 0):
        raise DiagonalOutOfRangeError("diagonal drift entries must be negative")
    s = min(1.0, 1.0 / float(np.max(-diag)))
    M, C = s * M, s * C
    lambdas = np.clip(np.diag(M) + 1.0, 0.0, None)
    treks = _all_base_treks(M, C)
    count = max(1, sum(len(ts) for ts in treks.values()))
    each = tol / count
    entries = {}
    for key, ts in treks.items():
        entries[key] = math.fsum(
            math.ldexp(d_coefficient(lambdas, t, each), -t.l - 1) * trek_weight(M, C, t) for t in ts
        )
    return _fill_symmetric(M.shape[0], entries)


def path_model(d, zeta, gamma):
    """Drift and volatility of the chain ``1 -> 2 -> ... -> d``.

    ``m_ii = -1``, ``m_{i+1,i} = zeta`` and ``C = gamma I``.
    """
    M = -np.eye(d) + zeta * np.eye(d, k=-1)
    return M, gamma * np.eye(d)


def path_model_sigma(d, zeta, gamma):
    """Closed-form covariance of :func:`path_model`.

    ``Sigma_ij = sum_{t=1}^{min(i,j)} 2**(2t-i-j-1) binom(i+j-2t, i-t) zeta**(i+j-2t) gamma``
    """
    S = np.empty((d, d))
    for i in range(1, d + 1):
        for j in range(i, d + 1):
            total = math.fsum(
                math.ldexp(math.comb(i + j - 2 * t, i - t), 2 * t - i - j - 1) * zeta ** (i + j - 2 * t)
                for t in range(1, i + 1)
            )
            S[i - 1, j - 1] = S[j - 1, i - 1] = total * gamma
    return S


def factor_model(m_diag, loadings, c_diag):
    """Matrices of the one-factor model: node 1 drives every other node."""
    m_diag = np.asarray(m_diag, dtype=float)
    loadings = np.asarray(loadings, dtype=float)
    d = m_diag.size
    if loadings.size != d - 1 or np.size(c_diag) != d:
        raise ModelError("need d diagonal entries, d - 1 loadings and d volatilities")
    M = np.diag(m_diag)
    M[1:, 0] = loadings
    return M, np.diag(np.asarray(c_diag, dtype=float))


def factor_model_sigma(m_diag, loadings, c_diag):
    """Closed-form covariance of the one-factor model.

    With ``m_11 = -1`` and the remaining ``m_ii`` in ``[-1, 0)``:

    * ``Sigma_11 = c_11 / 2``
    * ``Sigma_1j = c_11 m_j1 / (2 (1 - m_jj))`` from the single trek ``1 -o 1 -> j``
    * ``Sigma_ii = -c_ii / (2 m_ii) + d_ii m_i1**2 c_11``
    * ``Sigma_ij = d_ij m_i1 m_j1 c_11`` with
      ``d_ij = (m_ii + m_jj - 2) / (2 (1 - m_ii)(1 - m_jj)(m_ii + m_jj))``
    """
    m = np.asarray(m_diag, dtype=float)
    a = np.concatenate([[0.0], np.asarray(loadings, dtype=float)])
    c = np.asarray(c_diag, dtype=float)
    d = m.size
    if m[0] != -1.0:
        raise DiagonalOutOfRangeError("the factor node needs m_11 = -1")
    if np.any(m[1:] < -1.0) or np.any(m[1:] >= 0.0):
        raise DiagonalOutOfRangeError("m_ii must lie in [-1, 0) for i >= 2")
    if a.size != d or c.size != d:
        raise ModelError("need d diagonal entries, d - 1 loadings and d volatilities")
    S = np.empty((d, d))
    S[0, 0] = c[0] / 2
    for j in range(1, d):
        S[0, j] = S[j, 0] = c[0] * a[j] / (2 * (1 - m[j]))
    for i in range(1, d):
        for j in range(i, d):
            dij = 0.5 * (m[i] + m[j] - 2) / ((1 - m[i]) * (1 - m[j]) * (m[i] + m[j]))
            S[i, j] = S[j, i] = dij * a[i] * a[j] * c[0]
        S[i, i] += -c[i] / (2 * m[i])
    return S


def tetrad(Sigma, i, j, k, l):  # noqa: E741
    """``Sigma_ij Sigma_kl - Sigma_il Sigma_kj`` for 1-based nodes."""
    Sigma = check_square(Sigma, "Sigma")
    d = Sigma.shape[0]
    i, j, k, l = (check_node(v, d) for v in (i, j, k, l))  # noqa: E741
    return float(Sigma[i, j] * Sigma[k, l] - Sigma[i, l] * Sigma[k, j])


def _check_bound_preconditions(M, C):
    if np.any(np.triu(M, 1)):
        raise PreconditionViolationError("M must be lower triangular")
    diag = np.diag(M)
    if np.any(diag < -1.0) or np.any(diag >= 0.0):
        raise PreconditionViolationError("diagonal entries m_ii must lie in [-1, 0)")
    if np.any(np.tril(M, -1) < 0):
        raise PreconditionViolationError("off-diagonal entries must be nonnegative")
    if np.any(C - np.diag(np.diag(C))):
        raise PreconditionViolationError("C must be diagonal")
    if np.any(np.diag(C) < 0):
        raise PreconditionViolationError("C must be positive semidefinite")


def variance_lower_bound(M, C):
    """Lower bound ``-c_dd / (2 m_dd) + M_d1 Sigma_11 M_d1^T / 2`` on ``Sigma_dd``.

    Valid for lower-triangular ``M`` with diagonal in ``[-1, 0)``, nonnegative
    off-diagonal entries and diagonal ``C``.  ``Sigma_11`` is the covariance
    of the first ``d - 1`` nodes and ``M_d1`` the first ``d - 1`` entries of
    the last row of ``M``.
    """
    M, C = check_pair(M, C)
    _check_bound_preconditions(M, C)
    d = M.shape[0]
    own = -C[-1, -1] / (2 * M[-1, -1])
    if d == 1:
        return float(own)
    S11 = solve_lyapunov(M[:-1, :-1], C[:-1, :-1]).sigma
    row = M[-1, :-1]
    return float(own + 0.5 * row @ S11 @ row)


def bound_sweep(M, C):
    """Rows ``(k, Sigma_kk, bound_k)`` for the leading ``k x k`` sub-models."""
    M, C = check_pair(M, C)
    _check_bound_preconditions(M, C)
    S = solve_lyapunov(M, C).sigma
    return [(k, float(S[k - 1, k - 1]), variance_lower_bound(M[:k, :k], C[:k, :k])) for k in range(1, M.shape[0] + 1)]


def _h_levels(scale, w, tol):
    """Smallest ``K`` with ``scale * w^(K+1) / (1 - w) < tol``."""
    if w == 0.0:
        return 0
    K = max(0, math.ceil(math.log(tol * (1.0 - w) / scale) / math.log(w)) - 1)
    while scale * w ** (K + 1) / (1.0 - w) >= tol:
        K += 1
    while K > 0 and scale * w**K / (1.0 - w) < tol:
        K -= 1
    return K


def h_function(a, b, z, tol=1e-12):
    """``H(a, b, z) = sum_{n,m} (a+b+1)_{n+m+2} / ((a+1)_{n+1} (b+1)_{m+1}) z^(n+m)``.

    Writing the term as ``binom(a+b+k+2, a+n+1) / binom(a+b, a) * z^k`` with
    ``k = n + m`` shows that level ``k`` is at most
    ``2**(a+b+2) / binom(a+b, a) * (2|z|)^k``, so the number of levels is
    fixed in advance from that geometric tail (at ``tol / 2``; the other
    half is left for rounding).  Terms are formed from log-gamma values in
    row blocks.
    """
    if a < 0 or b < 0 or int(a) != a or int(b) != b:
        raise ModelError("a and b must be nonnegative integers")
    a, b = int(a), int(b)
    if not abs(z) < 0.5:
        raise ZOutOfRangeError("H needs |z| < 1/2")
    if tol <= 0:
        raise ModelError("tol must be positive")
    base = (a + b + 2) * (a + b + 1) / ((a + 1) * (b + 1))
    if z == 0:
        return float(base)
    w = 2.0 * abs(z)
    K = _h_levels(math.ldexp(1.0, a + b + 2) / math.comb(a + b, a), w, tol / 2)
    if K > H_MAX_LEVELS:
        raise NoConvergenceError("H series converges too slowly; |z| too close to 1/2")
    idx = np.arange(K + 1)
    log_a = gammaln(a + idx + 2) - gammaln(a + 1)  # log (a+1)_{n+1}
    log_b = gammaln(b + idx + 2) - gammaln(b + 1)
    log_z = math.log(abs(z))
    parts = []
    for lo in range(0, K + 1, H_BLOCK):
        n = idx[lo : lo + H_BLOCK, None]
        m = idx[None, : K + 1 - lo]
        k = n + m
        logt = gammaln(a + b + k + 3) - gammaln(a + b + 1) - log_a[n] - log_b[m] + k * log_z
        t = np.where(k <= K, np.exp(np.minimum(logt, 700.0)), 0.0)
        if z < 0:
            t = np.where(k % 2, -t, t)
        parts.append(math.fsum(t.sum(axis=1)))
    return math.fsum(parts)


def h_table(a_max, b_max, z, tol=1e-12):
    """``H(a, b, z)`` for all ``0 <= a <= a_max``, ``0 <= b <= b_max``.

    Pascal's rule applied level by level to the binomial form of the terms
    gives ``H(a, b) = (a H(a-1, b) + b H(a, b-1)) / (a + b)``.  Only the two
    edges are summed directly; the interior entries are convex combinations
    of them, so each carries the edge accuracy ``tol``.
    """
    H = np.empty((a_max + 1, b_max + 1))
    H[:, 0] = [h_function(a, 0, z, tol) for a in range(a_max + 1)]
    H[0, 1:] = [h_function(0, b, z, tol) for b in range(1, b_max + 1)]
    for a in range(1, a_max + 1):
        for b in range(1, b_max + 1):
            H[a, b] = (a * H[a - 1, b] + b * H[a, b - 1]) / (a + b)
    return H


def extension_trek(tilde_tau, d):
    """The trek ``d <- tilde_tau -> d`` for 1-based sink ``d``."""
    sink = d - 1
    return BaseTrek((sink,) + tilde_tau.left, tilde_tau.right + (sink,))


def _side_loop_sums(values, levels):
    """``h_a`` of the given position values for ``a = 0..levels``."""
    h = np.zeros(levels + 1)
    h[0] = 1.0
    for x in values:
        # multiply by 1 / (1 - x t): h_a += x h_{a-1}, running upward
        for a in range(1, levels + 1):
            h[a] += x * h[a - 1]
    return h


def d_extension_identity_check(lambdas, tilde_tau, tol=1e-10):
    """Both sides of the sink-extension identity for the self-loop coefficient.

    For ``tau = d <- tilde_tau -> d`` with ``d = len(lambdas)`` and
    ``tilde_tau`` on nodes ``1..d-1``, returns ``(lhs, rhs)`` where ``lhs``
    is ``D(lambdas, tau)`` and

        rhs = sum_{alpha, beta} H(n~ + |alpha|, m~ + |beta|, lambda_d / 2)
              binom(l~ + |alpha| + |beta|, n~ + |alpha|) prod_{i<d} (lambda_i/2)^(alpha_i+beta_i)

    over the self-loop profiles of ``tilde_tau``.  Each side is accurate
    to ``tol``.
    """
    lam = np.asarray(lambdas, dtype=float)
    d = lam.size
    if np.any(np.abs(lam) >= 1.0):
        raise LambdaOutOfRangeError("all lambdas must lie in (-1, 1)")
    if lam[-1] < 0:
        raise LambdaOutOfRangeError("the sink needs lambda_d in [0, 1)")
    nodes = set(tilde_tau.left) | set(tilde_tau.right)
    if max(nodes) >= d - 1:
        raise ModelError("tilde_tau must avoid the sink node")
    tau = extension_trek(tilde_tau, d)
    lhs = d_coefficient(lam, tau, tol)

    n, m, l = tilde_tau.n, tilde_tau.m, tilde_tau.l  # noqa: E741
    z = lam[-1] / 2
    w = 2 * z
    q = float(np.max(np.abs(lam[list(nodes)])))
    # H(a, b, z) <= 2**(a+b+2) / binom(a+b, a) / (1 - 2z), so the (a, b) term is
    # at most 4 * 2**l / (1 - 2z) * |L_a| |R_b| 2^(a+b) and level k = a + b is
    # at most 4 * 2**l / (1 - 2z) * binom(k + l + 1, l + 1) q^k.
    amp = 4.0 * 2.0**l / (1.0 - w)

    def level_bound(k):
        return amp * math.exp(math.lgamma(k + l + 2) - math.lgamma(k + 1) - math.lgamma(l + 2) + k * math.log(q)) if q else 0.0

    K = 0
    if q > 0:
        while True:
            ratio = q * (K + l + 3) / (K + 2)
            if ratio < 1 and level_bound(K + 1) / (1 - ratio) < tol / 2:
                break
            K += 1
            if K > H_MAX_LEVELS:
                raise NoConvergenceError("extension sum did not converge")
    L = _side_loop_sums(lam[list(tilde_tau.left)] / 2, K)
    R = _side_loop_sums(lam[list(tilde_tau.right)] / 2, K)
    # |sum of H errors| <= tol_h * sum binom |L||R| <= tol_h * binom(l, n) (1 - q)^(-l-1)
    tol_h = tol / 2 / (math.comb(l, n) * (1 - q) ** (-l - 1))
    H = h_table(n + K, m + K, z, tol_h)
    terms = []
    for a in range(K + 1):
        for b in range(K + 1 - a):
            if L[a] == 0 or R[b] == 0:
                continue
            terms.append(H[n + a, m + b] * math.comb(l + a + b, n + a) * L[a] * R[b])
    return lhs, math.fsum(terms)
