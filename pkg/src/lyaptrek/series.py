"""Numerical evaluation of the trek-rule power series.

With ``Lambda = M + I`` contractive, the stationary covariance is

    Sigma = sum_{n, m >= 0} 2**(-n-m-1) binom(n+m, n) Lambda^n C (Lambda^m)^T.

Grouping by ``k = n + m`` gives level matrices
``U_k = 2**(-k-1) sum_n binom(k, n) Lambda^n C (Lambda^(k-n))^T`` that obey
``U_{k+1} = (Lambda U_k + U_k Lambda^T) / 2`` (Pascal's rule), so each level
costs two matrix products.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from ._validation import check_node, check_pair, check_psd
from .exceptions import LambdaOutOfRangeError, ModelError, NoConvergenceError, NotStableError
from .graph import DECISION_RTOL, from_matrices, is_stable, rescale_to_contraction, spectral_radius_estimate
from .treks import enumerate_base_treks, trek_weight

MAX_LEVELS = 100_000
MAX_D_LEVELS = 200_000
MARGIN = 0.05


@dataclass(frozen=True)
class SeriesResult:
    """Truncated trek-series evaluation of the stationary covariance.

    ``terms_used`` is the largest level ``n + m`` included, ``tail_bound`` a
    bound on the Frobenius norm of everything dropped (plus a floating-point
    allowance), ``contraction_rate`` the ``r`` of ``||Lambda^n||_F <= K r^n``
    used for that bound, and ``scale_applied`` the factor applied to
    ``(M, C)`` beforehand.
    """

    sigma: np.ndarray
    terms_used: int
    tail_bound: float
    contraction_rate: float
    scale_applied: float


def power_bound(Lam, max_power=MAX_LEVELS):
    """Constants ``(K, r, p)`` with ``||Lam^n||_F <= K r^n`` for every ``n >= 0``.

    Several rates ``r`` between the estimated spectral radius and 1 are
    tried.  For each, the smallest ``p`` with ``||Lam^p||_F <= r^p`` is
    located; writing ``n = q p + s`` (``0 <= s < p``), submultiplicativity
    gives ``||Lam^n|| <= ||Lam^p||^q ||Lam^s|| <= r^(qp) K r^s`` with
    ``K = max_{s<p} ||Lam^s|| / r^s``.  Among the certified pairs the one
    with the fastest implied decay is returned.  If some power of ``Lam``
    vanishes, ``r = 0`` and ``p`` is the nilpotency index.
    """
    rho = spectral_radius_estimate(Lam, rtol=DECISION_RTOL)
    if rho >= 1.0:
        raise NotStableError("Lambda is not a contraction")
    rates = sorted({min(rho + (1.0 - rho) * f, 1.0 - 1e-12) for f in (0.02, 0.05, 0.1, 0.2, 0.35, 0.5)})
    d = Lam.shape[0]
    norms = [math.sqrt(d)]
    P = np.eye(d)
    found = {}
    for n in range(1, max_power + 1):
        P = P @ Lam
        nrm = float(np.linalg.norm(P))
        norms.append(nrm)
        if nrm == 0.0:
            return max(norms[:n]), 0.0, n
        for r in rates:
            if r not in found and nrm <= r**n:
                found[r] = n
        # the largest rate resolves first; give the sharper ones a bounded chance
        if found and n >= 4 * min(found.values()) + 50:
            break
    if not found:
        raise NoConvergenceError("could not certify a geometric bound on powers of Lambda")

    def levels_needed(K, r):
        # smallest N with K^2 r^(N+1) / (2 (1 - r)) below a fixed reference
        return math.log(1e-12 * (1 - r) / K**2) / math.log(r)

    best = None
    for r, p in found.items():
        K = max(norms[s] / r**s for s in range(p))
        key = levels_needed(K, r)
        if best is None or key < best[0]:
            best = (key, K, r, p)
    return best[1], best[2], best[3]


def _tail(K, r, c_norm, N):
    """Bound on ``sum_{k > N} ||U_k||_F``.

    ``||U_k|| <= 2**(-k-1) sum_n binom(k, n) K r^n ||C|| K r^(k-n)
    = K^2 ||C|| r^k / 2``, a geometric series in ``k``.
    """
    if r == 0.0:
        return 0.0
    return K * K * c_norm * r ** (N + 1) / (2.0 * (1.0 - r))


def _rescale(M, C, margin):
    """``rescale_to_contraction`` with the margin halved until one is attainable.

    Eigenvalues close to the imaginary axis bound ``rho(s M + I)`` away from
    0 for every ``s``, so a stable ``M`` need not admit the requested margin.
    """
    try:
        return rescale_to_contraction(M, C, margin)
    except NotStableError:
        if not is_stable(M):
            raise
    while margin > 1e-9:
        margin /= 2.0
        try:
            return rescale_to_contraction(M, C, margin)
        except NotStableError:
            continue
    raise NoConvergenceError("drift matrix is too close to instability for the trek series")


def sigma_series(M, C, tol=1e-10, max_terms=None, margin=MARGIN):
    """Stationary covariance from the trek-rule series with a certified tail.

    ``(M, C)`` is first rescaled so that ``rho(M + I) <= 1 - margin``; a
    smaller margin is used when that one cannot be reached.  Levels
    are accumulated until the truncation bound drops below ``tol``, or
    exactly ``max_terms`` levels are included when that is given.

    Returns
    -------
    SeriesResult
    """
    M, C = check_pair(M, C)
    check_psd(C, "C")
    Ms, Cs, s = _rescale(M, C, margin)
    d = M.shape[0]
    Lam = Ms + np.eye(d)
    K, r, p = power_bound(Lam)
    c_norm = float(np.linalg.norm(Cs))
    nilpotent_end = 2 * p - 2 if r == 0.0 else None

    U = Cs / 2.0
    S = U.copy()
    mass = float(np.linalg.norm(U))
    N = 0
    while True:
        if max_terms is not None:
            if N >= max_terms:
                break
        elif nilpotent_end is not None:
            # Lambda^p = 0 kills every level with n + m >= 2p - 1
            if N >= nilpotent_end:
                break
        elif _tail(K, r, c_norm, N) < tol:
            break
        if N >= MAX_LEVELS:
            raise NoConvergenceError(
                f"trek series needed more than {MAX_LEVELS} levels; increase the rescaling margin"
            )
        U = (Lam @ U + U @ Lam.T) / 2.0
        S += U
        mass += float(np.linalg.norm(U))
        N += 1
    if nilpotent_end is not None:
        truncation = 0.0 if N >= nilpotent_end else math.inf
    else:
        truncation = _tail(K, r, c_norm, N)
    # accumulated rounding: each level adds O(d eps) relative error on its own mass
    rounding = 4.0 * d * np.finfo(float).eps * (N + 1) * mass
    S = (S + S.T) / 2.0
    return SeriesResult(S, N, truncation + rounding, r, s)


def _geometric_ratio_tail(first, ratio_at):
    """Sum bound ``t_{K+1} / (1 - q)`` for terms with non-increasing ratio ``q``."""
    if first == 0.0:
        return 0.0
    if ratio_at >= 1.0:
        return math.inf
    return first / (1.0 - ratio_at)


def _d_level_bound(l, n, q, k):
    """Bound on the level-``k`` part of D: ``binom(l, n) binom(l + k, k) q^k``.

    The left side visits ``n + 1`` positions, so the weighted count of ways
    to place ``a`` loops there is at most ``binom(a + n, n) (q/2)^a``; the
    right side likewise.  Summing
    ``binom(l+k, n+a) binom(a+n, n) binom(b+m, m)`` over ``a + b = k`` gives
    ``binom(l, n) binom(l+k, k) 2^k``.
    """
    if q == 0.0:
        return 0.0 if k > 0 else float(math.comb(l, n))
    log_t = (
        math.log(math.comb(l, n))
        + math.lgamma(l + k + 1)
        - math.lgamma(k + 1)
        - math.lgamma(l + 1)
        + k * math.log(q)
    )
    return math.exp(log_t)


def _d_levels_needed(l, n, q, tol):
    """Smallest ``K`` whose tail ``sum_{k > K}`` of level bounds is below ``tol``.

    Level bounds ``t_k`` have ratio ``t_{k+1}/t_k = q (l + k + 1)/(k + 1)``,
    which decreases in ``k``; once it is below 1 at ``k = K + 1`` the tail is
    at most ``t_{K+1} / (1 - ratio)``.
    """
    if q == 0.0:
        return 0
    K = 0
    step = 1
    while True:
        ratio = q * (l + K + 2) / (K + 2)
        if ratio < 1.0 and _geometric_ratio_tail(_d_level_bound(l, n, q, K + 1), ratio) < tol:
            break
        if K > MAX_D_LEVELS:
            raise NoConvergenceError("self-loop series converges too slowly; |lambda| too close to 1")
        K += step
        step = min(2 * step, 64)
    # back off to the first admissible K
    lo = max(K - step, 0)
    while lo < K:
        ratio = q * (l + lo + 2) / (lo + 2)
        if ratio < 1.0 and _geometric_ratio_tail(_d_level_bound(l, n, q, lo + 1), ratio) < tol:
            return lo
        lo += 1
    return K


def d_level_sums(lambdas, tau, levels):
    """Per-level parts of D for a base trek, levels ``0..levels``.

    Entry ``k`` is the sum over self-loop profiles with ``alpha + beta = k``
    loops in total of ``rho binom(l + k, n + alpha) prod (lambda_i/2)^...``.

    Loops are placed on the trek *positions* (a node visited twice offers
    two slots, which is what ``rho`` counts).  Indexing the left positions
    ``p = 0..n`` from the top outward and the right ones ``q = 0..m``
    likewise, the quantities ``X[p, q] = 2**(-p-q-1) sum(...)`` for the
    partial trek up to ``(p, q)`` satisfy, as power series in a scaling
    variable ``s`` of all lambdas,

        (2 - s (lam_p + mu_q)) X[p, q] = X[p-1, q] + X[p, q-1] + [p = q = 0].

    Dividing by ``2 - c s`` is the recursion ``y_k = (z_k + c y_{k-1}) / 2``,
    which is one IIR filter pass per cell.  The level-``k`` part of D is
    ``2**(l+1)`` times the ``s^k`` coefficient of ``X[n, m]``.
    """
    lam = np.asarray(lambdas, dtype=float)
    left = lam[list(tau.left[::-1])]
    right = lam[list(tau.right)]
    length = levels + 1
    impulse = np.zeros(length)
    impulse[0] = 1.0
    prev_row = [None] * (tau.m + 1)
    for p in range(tau.n + 1):
        row = []
        for q in range(tau.m + 1):
            z = impulse.copy() if p == 0 and q == 0 else np.zeros(length)
            if p > 0:
                z += prev_row[q]
            if q > 0:
                z += row[q - 1]
            c = left[p] + right[q]
            row.append(lfilter([0.5], [1.0, -0.5 * c], z))
        prev_row = row
    return math.ldexp(1.0, tau.l + 1) * prev_row[tau.m]


def d_coefficient(lambdas, tau, tol=1e-12):
    """Self-loop coefficient D of a base trek, truncated to accuracy ``tol``.

    Terms are summed level by level in the total number of self-loops; the
    number of levels is fixed in advance from a rigorous bound on the
    remainder (see ``_d_level_bound``).  Only the diagonal values of nodes
    on the trek matter.  All ``|lambda_i| < 1`` is required.
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or np.any(np.abs(lam) >= 1.0):
        raise LambdaOutOfRangeError("all lambdas must lie in (-1, 1)")
    if tol <= 0:
        raise ModelError("tol must be positive")
    nodes = set(tau.left) | set(tau.right)
    if max(nodes) >= lam.size:
        raise LambdaOutOfRangeError("trek uses a node beyond the lambda vector")
    q = float(np.max(np.abs(lam[list(nodes)])))
    K = _d_levels_needed(tau.l, tau.n, q, tol)
    if K == 0:
        return float(math.comb(tau.l, tau.n))
    return math.fsum(d_level_sums(lam, tau, K))


def sigma_base_trek_series(M, C, i, j, l_max, tol=1e-10):
    """Entry ``Sigma[i, j]`` (1-based) from the base-trek form of the trek rule.

    Every base trek with ``l <= l_max`` contributes
    ``2**(-l-1) D(m_11 + 1, ..., m_dd + 1, tau) omega(M, C, tau)``, each D
    computed to ``tol`` divided by the number of treks.  For an acyclic model
    with ``l_max >= 2 (d - 1)`` the trek set is complete; for cyclic models
    ``l_max`` truncates the outer sum.
    """
    M, C = check_pair(M, C)
    lambdas = np.diag(M) + 1.0
    if np.any(np.abs(lambdas) >= 1.0):
        raise LambdaOutOfRangeError("diagonal drift entries must lie in (-2, 0)")
    if spectral_radius_estimate(M + np.eye(M.shape[0]), rtol=DECISION_RTOL) >= 1.0:
        raise NotStableError("M + I is not a contraction; rescale first")
    check_node(i, M.shape[0], "i")
    check_node(j, M.shape[0], "j")
    treks = enumerate_base_treks(from_matrices(M, C), i, j, l_max)
    if not treks:
        return 0.0
    each = tol / len(treks)
    return math.fsum(
        math.ldexp(d_coefficient(lambdas, t, each), -t.l - 1) * trek_weight(M, C, t) for t in treks
    )
