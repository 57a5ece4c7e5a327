"""Mixed graphs induced by a drift/volatility pair, and contraction checks.

Nodes are 0-based inside the package; everything printed or parsed uses
1-based labels.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_pair, check_square
from .exceptions import DimensionMismatchError, ModelError, NotStableError

MAX_HALVINGS = 60
# decisions near rho = 1 need the sqrt(d) Frobenius factor squared away
DECISION_RTOL = 1e-12


@dataclass(frozen=True)
class MixedGraph:
    """Node set ``0..d-1`` with weighted directed and blunt edges.

    ``directed`` holds ``(source, target, weight)`` triples, the weight being
    the drift entry ``M[target, source]``.  ``blunt`` holds ``(i, j, weight)``
    with ``i <= j``; a blunt edge carries ``C[i, j] == C[j, i]``.
    """

    d: int
    directed: tuple = ()
    blunt: tuple = ()
    _parents: tuple = field(init=False, repr=False, compare=False)
    _tops: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise DimensionMismatchError("a graph needs at least one node")
        directed = tuple(sorted((int(s), int(t), float(w)) for s, t, w in self.directed))
        blunt = tuple(sorted((min(int(i), int(j)), max(int(i), int(j)), float(w)) for i, j, w in self.blunt))
        for s, t, w in directed:
            if not (0 <= s < self.d and 0 <= t < self.d) or w == 0:
                raise ModelError(f"bad directed edge {(s, t, w)}")
        for i, j, w in blunt:
            if not (0 <= i < self.d and 0 <= j < self.d) or w == 0:
                raise ModelError(f"bad blunt edge {(i, j, w)}")
        parents = [[] for _ in range(self.d)]
        for s, t, _ in directed:
            parents[t].append(s)
        tops = []
        for i, j, _ in blunt:
            tops.append((i, j))
            if i != j:
                tops.append((j, i))
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "blunt", blunt)
        object.__setattr__(self, "_parents", tuple(tuple(p) for p in parents))
        object.__setattr__(self, "_tops", tuple(sorted(tops)))

    def parents(self, node):
        """Sources of the directed edges pointing into ``node`` (ascending)."""
        return self._parents[node]

    @property
    def tops(self):
        """Ordered pairs ``(i0, j0)`` joined by a blunt edge, both orientations."""
        return self._tops

    @property
    def has_directed_self_loops(self):
        return any(s == t for s, t, _ in self.directed)

    def to_matrices(self):
        """Rebuild ``(M, C)`` with zeros off the edge set."""
        M = np.zeros((self.d, self.d))
        C = np.zeros((self.d, self.d))
        for s, t, w in self.directed:
            M[t, s] = w
        for i, j, w in self.blunt:
            C[i, j] = C[j, i] = w
        return M, C

    def __str__(self):
        arrows = ", ".join(f"{s + 1}->{t + 1}" for s, t, _ in self.directed)
        blunts = ", ".join(f"{i + 1}-o{j + 1}" for i, j, _ in self.blunt)
        return f"MixedGraph(d={self.d}; directed: {arrows or '-'}; blunt: {blunts or '-'})"


def from_matrices(M, C):
    """Minimal mixed graph compatible with ``(M, C)``.

    A directed edge ``i -> j`` is present iff ``M[j, i] != 0`` and a blunt
    edge ``i -o j`` iff ``C[i, j] != 0``.  ``C`` must be symmetric within
    ``1e-12``; it is symmetrized before reading off weights.
    """
    M, C = check_pair(M, C)
    d = M.shape[0]
    rows, cols = np.nonzero(M)
    directed = [(int(c), int(r), M[r, c]) for r, c in zip(rows, cols)]
    iu, ju = np.nonzero(np.triu(C))
    blunt = [(int(i), int(j), C[i, j]) for i, j in zip(iu, ju)]
    return MixedGraph(d, tuple(directed), tuple(blunt))


def base_graph(G):
    """Copy of ``G`` with every directed self-loop removed."""
    return MixedGraph(G.d, tuple(e for e in G.directed if e[0] != e[1]), G.blunt)


def spectral_radius_estimate(A, rtol=1e-3, max_squarings=40):
    """Gelfand estimate ``||A^(2^k)||_F^(1/2^k)`` by repeated squaring.

    Iterates until two successive estimates agree to relative ``rtol`` or
    ``max_squarings`` squarings were done.  The power is renormalized at
    every step and its log-norm tracked separately, so no overflow can occur
    for finite input.  The Frobenius norm dominates the spectral radius, so
    the estimate is never below the true value (up to rounding).
    """
    A = check_square(A, "A")
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return 0.0
    if not np.isfinite(norm):
        return np.inf
    B = A / norm
    log_norm = np.log(norm)  # log ||A^(2^k)||_F
    estimate = norm
    for k in range(1, max_squarings + 1):
        B = B @ B
        nb = np.linalg.norm(B)
        if nb == 0.0:
            return 0.0
        log_norm = 2.0 * log_norm + np.log(nb)
        B /= nb
        new = float(np.exp(log_norm / 2.0**k))
        if abs(new - estimate) <= rtol * max(new, estimate):
            return new
        estimate = new
    return estimate


def _is_lower_triangular(M):
    return not np.any(np.triu(M, 1))


def is_stable(M):
    """Whether all eigenvalues of ``M`` have negative real part.

    Decided by searching ``s`` in ``1, 1/2, ..., 2**-60`` for a contraction
    ``spectral_radius_estimate(s*M + I) < 1``.  Lower-triangular input is
    answered from the diagonal directly.
    """
    M = check_square(M, "M")
    if _is_lower_triangular(M):
        return bool(np.all(np.diag(M) < 0))
    eye = np.eye(M.shape[0])
    s = 1.0
    for _ in range(MAX_HALVINGS + 1):
        if spectral_radius_estimate(s * M + eye, rtol=DECISION_RTOL) < 1.0:
            return True
        s /= 2.0
    return False


def rescale_to_contraction(M, C, margin=0.05):
    """Return ``(s*M, s*C, s)`` with ``rho(s*M + I) <= 1 - margin``.

    ``s`` is the first admissible value of ``1, 1/2, 1/4, ...``.  The
    Lyapunov solution is unchanged by this rescaling.
    """
    if not 0.0 < margin < 1.0:
        raise ModelError("margin must lie in (0, 1)")
    M, C = check_pair(M, C)
    eye = np.eye(M.shape[0])
    s = 1.0
    for _ in range(MAX_HALVINGS + 1):
        if spectral_radius_estimate(s * M + eye, rtol=DECISION_RTOL) <= 1.0 - margin:
            return s * M, s * C, s
        s /= 2.0
    raise NotStableError("drift matrix is not stable")
