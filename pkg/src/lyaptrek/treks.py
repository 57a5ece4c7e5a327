"""Treks in a mixed graph: enumeration, weights and per-trek terms.

A trek from ``i`` to ``j`` is written ``i <- ... <- i0 -o j0 -> ... -> j``.
It is stored as two node tuples: ``left = (i, ..., i0)`` (target first) and
``right = (j0, ..., j)``.  String forms use 1-based labels, ``<-``/``->`` for
directed edges and ``-o`` for the blunt top, e.g. ``"1<-4-o4->3"``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from ._validation import check_node, check_pair
from .exceptions import DiagonalNotMinusOneError, IncompatibleEdgeError, ModelError
from .graph import MixedGraph, from_matrices


@dataclass(frozen=True, order=True)
class Trek:
    """A trek; a base trek is one without directed self-loops."""

    left: tuple
    right: tuple

    def __post_init__(self):
        if not self.left or not self.right:
            raise ModelError("both sides of a trek need at least the top node")
        object.__setattr__(self, "left", tuple(int(v) for v in self.left))
        object.__setattr__(self, "right", tuple(int(v) for v in self.right))

    @property
    def n(self):
        return len(self.left) - 1

    @property
    def m(self):
        return len(self.right) - 1

    @property
    def l(self):  # noqa: E743
        return self.n + self.m

    @property
    def source(self):
        return self.left[0]

    @property
    def target(self):
        return self.right[-1]

    @property
    def top(self):
        return self.left[-1], self.right[0]

    @property
    def is_base(self):
        return all(a != b for a, b in zip(self.left, self.left[1:])) and all(
            a != b for a, b in zip(self.right, self.right[1:])
        )

    def directed_edges(self):
        """``(source, target)`` pairs of the directed edges, 0-based."""
        edges = [(self.left[k + 1], self.left[k]) for k in range(self.n)]
        edges += [(self.right[k], self.right[k + 1]) for k in range(self.m)]
        return edges

    def reversed(self):
        """The same walk read from ``j`` to ``i``."""
        return type(self)(self.right[::-1], self.left[::-1])

    def sort_key(self):
        return (self.l, self.n, self.left + self.right)

    def __str__(self):
        left = "<-".join(str(v + 1) for v in self.left)
        right = "->".join(str(v + 1) for v in self.right)
        return f"{left}-o{right}"

    @classmethod
    def parse(cls, text):
        """Inverse of ``str()``: ``"1<-2<-3-o3"`` -> ``Trek((0, 1, 2), (2,))``."""
        left, sep, right = text.replace(" ", "").partition("-o")
        if not sep:
            raise ModelError(f"no blunt top '-o' in {text!r}")
        return cls(
            tuple(int(v) - 1 for v in left.split("<-")),
            tuple(int(v) - 1 for v in right.split("->")),
        )


class BaseTrek(Trek):
    """Trek without directed self-loops."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_base:
            raise ModelError(f"{self} contains a directed self-loop")

    @cached_property
    def left_counts(self):
        """Occurrences of each node on the left side, as a dict."""
        return _counts(self.left)

    @cached_property
    def right_counts(self):
        return _counts(self.right)


def _counts(seq):
    out = {}
    for v in seq:
        out[v] = out.get(v, 0) + 1
    return out


@dataclass(frozen=True)
class SelfLoopProfile:
    """Per-node self-loop counts on the left (``alpha``) and right (``beta``)."""

    alpha: tuple
    beta: tuple

    @property
    def alpha_total(self):
        return sum(self.alpha)

    @property
    def beta_total(self):
        return sum(self.beta)


def _walks_into(G, target, max_len):
    """All directed walks ending at ``target`` with at most ``max_len`` edges.

    Walks are grown breadth-first backwards along parent edges and stored
    target-first; ``levels[n]`` holds the walks with ``n`` edges.
    """
    levels = [[(target,)]]
    for _ in range(max_len):
        levels.append([w + (p,) for w in levels[-1] for p in G.parents(w[-1])])
    return levels


def _enumerate(G, i, j, l_max, cls):
    if l_max < 0:
        return []
    i = check_node(i, G.d, "i")
    j = check_node(j, G.d, "j")
    into_i = _walks_into(G, i, l_max)
    into_j = _walks_into(G, j, l_max)

    def by_origin(levels):
        table = {}
        for n, walks in enumerate(levels):
            for w in walks:
                table.setdefault((w[-1], n), []).append(w)
        return table

    left_of = by_origin(into_i)
    right_of = by_origin(into_j)
    out = []
    for i0, j0 in G.tops:
        for n in range(l_max + 1):
            lefts = left_of.get((i0, n))
            if not lefts:
                continue
            for m in range(l_max - n + 1):
                for r in right_of.get((j0, m), ()):
                    right = r[::-1]
                    out.extend(cls(left, right) for left in lefts)
    out.sort(key=Trek.sort_key)
    return out


def enumerate_base_treks(G0, i, j, l_max):
    """All base treks from node ``i`` to node ``j`` (1-based) with ``l <= l_max``.

    Directed self-loops of ``G0`` are ignored, so passing a full graph
    enumerates the treks of its base graph.  The result is sorted by ``l``,
    then ``n``, then the node sequence.
    """
    if G0.has_directed_self_loops:
        G0 = MixedGraph(G0.d, tuple(e for e in G0.directed if e[0] != e[1]), G0.blunt)
    return _enumerate(G0, i, j, l_max, BaseTrek)


def enumerate_treks(G, i, j, l_max):
    """All treks (self-loops allowed) from ``i`` to ``j`` with ``l <= l_max``."""
    return _enumerate(G, i, j, l_max, Trek)


def _decimal(x):
    """Exact rational value of the shortest decimal that round-trips to ``x``."""
    return Fraction(repr(float(x)))


def _weight_factors(M, C, tau):
    i0, j0 = tau.top
    if C[i0, j0] == 0:
        raise IncompatibleEdgeError(f"no blunt edge {i0 + 1}-o{j0 + 1}")
    factors = [C[i0, j0]]
    for s, t in tau.directed_edges():
        if M[t, s] == 0:
            raise IncompatibleEdgeError(f"no directed edge {s + 1}->{t + 1}")
        factors.append(M[t, s])
    return factors


def trek_weight(M, C, tau, exact=False):
    """Product of the edge weights along ``tau``, top weight ``C[i0, j0]`` included.

    With ``exact=True`` the entries are read as the decimal numbers they
    print as and multiplied in rational arithmetic, then rounded once.
    Raises :class:`IncompatibleEdgeError` if an edge of ``tau`` has weight 0.
    """
    factors = _weight_factors(np.asarray(M, dtype=float), np.asarray(C, dtype=float), tau)
    if exact:
        return float(_exact_weight(factors))
    return float(math.prod(factors))


def _exact_weight(factors):
    return math.prod((_decimal(f) for f in factors), start=Fraction(1))


def _check_unit_diagonal(M):
    if not np.all(np.diag(M) == -1.0):
        raise DiagonalNotMinusOneError("all diagonal drift entries must equal -1")


def trek_coefficient(tau):
    """``2**(-l-1) * binom(l, n)``, the weight of ``tau`` when every m_ii = -1."""
    return math.ldexp(math.comb(tau.l, tau.n), -tau.l - 1)


def trek_term(M, C, tau, exact=False):
    """Contribution ``2**(-l-1) binom(l, n) omega`` of a base trek (all m_ii = -1)."""
    M = np.asarray(M, dtype=float)
    _check_unit_diagonal(M)
    if exact:
        return float(_exact_term(M, C, tau))
    return trek_coefficient(tau) * trek_weight(M, C, tau)


def _exact_term(M, C, tau):
    coef = Fraction(math.comb(tau.l, tau.n), 2 ** (tau.l + 1))
    return coef * _exact_weight(_weight_factors(M, np.asarray(C, dtype=float), tau))


def partial_sum(M, C, i, j, l_max, tol=1e-12, exact=False):
    """Sum of the trek-rule terms over base treks from ``i`` to ``j`` with ``l <= l_max``.

    With unit negative diagonal the terms are :func:`trek_term`; the sum is
    then either correctly rounded from the float terms or, with
    ``exact=True``, evaluated in rational arithmetic and rounded once.
    Otherwise every base trek is weighted by ``2**(-l-1) D(m_11 + 1, ...)``
    with the self-loop coefficient evaluated to tolerance ``tol`` in total.
    """
    M, C = check_pair(M, C)
    treks = enumerate_base_treks(from_matrices(M, C), i, j, l_max)
    if np.all(np.diag(M) == -1.0):
        if exact:
            return float(sum((_exact_term(M, C, t) for t in treks), Fraction(0)))
        return math.fsum(trek_term(M, C, t) for t in treks)
    from .series import d_coefficient

    lambdas = np.diag(M) + 1.0
    each = tol / max(len(treks), 1)
    return math.fsum(
        math.ldexp(d_coefficient(lambdas, t, each), -t.l - 1) * trek_weight(M, C, t) for t in treks
    )


def rho(tau, profile):
    """Number of ways to place the profile's self-loops on the sides of ``tau``.

    A node met ``k`` times on a side can take its ``a`` loops in
    ``binom(a + k - 1, k - 1)`` ways (compositions of ``a`` into ``k``
    parts); a node absent from a side must have no loops there.
    """
    total = 1
    for side, counts in ((tau.left, profile.alpha), (tau.right, profile.beta)):
        occ = _counts(side)
        for node, a in enumerate(counts):
            if a == 0:
                continue
            k = occ.get(node, 0)
            if k == 0:
                return 0
            total *= math.comb(a + k - 1, k - 1)
    return total


def trek_table(M, C, i, j, l_max, exact=True):
    """Rows ``(trek, omega, factors, l, n, term)`` for the unit-diagonal trek rule."""
    M, C = check_pair(M, C)
    _check_unit_diagonal(M)
    rows = []
    for t in enumerate_base_treks(from_matrices(M, C), i, j, l_max):
        i0, j0 = t.top
        # factors in reading order; a unit top weight is left implicit
        edge_w = [M[b, a] for a, b in t.directed_edges()]
        top = [] if C[i0, j0] == 1.0 and edge_w else [C[i0, j0]]
        factors = edge_w[: t.n] + top + edge_w[t.n:]
        rows.append(
            (t, trek_weight(M, C, t, exact), tuple(float(f) for f in factors), t.l, t.n, trek_term(M, C, t, exact))
        )
    return rows
