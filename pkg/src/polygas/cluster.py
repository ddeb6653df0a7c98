"""Ursell functions, the Penrose tree-graph bound and the truncated log-Z series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement
from typing import Iterable, Sequence

from . import _num
from .contour import PeierlsSum, peierls_sum
from .lattice import ModelParams
from .polymer import Polymer, activity, polymer_compatible, positive_polymers
from .trees import (
    LabeledTree,
    connected_graph_sum,
    connected_graphs,
    is_connected,
    labeled_trees,
    spanning_tree_count,
)

__all__ = [
    "ClusterTuple",
    "TruncatedSeries",
    "MAX_CLUSTER_SIZE",
    "ursell",
    "ursell_by_graphs",
    "penrose_bound",
    "truncated_log_z",
    "peierls_sum",
    "PeierlsSum",
    "labeled_trees",
    "connected_graphs",
    "LabeledTree",
]

MAX_CLUSTER_SIZE = 12


@dataclass(frozen=True)
class ClusterTuple:
    """An ordered tuple of polymers (or abstract labels) with its incompatibility graph."""

    polymers: tuple
    incompat_edges: frozenset

    def __post_init__(self):
        n = len(self.polymers)
        edges = frozenset(tuple(sorted(e)) for e in self.incompat_edges)
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise ValueError(f"bad edge {(a, b)} for {n} vertices")
        object.__setattr__(self, "incompat_edges", edges)

    @property
    def n(self) -> int:
        return len(self.polymers)

    @classmethod
    def from_graph(cls, n: int, edges: Iterable[tuple[int, int]]) -> "ClusterTuple":
        """Abstract tuple of ``n`` labels with the given incompatibility edges."""
        return cls(tuple(range(n)), frozenset(edges))

    @classmethod
    def from_polymers(cls, polymers: Sequence[Polymer], params: ModelParams) -> "ClusterTuple":
        """Incompatibility edges from polymer compatibility; a repeated polymer is
        incompatible with itself."""
        ps = tuple(polymers)
        edges = {
            (i, j)
            for i, j in combinations(range(len(ps)), 2)
            if ps[i] == ps[j] or not polymer_compatible(ps[i], ps[j], params)
        }
        return cls(ps, frozenset(edges))


@dataclass
class TruncatedSeries:
    """Per-order contributions ``terms[k-1] = S_k`` and cumulative ``partial_sums``."""

    order: int
    terms: list
    partial_sums: list = field(default_factory=list)

    def __post_init__(self):
        if not self.partial_sums:
            acc = []
            run = 0
            for t in self.terms:
                run = run + t
                acc.append(run)
            self.partial_sums = acc

    def errors(self, exact) -> list:
        return [abs(s - exact) for s in self.partial_sums]


def _check_size(n: int) -> None:
    if n < 1:
        raise ValueError("a cluster has at least one member")
    if n > MAX_CLUSTER_SIZE:
        raise ValueError(f"Ursell evaluation refused for n={n} > {MAX_CLUSTER_SIZE}")


def ursell(ct: ClusterTuple) -> int:
    """``sum over connected G on [n] with E(G) inside the incompatibility graph of (-1)^|E(G)|``."""
    _check_size(ct.n)
    if ct.n == 1:
        return 1
    if not is_connected(ct.n, ct.incompat_edges):
        return 0
    return int(connected_graph_sum(ct.n, {e: -1 for e in ct.incompat_edges}))


def ursell_by_graphs(ct: ClusterTuple) -> int:
    """Same value by explicit enumeration of connected subgraphs (small ``n``)."""
    return sum((-1) ** len(g) for g in connected_graphs(ct.n, ct.incompat_edges))


def penrose_bound(ct: ClusterTuple) -> int:
    """Number of spanning trees of the incompatibility graph; bounds ``|ursell|``."""
    _check_size(ct.n)
    return spanning_tree_count(ct.n, ct.incompat_edges)


def truncated_log_z(params: ModelParams, order: int, polymers: Sequence[Polymer] | None = None) -> TruncatedSeries:
    """Truncated cluster expansion of ``log Z`` up to ``order`` polymers.

    ``S_n = (1/n!) sum over n-tuples of phi_n * prod z`` is evaluated over
    multisets: a multiset with multiplicities ``m_i`` stands for ``n!/prod m_i!``
    tuples with the same Ursell value.  With ``params.dps`` set, activities and
    sums are carried in mpmath at that precision.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if order > 6:
        raise ValueError("truncated_log_z refused for order > 6")
    with _num.precision(params.dps):
        polys = list(polymers) if polymers is not None else positive_polymers(params)
        z = [activity(p, params).value for p in polys]
        n_p = len(polys)
        incompat = [[True] * n_p for _ in range(n_p)]
        for i, j in combinations(range(n_p), 2):
            bad = not polymer_compatible(polys[i], polys[j], params)
            incompat[i][j] = incompat[j][i] = bad
        terms = []
        for n in range(1, order + 1):
            vals = []
            for combo in combinations_with_replacement(range(n_p), n):
                edges = {(a, b) for a, b in combinations(range(n), 2) if incompat[combo[a]][combo[b]]}
                if n > 1 and not is_connected(n, edges):
                    continue
                phi_n = 1 if n == 1 else int(connected_graph_sum(n, {e: -1 for e in edges}))
                if phi_n == 0:
                    continue
                mult = 1
                for k in set(combo):
                    mult *= math.factorial(combo.count(k))
                vals.append(_num.prod([z[k] for k in combo]) * phi_n / mult)
            terms.append(_num.fsum(vals) if vals else _num.lift(0, params.dps))
        return TruncatedSeries(order, terms)
