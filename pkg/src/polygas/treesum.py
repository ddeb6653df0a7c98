"""Weighted sums over labeled trees on finite vertex systems.

A vertex system carries a positive vertex weight ``v_beta``, a symmetric edge
weight ``e`` and a notion of global compatibility of tuples (by default: every
pair of entries has ``e != 0``).  The truncated sums

    Wbar_n(w) = 1/(n-m)! * sum_{T on [n]} sum_{v in V^n, v|[m] = w} prod v_beta(v_i) prod_{ij in T} e(v_i, v_j)

and their globally compatible counterparts ``W_n`` (``v`` restricted to
compatible tuples) are evaluated exactly for small ``n``: for a fixed labeling
the sum over trees is a weighted spanning-tree count, i.e. a determinant of the
reduced edge-weight Laplacian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Callable, Hashable, Iterator, Sequence

import numpy as np

from .trees import LabeledTree, labeled_trees, count_labeled_trees

__all__ = [
    "VertexSystem",
    "RestrictedTreeFamily",
    "MAX_TREE_SUM_SIZE",
    "modified_vertex",
    "leaf_pruning",
    "contracting",
    "weighted_tree_sum",
    "tree_sum_local",
    "tree_sum_global",
    "tree_sum_local_graded",
    "tree_sum_global_graded",
    "two_vertex_decomposition",
    "restricted_trees",
    "restricted_tree_count",
    "remove_vertex_expand",
    "toy_system",
    "contour_system",
    "polymer_system",
]

MAX_TREE_SUM_SIZE = 8


@dataclass
class VertexSystem:
    """Finite vertex set with weight families.

    ``vertex_weight(theta, beta) > 0``; ``edge_weight(a, b) >= 0`` symmetric;
    ``global_compat(tuple)`` defines the admissible tuples (default: all pairs
    of entries have nonzero edge weight).
    """

    vertices: tuple
    vertex_weight: Callable[[Hashable, float], float]
    edge_weight: Callable[[Hashable, Hashable], float]
    global_compat: Callable[[tuple], bool] | None = None
    name: str = "system"
    _emat: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.vertices = tuple(self.vertices)
        if not self.vertices:
            raise ValueError("a vertex system needs at least one vertex")
        self.index = {v: i for i, v in enumerate(self.vertices)}
        n = len(self.vertices)
        emat = np.zeros((n, n))
        for i, a in enumerate(self.vertices):
            for j, b in enumerate(self.vertices):
                emat[i, j] = self.edge_weight(a, b)
        if np.any(emat < 0):
            raise ValueError("edge weights must be nonnegative")
        if not np.array_equal(emat, emat.T):
            raise ValueError("edge weights must be symmetric")
        self._emat = emat

    @property
    def size(self) -> int:
        return len(self.vertices)

    def e(self, a, b) -> float:
        return float(self._emat[self.index[a], self.index[b]])

    def v(self, theta, beta: float) -> float:
        val = self.vertex_weight(theta, beta)
        if not val > 0:
            raise ValueError(f"vertex weight of {theta!r} must be positive")
        return val

    def weights(self, beta: float) -> np.ndarray:
        return np.array([self.v(t, beta) for t in self.vertices])

    def pairs_cover(self) -> bool:
        """Every vertex has at least one partner with nonzero edge weight."""
        return bool(np.all(self._emat.sum(axis=1) > 0))

    def compatible(self, labels: Sequence) -> bool:
        if self.global_compat is not None:
            return bool(self.global_compat(tuple(labels)))
        idx = [self.index[x] for x in labels]
        return all(self._emat[a, b] != 0 for a, b in combinations(idx, 2))


# -- vertex operators -------------------------------------------------------------

def modified_vertex(vs: VertexSystem, vertex, beta: float) -> float:
    """``log v_{beta/2} - log v_beta``."""
    return math.log(vs.v(vertex, beta / 2)) - math.log(vs.v(vertex, beta))


def leaf_pruning(vs: VertexSystem, vertex, beta: float) -> float:
    """``sum_theta v_beta(theta) e(theta, vertex)``."""
    return contracting(vs, (vertex,), beta)


def contracting(vs: VertexSystem, targets: Sequence, beta: float) -> float:
    """``sum_theta v_beta(theta) prod_i e(theta, targets_i)``."""
    if len(targets) < 1:
        raise ValueError("contracting needs at least one target")
    w = vs.weights(beta)
    col = np.ones(vs.size)
    for t in targets:
        col = col * vs._emat[:, vs.index[t]]
    return math.fsum((w * col).tolist())


# -- tree sums ---------------------------------------------------------------------

def weighted_tree_sum(weights: np.ndarray) -> float:
    """``sum over spanning trees of the complete graph of prod of edge weights``
    (weighted matrix-tree theorem)."""
    n = weights.shape[0]
    if n == 1:
        return 1.0
    lap = -np.array(weights, dtype=float)
    np.fill_diagonal(lap, 0.0)
    np.fill_diagonal(lap, -lap.sum(axis=1))
    return float(np.linalg.det(lap[1:, 1:]))


def _check_sizes(m: int, n_max: int) -> None:
    if m < 1:
        raise ValueError("need at least one fixed vertex")
    if n_max > MAX_TREE_SUM_SIZE:
        raise ValueError(f"tree sums refused for n_max={n_max} > {MAX_TREE_SUM_SIZE}")


def _labelings(vs: VertexSystem, w: tuple, n: int, global_: bool) -> Iterator[tuple]:
    """Tuples of length ``n`` starting with ``w``; with ``global_`` only admissible ones,
    built incrementally so that incompatible prefixes are pruned."""
    if not global_:
        for tail in product(vs.vertices, repeat=n - len(w)):
            yield w + tail
        return
    if not vs.compatible(w):
        return

    if vs.global_compat is not None:
        for tail in product(vs.vertices, repeat=n - len(w)):
            lab = w + tail
            if vs.compatible(lab):
                yield lab
        return

    emat = vs._emat

    def extend(prefix_idx, prefix):
        if len(prefix) == n:
            yield prefix
            return
        for k, t in enumerate(vs.vertices):
            if all(emat[k, j] != 0 for j in prefix_idx):
                yield from extend(prefix_idx + [k], prefix + (t,))

    yield from extend([vs.index[x] for x in w], w)


def _graded(vs: VertexSystem, w: Sequence, beta: float, n: int, global_: bool) -> float:
    w = tuple(w)
    m = len(w)
    if n < m:
        return 0.0
    vw = {t: vs.v(t, beta) for t in vs.vertices}
    terms = []
    for lab in _labelings(vs, w, n, global_):
        idx = [vs.index[x] for x in lab]
        sub = vs._emat[np.ix_(idx, idx)]
        trees = weighted_tree_sum(sub)
        if trees == 0.0:
            continue
        terms.append(math.prod(vw[x] for x in lab) * trees)
    return math.fsum(terms) / math.factorial(n - m)


def tree_sum_local_graded(vs: VertexSystem, w: Sequence, beta: float, n: int) -> float:
    """Contribution of trees with exactly ``n`` vertices to the locally compatible sum."""
    _check_sizes(len(w), n)
    return _graded(vs, w, beta, n, False)


def tree_sum_global_graded(vs: VertexSystem, w: Sequence, beta: float, n: int) -> float:
    """Contribution of trees with exactly ``n`` vertices to the globally compatible sum."""
    _check_sizes(len(w), n)
    return _graded(vs, w, beta, n, True)


def tree_sum_local(vs: VertexSystem, w: Sequence, beta: float, n_max: int) -> float:
    """Truncated locally compatible tree sum ``sum_{n=m}^{n_max} Wbar_n(w)``."""
    _check_sizes(len(w), n_max)
    return math.fsum(_graded(vs, w, beta, n, False) for n in range(len(w), n_max + 1))


def tree_sum_global(vs: VertexSystem, w: Sequence, beta: float, n_max: int) -> float:
    """Truncated globally compatible tree sum ``sum_{n=m}^{n_max} W_n(w)``."""
    _check_sizes(len(w), n_max)
    return math.fsum(_graded(vs, w, beta, n, True) for n in range(len(w), n_max + 1))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def two_vertex_decomposition(vs: VertexSystem, w1, w2, beta: float, n: int, global_: bool = False) -> float:
    """Path decomposition of the two-point sum at tree size ``n``.

    Every tree through both fixed vertices is a path between them with subtrees
    hanging from each path vertex; summing the hanging subtrees gives

        sum_{paths theta_1..theta_k} sum_{n_1+..+n_k = n} prod_i W_{n_i}(theta_i) prod e(theta_i, theta_{i+1}).

    For locally compatible sums this equals ``tree_sum_local_graded(vs, (w1, w2), beta, n)``;
    for globally compatible sums (``global_=True``) it is an upper bound.
    """
    _check_sizes(2, n)
    one = {}

    def single(theta, k):
        key = (theta, k)
        if key not in one:
            one[key] = _graded(vs, (theta,), beta, k, global_)
        return one[key]

    terms = []
    for k in range(2, n + 1):
        for inner in product(vs.vertices, repeat=k - 2):
            path = (w1,) + inner + (w2,)
            if global_ and not vs.compatible(path):
                continue
            edge = math.prod(vs.e(path[i], path[i + 1]) for i in range(k - 1))
            if edge == 0:
                continue
            for comp in _compositions(n, k):
                terms.append(edge * math.prod(single(path[i], comp[i]) for i in range(k)))
    return math.fsum(terms)


# -- restricted trees ---------------------------------------------------------------

@dataclass(frozen=True)
class RestrictedTreeFamily:
    """Trees on ``n`` vertices (labels ``1..n``) whose leaves lie in ``1..m`` and
    whose other vertices have degree at least 3."""

    n: int
    m: int
    trees: tuple[LabeledTree, ...]

    def __len__(self):
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)


def restricted_tree_count(n: int, m: int) -> int:
    """Exact size of the family, counted through Prüfer codes.

    A vertex's degree is one plus its multiplicity in the code, so vertices
    ``m+1..n`` must occur at least twice among the ``n-2`` code letters while
    ``1..m`` are unconstrained.
    """
    if m < 1 or n < m:
        raise ValueError("need 1 <= m <= n")
    if n == 1:
        return 1
    if n == 2:
        return 1 if m >= 2 else 0
    length = n - 2
    # ways[j] = number of words of length j over the constrained letters in which
    # each of them occurs at least twice (exponential generating functions)
    constrained = n - m

    @lru_cache(maxsize=None)
    def words(letters: int, slots: int) -> int:
        if letters == 0:
            return 1 if slots == 0 else 0
        total = 0
        for c in range(2, slots + 1):
            total += math.comb(slots, c) * words(letters - 1, slots - c)
        return total

    total = 0
    for used in range(0, length + 1):
        total += math.comb(length, used) * words(constrained, used) * m ** (length - used)
    return total


def restricted_trees(n: int, m: int) -> RestrictedTreeFamily:
    """Enumerate the family by generating admissible Prüfer codes."""
    if m < 2:
        raise ValueError("restricted trees need m >= 2")
    if n < m:
        raise ValueError("need n >= m")
    if n > 12:
        raise ValueError("restricted tree enumeration refused for n > 12")
    from .trees import prufer_decode

    verts = tuple(range(1, n + 1))
    if n == 2:
        return RestrictedTreeFamily(n, m, (LabeledTree(verts, ((0, 1),)),))
    length = n - 2
    need = [0] * m + [2] * (n - m)
    out = []
    code = []

    def rec(counts):
        remaining = length - len(code)
        deficit = sum(max(0, need[i] - counts[i]) for i in range(n))
        if deficit > remaining:
            return
        if remaining == 0:
            out.append(LabeledTree(verts, prufer_decode(code, n)))
            return
        for letter in range(n):
            code.append(letter)
            counts[letter] += 1
            rec(counts)
            counts[letter] -= 1
            code.pop()

    rec([0] * n)
    return RestrictedTreeFamily(n, m, tuple(out))


def remove_vertex_expand(tree: LabeledTree, vertex, perms: Sequence[Sequence[int]] | None = None) -> list[LabeledTree]:
    """Remove ``vertex`` and reconnect its neighbours along a path.

    For each ordering ``phi`` of the neighbour list the star at ``vertex`` is
    replaced by the path ``nb[phi(1)] - nb[phi(2)] - ...``.  All orderings are
    used when ``perms`` is omitted; an ordering and its reversal give the same
    tree.  The result lives on the remaining vertex labels.
    """
    vi = tree.vertices.index(vertex)
    nbrs = tree.neighbours(vi)
    keep = [i for i in range(tree.n) if i != vi]
    relabel = {old: new for new, old in enumerate(keep)}
    base = [(relabel[a], relabel[b]) for a, b in tree.edges if vi not in (a, b)]
    new_vertices = tuple(tree.vertices[i] for i in keep)
    orders = list(perms) if perms is not None else list(permutations(range(len(nbrs))))
    out = []
    for phi in orders:
        seq = [relabel[nbrs[k]] for k in phi]
        path = [(seq[j], seq[j + 1]) for j in range(len(seq) - 1)]
        out.append(LabeledTree(new_vertices, tuple(base + path)))
    return out


# -- fixtures -------------------------------------------------------------------------

def toy_system(kind: str = "triangle") -> VertexSystem:
    """Small hand-weighted systems for identity checks.

    ``triangle``: three vertices, all pairs connected.  ``path``: three vertices
    with the end pair disconnected (so global compatibility bites).  ``square``:
    four vertices on a cycle with one chord.
    """
    if kind == "triangle":
        verts = ("a", "b", "c")
        energy = {"a": 1.0, "b": 1.5, "c": 2.5}
        edges = {("a", "b"): 0.7, ("a", "c"): 0.3, ("b", "c"): 1.1}
    elif kind == "path":
        verts = ("a", "b", "c")
        energy = {"a": 1.2, "b": 0.8, "c": 2.0}
        edges = {("a", "b"): 0.9, ("b", "c"): 0.4}
    elif kind == "square":
        verts = ("a", "b", "c", "d")
        energy = {"a": 1.0, "b": 1.3, "c": 1.7, "d": 2.2}
        edges = {("a", "b"): 0.5, ("b", "c"): 0.8, ("c", "d"): 0.6, ("d", "a"): 0.4, ("a", "c"): 0.2}
    else:
        raise ValueError(f"unknown toy system {kind!r}")

    def ew(x, y):
        return edges.get((x, y), edges.get((y, x), 0.0))

    return VertexSystem(verts, lambda t, beta: math.exp(-beta * energy[t]), ew, name=f"toy-{kind}")


def contour_system(params, contours: Sequence) -> VertexSystem:
    """Contours with ``v_beta = exp(-beta H)`` and ``e = Phi * 1[positively compatible]``."""
    from .contour import is_positively_compatible
    from .lattice import interior_energy, phi

    cs = tuple(contours)
    alpha = float(params.alpha)
    energies = {c: interior_energy(tuple(c.interior), alpha) for c in cs}

    def ew(a, b):
        if a == b or not is_positively_compatible(a, b, params):
            return 0.0
        return phi(a.interior, b.interior, alpha)

    return VertexSystem(cs, lambda c, beta: math.exp(-beta * energies[c]), ew, name="contours")


def polymer_system(params, polymers: Sequence) -> VertexSystem:
    """Polymers with ``v_beta`` the upper activity at ``beta`` and ``e = 1[incompatible]``."""
    from .polymer import polymer_compatible, upper_activity

    ps = tuple(polymers)

    def ew(a, b):
        return 0.0 if polymer_compatible(a, b, params) else 1.0

    return VertexSystem(ps, lambda p, beta: float(upper_activity(p, params.replace(beta=beta))), ew,
                        name="polymers")
