"""Labeled trees, connected graphs and set partitions on small vertex sets.

These are the combinatorial primitives behind Mayer expansions, Ursell
functions and tree-graph bounds.  Everything is exact and deterministic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

__all__ = [
    "LabeledTree",
    "MAX_TREE_VERTICES",
    "MAX_GRAPH_EDGES",
    "prufer_decode",
    "prufer_encode",
    "labeled_trees",
    "count_labeled_trees",
    "connected_graphs",
    "is_connected",
    "spanning_tree_count",
    "connected_graph_sum",
    "set_partitions",
]

MAX_TREE_VERTICES = 9
MAX_GRAPH_EDGES = 21


@dataclass(frozen=True)
class LabeledTree:
    """A tree on an ordered vertex set; edges are stored as sorted index pairs
    into ``vertices`` and listed in sorted order."""

    vertices: tuple
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        n = len(self.vertices)
        edges = tuple(sorted(tuple(sorted(e)) for e in self.edges))
        object.__setattr__(self, "edges", edges)
        if n == 0:
            raise ValueError("a tree needs at least one vertex")
        if len(edges) != n - 1 or not is_connected(n, edges):
            raise ValueError("edges do not form a spanning tree")

    @property
    def n(self) -> int:
        return len(self.vertices)

    def degree(self, i: int) -> int:
        return sum(i in e for e in self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def leaves(self) -> tuple[int, ...]:
        return tuple(i for i, d in enumerate(self.degrees()) if d == 1)

    def neighbours(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(b if a == i else a for a, b in self.edges if i in (a, b)))

    def labeled_edges(self) -> tuple[tuple, ...]:
        """Edges expressed with vertex labels instead of indices."""
        return tuple((self.vertices[a], self.vertices[b]) for a, b in self.edges)

    def path(self, i: int, j: int) -> tuple[int, ...]:
        """Vertex indices on the unique path from ``i`` to ``j``."""
        prev = {i: None}
        stack = [i]
        while stack:
            u = stack.pop()
            for w in self.neighbours(u):
                if w not in prev:
                    prev[w] = u
                    stack.append(w)
        out = [j]
        while out[-1] != i:
            out.append(prev[out[-1]])
        return tuple(reversed(out))


def _check_tree_size(n: int) -> None:
    if n < 1:
        raise ValueError("need at least one vertex")
    if n > MAX_TREE_VERTICES:
        raise ValueError(f"tree enumeration refused for n={n} > {MAX_TREE_VERTICES}")


def prufer_decode(seq: Sequence[int], n: int) -> tuple[tuple[int, int], ...]:
    """Edges (sorted index pairs) of the tree on ``range(n)`` with Prüfer code ``seq``."""
    if n == 1:
        return ()
    if len(seq) != n - 2:
        raise ValueError("Prüfer code has the wrong length")
    degree = [1] * n
    for s in seq:
        degree[s] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for s in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, s), max(leaf, s)))
        degree[s] -= 1
        if degree[s] == 1:
            heapq.heappush(leaves, s)
    a, b = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((a, b))
    return tuple(sorted(edges))


def prufer_encode(tree: LabeledTree) -> tuple[int, ...]:
    """Inverse of :func:`prufer_decode`."""
    n = tree.n
    if n <= 2:
        return ()
    adj = {i: set() for i in range(n)}
    for a, b in tree.edges:
        adj[a].add(b)
        adj[b].add(a)
    leaves = [i for i in range(n) if len(adj[i]) == 1]
    heapq.heapify(leaves)
    code = []
    for _ in range(n - 2):
        leaf = heapq.heappop(leaves)
        (nb,) = adj[leaf]
        code.append(nb)
        adj[nb].discard(leaf)
        del adj[leaf]
        if len(adj[nb]) == 1:
            heapq.heappush(leaves, nb)
    return tuple(code)


def labeled_trees(vertices: int | Sequence) -> Iterator[LabeledTree]:
    """All ``n^(n-2)`` labeled trees, in lexicographic Prüfer order."""
    verts = tuple(range(vertices)) if isinstance(vertices, int) else tuple(vertices)
    n = len(verts)
    _check_tree_size(n)
    if n == 1:
        yield LabeledTree(verts, ())
        return
    for seq in product(range(n), repeat=n - 2):
        yield LabeledTree(verts, prufer_decode(seq, n))


def count_labeled_trees(n: int) -> int:
    """Cayley's count ``n^(n-2)``."""
    return 1 if n <= 2 else n ** (n - 2)


def is_connected(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            comps -= 1
    return comps == 1


def connected_graphs(n: int, edge_set: Iterable[tuple[int, int]]) -> Iterator[tuple[tuple[int, int], ...]]:
    """Every subset of ``edge_set`` that connects all ``n`` vertices."""
    edges = sorted({tuple(sorted(e)) for e in edge_set})
    if len(edges) > MAX_GRAPH_EDGES:
        raise ValueError(f"connected-graph enumeration refused for {len(edges)} edges")
    if n == 1:
        yield ()
        return
    for k in range(n - 1, len(edges) + 1):
        for sub in combinations(edges, k):
            if is_connected(n, sub):
                yield sub


def spanning_tree_count(n: int, edge_set: Iterable[tuple[int, int]]) -> int:
    """Exact number of spanning trees (matrix-tree theorem, fraction-free Bareiss)."""
    if n == 1:
        return 1
    lap = [[0] * n for _ in range(n)]
    for a, b in {tuple(sorted(e)) for e in edge_set}:
        if a == b:
            continue
        lap[a][b] -= 1
        lap[b][a] -= 1
        lap[a][a] += 1
        lap[b][b] += 1
    m = [row[1:] for row in lap[1:]]
    size = n - 1
    sign = 1
    prev = 1
    for k in range(size - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, size) if m[r][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[size - 1][size - 1]


def connected_graph_sum(n: int, weight: Mapping[tuple[int, int], object] | Callable[[int, int], object], one=1):
    """``sum over connected graphs G on range(n) of prod_{e in G} x_e``.

    Uses the subset recursion ``C(S) = F(S) - sum_{T ni min S, T != S} C(T) F(S \\ T)``
    with ``F(S) = prod_{e subset S} (1 + x_e)``, so it costs ``O(3^n)`` instead of
    enumerating graphs.  ``weight`` may return floats, fractions or mpmath numbers.
    """
    if n < 1:
        raise ValueError("need at least one vertex")
    if n > 16:
        raise ValueError("connected_graph_sum refused for n > 16")
    get = weight if callable(weight) else (lambda i, j: weight.get((i, j), weight.get((j, i), 0)))
    x = {(i, j): get(i, j) for i, j in combinations(range(n), 2)}
    full = (1 << n) - 1
    f = [one] * (full + 1)
    for s in range(1, full + 1):
        low = (s & -s).bit_length() - 1
        rest = s & ~(1 << low)
        val = f[rest]
        r = rest
        while r:
            j = (r & -r).bit_length() - 1
            r &= r - 1
            xe = x[(low, j)]
            if xe:
                val = val * (1 + xe)
        f[s] = val
    c = [0] * (full + 1)
    for s in range(1, full + 1):
        low_bit = s & -s
        acc = f[s]
        rest = s ^ low_bit
        t = rest
        # T ranges over proper subsets of s containing the lowest element
        while True:
            sub = t | low_bit
            if sub != s:
                acc = acc - c[sub] * f[s ^ sub]
            if t == 0:
                break
            t = (t - 1) & rest
        c[s] = acc
    return c[full]


def set_partitions(items: Sequence) -> Iterator[list[tuple]]:
    """All set partitions of ``items`` (blocks keep the input order)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for tail in set_partitions(rest):
        yield [(first,)] + tail
        for i in range(len(tail)):
            yield tail[:i] + [(first,) + tail[i]] + tail[i + 1 :]
