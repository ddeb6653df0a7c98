"""Independent reference implementations used by the test-suite.

Everything here is written from the definitions with the plainest possible
enumeration, sharing no code paths with the package beyond the basic value
types, so agreement with the package is meaningful.
"""

from __future__ import annotations

import math
from collections import deque
from fractions import Fraction
from itertools import combinations, permutations, product

import mpmath


# -- energies -----------------------------------------------------------------------------

def energy_direct(sites, alpha: float, radius: int = 4000) -> tuple[float, float]:
    """``sum_{x in I, y not in I} 2|x-y|^-alpha`` truncated to ``|y - x| <= radius``.

    Returns ``(value, tail_bound)``; the neglected part lies in ``[0, tail_bound]``
    with ``tail_bound = 2 |I| * 2 * int_radius^inf r^-alpha dr``.
    """
    inside = set(sites)
    total = []
    for x in sites:
        for d in range(1, radius + 1):
            for y in (x - d, x + d):
                if y not in inside:
                    total.append(2.0 * d ** (-alpha))
    tail = 2 * len(sites) * 2 * radius ** (1 - alpha) / (alpha - 1)
    return math.fsum(total), tail


def energy_mp(sites, alpha, dps: int = 40):
    """``4 zeta |I| - 4 sum_{pairs in I} |x-y|^-alpha`` with mpmath's zeta."""
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        z = mpmath.zeta(a)
        pairs = mpmath.fsum(mpmath.mpf(abs(x - y)) ** (-a) for x, y in combinations(sites, 2))
        return 4 * z * len(sites) - 4 * pairs


def log_z_direct(volume, alpha, beta, field=None, dps: int = 40):
    """``log sum_{I subset volume} exp(-beta (H(I) + sum_{x in I} 2 h_x))``."""
    field = field or {}
    with mpmath.workdps(dps):
        terms = []
        vol = list(volume)
        for r in range(len(vol) + 1):
            for sub in combinations(vol, r):
                e = energy_mp(sub, alpha, dps) + sum(2 * mpmath.mpf(field.get(x, 0.0)) for x in sub)
                terms.append(mpmath.exp(-mpmath.mpf(beta) * e))
        return mpmath.log(mpmath.fsum(terms))


def gibbs_states(volume, alpha, beta, dps: int = 40):
    """``[(minus_set, probability)]`` in mpmath."""
    with mpmath.workdps(dps):
        vol = list(volume)
        states = []
        for r in range(len(vol) + 1):
            for sub in combinations(vol, r):
                states.append((frozenset(sub), mpmath.exp(-mpmath.mpf(beta) * energy_mp(sub, alpha, dps))))
        total = mpmath.fsum(w for _, w in states)
        return [(s, w / total) for s, w in states]


# -- contours -----------------------------------------------------------------------------

def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def even_set_partitions(items):
    for p in set_partitions(items):
        if all(len(b) % 2 == 0 for b in p):
            yield p


def _far(a, b, m, expo):
    """Flip sets (half-integer floats) farther apart than ``m * min(diam)^expo``."""
    dist = min(abs(x - y) for x in a for y in b)
    diam = min(max(a) - min(a), max(b) - min(b))
    return dist > m * diam ** expo


def irreducible_by_definition(flips, m=2.0, expo=1.5) -> bool:
    flips = sorted(flips)
    for p in even_set_partitions(flips):
        if len(p) < 2:
            continue
        if all(_far(a, b, m, expo) for a, b in combinations(p, 2)):
            return False
    return True


def m_partition_by_definition(flips, m=2.0, expo=1.5):
    """The unique partition into pairwise far, irreducible even parts (asserted unique)."""
    found = []
    for p in even_set_partitions(sorted(flips)):
        if all(_far(a, b, m, expo) for a, b in combinations(p, 2)) and all(
            irreducible_by_definition(b, m, expo) for b in p
        ):
            found.append(sorted(tuple(sorted(b)) for b in p))
    assert len(found) == 1, f"expected a unique partition, found {len(found)}"
    return found[0]


def interior_of(flips):
    flips = sorted(flips)
    out = []
    for i in range(0, len(flips), 2):
        out.extend(range(int(math.floor(flips[i] + 0.5)), int(math.floor(flips[i + 1] + 0.5))))
    return out


def flips_of(sites):
    s = set(sites)
    return sorted([x - 0.5 for x in s if x - 1 not in s] + [x + 0.5 for x in s if x + 1 not in s])


def contours_by_definition(volume, max_diam, m=2.0, expo=1.5):
    """Irreducible flip sets whose minus-interior lies in ``volume``."""
    vol = sorted(volume)
    out = []
    for r in range(1, len(vol) + 1):
        for sub in combinations(vol, r):
            fl = flips_of(sub)
            if max(fl) - min(fl) <= max_diam and irreducible_by_definition(fl, m, expo):
                out.append(tuple(fl))
    return sorted(out)


# -- graphs and trees -----------------------------------------------------------------------

def connected(n, edges) -> bool:
    if n <= 1:
        return True
    adj = {i: set() for i in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, queue = {0}, deque([0])
    while queue:
        v = queue.popleft()
        for w in adj[v] - seen:
            seen.add(w)
            queue.append(w)
    return len(seen) == n


def spanning_trees(n, allowed=None):
    """Edge sets of spanning trees of the graph ``allowed`` (complete by default) on ``range(n)``."""
    edges = sorted(allowed) if allowed is not None else list(combinations(range(n), 2))
    if n == 1:
        yield ()
        return
    for sub in combinations(edges, n - 1):
        if connected(n, sub):
            yield sub


def ursell_by_subsets(n, edges) -> int:
    edges = sorted(edges)
    total = 0
    for r in range(len(edges) + 1):
        for sub in combinations(edges, r):
            if connected(n, sub):
                total += (-1) ** r
    return total


def restricted_by_filter(n, m):
    """Trees on labels ``1..n`` with leaves in ``1..m`` and others of degree >= 3."""
    out = []
    for t in spanning_trees(n):
        deg = [0] * n
        for a, b in t:
            deg[a] += 1
            deg[b] += 1
        if all((deg[v] == 1 and v < m) or deg[v] >= 3 or (v < m and deg[v] >= 1) for v in range(n)):
            out.append(t)
    return out


# -- tree sums ------------------------------------------------------------------------------

def tree_sum_brute(vs, w, beta, n, global_=False):
    """``1/(n-m)! sum_T sum_{v, v|[m]=w} prod v_beta prod e`` over explicit trees and labelings."""
    m = len(w)
    total = []
    trees = list(spanning_trees(n))
    for tail in product(vs.vertices, repeat=n - m):
        lab = tuple(w) + tail
        if global_ and not all(vs.e(a, b) != 0 for a, b in combinations(lab, 2)):
            continue
        weight = math.prod(vs.v(x, beta) for x in lab)
        for t in trees:
            total.append(weight * math.prod(vs.e(lab[a], lab[b]) for a, b in t))
    return math.fsum(total) / math.factorial(n - m)


def tree_sum_injections(vs, w, beta, n):
    """Same sum through injections: ``sum_phi 1/n! sum_T sum_v prod_l 1[v_phi(l) = w_l] w(T, v)``."""
    m = len(w)
    trees = list(spanning_trees(n))
    total = []
    for lab in product(vs.vertices, repeat=n):
        weight = math.prod(vs.v(x, beta) for x in lab)
        tree_part = math.fsum(math.prod(vs.e(lab[a], lab[b]) for a, b in t) for t in trees)
        if tree_part == 0:
            continue
        hits = sum(1 for phi in permutations(range(n), m) if all(lab[phi[l]] == w[l] for l in range(m)))
        if hits:
            total.append(hits * weight * tree_part)
    return math.fsum(total) / math.factorial(n)


def site_tree_sum_recursive(sites, alpha):
    """Sum over spanning trees grown edge by edge from the first site."""
    sites = list(sites)
    n = len(sites)

    def c(a, b):
        return abs(a - b) ** (-alpha)

    seen = set()

    def grow(tree_edges, reached):
        if len(reached) == n:
            key = frozenset(tree_edges)
            if key in seen:
                return 0.0
            seen.add(key)
            return math.prod(c(sites[a], sites[b]) for a, b in tree_edges)
        total = 0.0
        for a in sorted(reached):
            for b in range(n):
                if b not in reached:
                    total += grow(tree_edges | {(min(a, b), max(a, b))}, reached | {b})
        return total

    return grow(frozenset(), frozenset({0}))
