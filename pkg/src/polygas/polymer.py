"""Polymers (positive collections of contours) and the polymer-gas representation.

A polymer's activity is ``z = Z / Z*`` where

* ``Z(G)`` sums, over every internal decoration of each contour in ``G``, the
  Boltzmann weights of the decorated contours times the connected-graph sum of
  ``exp(beta Phi_e) - 1`` over pairs of decorated contours;
* ``Z*(G)`` is the product over contours of ``1 + sum`` over nonempty internal
  M-partitions of their Boltzmann weights.

An internal decoration of ``g`` is an M-partition all of whose contours are
compatible with ``g`` and nested inside it.  Decorations of distinct contours of
a polymer combine freely: an inner contour of ``g1`` is separated from anything
outside ``I_-(g1)`` by the flips of ``g1`` itself, so it is automatically
compatible with ``g2`` and everything nested in ``g2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterator, Mapping

from . import _num
from .contour import (
    Contour,
    ContourCollection,
    collection_interior,
    external_contours,
    is_compatible,
    is_positively_compatible,
    m_partition,
)
from .lattice import ModelParams, SiteSet, SpinFlipConfig, phi, total_energy
from .trees import connected_graph_sum, connected_graphs, labeled_trees, set_partitions

__all__ = [
    "Polymer",
    "PolymerSet",
    "Activity",
    "MAX_POLYMER_VOLUME",
    "polymer_compatible",
    "coarsest_decomposition",
    "positive_polymers",
    "enumerate_compatible_polymer_sets",
    "internal_partitions",
    "big_z",
    "big_z_star",
    "activity",
    "upper_activity",
    "polymer_partition_function",
    "mayer_expand_check",
]

MAX_POLYMER_VOLUME = 12


@dataclass(frozen=True, order=True)
class Polymer:
    """A nonempty set of pairwise positively compatible contours, canonically sorted."""

    contours: tuple[Contour, ...]

    def __post_init__(self):
        cs = tuple(sorted(Contour(c.bonds) for c in self.contours))
        if not cs:
            raise ValueError("a polymer is nonempty")
        if len(set(cs)) != len(cs):
            raise ValueError("repeated contour in polymer")
        object.__setattr__(self, "contours", cs)

    @classmethod
    def build(cls, contours, params: ModelParams) -> "Polymer":
        """Construct and check pairwise positive compatibility."""
        p = cls(tuple(contours))
        for a, b in combinations(p.contours, 2):
            if not is_positively_compatible(a, b, params):
                raise ValueError(f"contours {a} and {b} are not positively compatible")
        return p

    def __iter__(self):
        return iter(self.contours)

    def __len__(self):
        return len(self.contours)

    @property
    def collection(self) -> ContourCollection:
        return ContourCollection(self.contours, "positive")

    @property
    def interior(self) -> SiteSet:
        return collection_interior(self.contours)

    def __str__(self) -> str:
        return "{" + ", ".join(str(c) for c in self.contours) + "}"


@dataclass(frozen=True)
class PolymerSet:
    """A set of polymers; ``compatible`` records pairwise polymer compatibility."""

    polymers: tuple[Polymer, ...]
    compatible: bool

    def __post_init__(self):
        object.__setattr__(self, "polymers", tuple(sorted(self.polymers)))

    def __iter__(self):
        return iter(self.polymers)

    def __len__(self):
        return len(self.polymers)

    @property
    def contours(self) -> tuple[Contour, ...]:
        return tuple(sorted(c for p in self.polymers for c in p))


@dataclass(frozen=True)
class Activity:
    """``value = numerator / denominator`` with ``numerator = Z`` and ``denominator = Z* >= 1``."""

    value: object
    numerator: object
    denominator: object


# -- compatibility ---------------------------------------------------------------

def _internal_to(inner: Polymer, gamma: Contour, params: ModelParams) -> bool:
    ig = set(gamma.interior)
    return all(set(c.interior) <= ig and c != gamma and is_compatible(c, gamma, params) for c in inner)


def polymer_compatible(p1: Polymer, p2: Polymer, params: ModelParams) -> bool:
    """Positively compatible elementwise, or one polymer internal to a single
    contour of the other; in every case all cross pairs must be compatible."""
    if p1 == p2:
        return False
    if not all(is_compatible(a, b, params) for a in p1 for b in p2):
        return False
    if all(is_positively_compatible(a, b, params) for a in p1 for b in p2):
        return True
    if any(_internal_to(p2, g, params) for g in p1):
        return True
    return any(_internal_to(p1, g, params) for g in p2)


def coarsest_decomposition(gamma_set: ContourCollection, params: ModelParams) -> PolymerSet:
    """The coarsest split of an M-partition into compatible polymers.

    External contours form one polymer; the children of each contour (those
    whose smallest enclosing contour it is) form another.
    """
    cs = list(gamma_set)
    ints = {c: set(c.interior) for c in cs}
    parent: dict[Contour, Contour | None] = {}
    for c in cs:
        containers = [d for d in cs if d != c and ints[c] <= ints[d]]
        parent[c] = min(containers, key=lambda d: (len(ints[d]), d)) if containers else None
    groups: dict[Contour | None, list[Contour]] = {}
    for c in cs:
        groups.setdefault(parent[c], []).append(c)
    return PolymerSet(tuple(Polymer(tuple(g)) for g in groups.values()), True)


# -- enumeration -------------------------------------------------------------------

def _check_volume(params: ModelParams) -> None:
    if len(params.volume) > MAX_POLYMER_VOLUME:
        raise ValueError(f"volume of {len(params.volume)} sites too large for exact polymer enumeration")


def _nonempty_subsets(sites) -> Iterator[tuple[int, ...]]:
    sites = list(sites)
    for mask in range(1, 1 << len(sites)):
        yield tuple(sites[k] for k in range(len(sites)) if mask >> k & 1)


def _m_partitions_in(params: ModelParams) -> Iterator[ContourCollection]:
    for sub in _nonempty_subsets(params.volume):
        yield m_partition(SpinFlipConfig.from_interior(sub), params)


def positive_polymers(params: ModelParams) -> list[Polymer]:
    """Every polymer whose contours have minus-interiors inside the volume.

    A positive collection is the M-partition of its own union, so scanning all
    configurations finds each polymer exactly once.
    """
    _check_volume(params)
    out = []
    for gam in _m_partitions_in(params):
        if len(external_contours(gam)) == len(gam):
            out.append(Polymer(gam.contours))
    return sorted(out)


def enumerate_compatible_polymer_sets(params: ModelParams) -> Iterator[PolymerSet]:
    """Every collection of compatible polymers in the volume, each exactly once:
    the empty set, then all refinements of the coarsest decomposition of every
    M-partition in the volume."""
    _check_volume(params)
    yield PolymerSet((), True)
    for gam in _m_partitions_in(params):
        coarse = coarsest_decomposition(gam, params)
        choices = [list(set_partitions(p.contours)) for p in coarse]
        for pick in product(*choices):
            yield PolymerSet(tuple(Polymer(block) for parts in pick for block in parts), True)


@lru_cache(maxsize=1 << 14)
def _internal_partitions_cached(gamma: Contour, params: ModelParams) -> tuple[ContourCollection, ...]:
    inside = gamma.interior
    out = []
    for sub in _nonempty_subsets(inside):
        cfg = SpinFlipConfig.from_interior(sub)
        if set(cfg.bonds) & set(gamma.bonds):
            continue
        gam = m_partition(cfg, params)
        if all(is_compatible(c, gamma, params) and set(c.interior) <= set(inside) for c in gam):
            out.append(gam)
    return tuple(out)


def internal_partitions(gamma: SpinFlipConfig, params: ModelParams) -> tuple[ContourCollection, ...]:
    """All nonempty M-partitions internal to ``gamma`` (compatible with it and nested in it)."""
    return _internal_partitions_cached(Contour(gamma.bonds), params)


# -- activities -------------------------------------------------------------------

def _boltzmann(sites, params: ModelParams):
    return _num.exp(-params.beta * total_energy(sites, params))


def _decorated_interiors(gamma: Contour, params: ModelParams) -> list[SiteSet]:
    """Minus-interiors of ``gamma`` together with each admissible decoration (including none)."""
    base = set(gamma.interior)
    out = [SiteSet(base)]
    for dec in internal_partitions(gamma, params):
        out.append(SiteSet(base ^ set(dec.interior)))
    return out


def big_z(p: Polymer, params: ModelParams):
    """``Z(p)``: decorated Boltzmann weights times connected-graph sums of Mayer factors."""
    with _num.precision(params.dps):
        beta = params.beta
        options = [_decorated_interiors(g, params) for g in p]
        terms = []
        for pick in product(*options):
            weight = _num.prod([_boltzmann(s, params) for s in pick])
            if len(pick) > 1:
                mayer = {
                    (i, j): _num.expm1(beta * phi(pick[i], pick[j], params))
                    for i, j in combinations(range(len(pick)), 2)
                }
                weight = weight * connected_graph_sum(len(pick), mayer)
            terms.append(weight)
        return _num.fsum(terms)


def _z_star_single(gamma: Contour, params: ModelParams):
    vals = [_num.lift(1, params.dps)]
    for dec in internal_partitions(gamma, params):
        vals.append(_boltzmann(dec.interior, params))
    return _num.fsum(vals)


def big_z_star(p: Polymer, params: ModelParams):
    """``Z*(p) = prod_g [1 + sum_{internal M-partitions D of g} exp(-beta H_h(D))]``."""
    with _num.precision(params.dps):
        return _num.prod([_z_star_single(g, params) for g in p])


def activity(p: Polymer, params: ModelParams) -> Activity:
    with _num.precision(params.dps):
        num = big_z(p, params)
        den = big_z_star(p, params)
        return Activity(num / den, num, den)


def upper_activity(p: Polymer, params: ModelParams):
    """``prod_g exp(-beta H(g)/2) * sum over spanning trees of prod Phi(e)``,
    times ``exp(beta E_|h|)`` when a field is present."""
    with _num.precision(params.dps):
        beta = params.beta
        cs = list(p)
        p0 = params.replace(field=())
        weight = _num.prod([_num.exp(-beta * total_energy(c.interior, p0) / 2) for c in cs])
        if len(cs) > 1:
            ints = [c.interior for c in cs]
            tree_sum = _num.fsum(
                _num.prod([phi(ints[a], ints[b], params) for a, b in t.edges]) for t in labeled_trees(len(cs))
            )
            weight = weight * tree_sum
        if params.field:
            h = params.field_map
            e_abs = _num.fsum([2 * abs(_num.lift(h[x], params.dps)) for c in cs for x in c.interior if x in h])
            weight = weight * _num.exp(beta * e_abs)
        return weight


# -- the polymer gas ----------------------------------------------------------------

def polymer_partition_function(params: ModelParams):
    """``sum over compatible polymer collections X of prod_{P in X} z(P)``.

    The collections are grouped by the M-partition they represent: for each
    M-partition the refinements of its coarsest decomposition factor into
    independent set partitions of each coarse polymer.
    """
    _check_volume(params)
    with _num.precision(params.dps):
        cache: dict[Polymer, object] = {}

        def z(poly: Polymer):
            if poly not in cache:
                cache[poly] = activity(poly, params).value
            return cache[poly]

        total = [_num.lift(1, params.dps)]
        for gam in _m_partitions_in(params):
            factors = []
            for coarse in coarsest_decomposition(gam, params):
                blocks = _num.fsum(
                    _num.prod([z(Polymer(b)) for b in parts]) for parts in set_partitions(coarse.contours)
                )
                factors.append(blocks)
            total.append(_num.prod(factors))
        return _num.fsum(total)


def mayer_expand_check(weights: Mapping[tuple, float], vertices=None) -> float:
    """Relative residual of ``prod_e (1 + x_e) = sum_P prod_Q sum_{G conn. on Q} prod x_e``.

    ``weights`` maps unordered pairs of vertex labels to ``x_e``; missing pairs
    count as zero.  Connected graphs are enumerated explicitly (at most 7 vertices).
    """
    verts = sorted(vertices) if vertices is not None else sorted({v for e in weights for v in e})
    n = len(verts)
    if n > 7:
        raise ValueError("mayer_expand_check refused for more than 7 vertices")
    idx = {v: i for i, v in enumerate(verts)}
    x = {}
    for (a, b), val in weights.items():
        i, j = sorted((idx[a], idx[b]))
        x[(i, j)] = val
    lhs = _num.prod([1 + x.get(e, 0) for e in combinations(range(n), 2)])
    rhs_terms = []
    for part in set_partitions(range(n)):
        blk = []
        for q in part:
            local = {(a, b) for a, b in combinations(range(len(q)), 2)}
            s = _num.fsum(
                _num.prod([x.get((q[a], q[b]), 0) for a, b in g]) for g in connected_graphs(len(q), local)
            )
            blk.append(s)
        rhs_terms.append(_num.prod(blk))
    rhs = _num.fsum(rhs_terms)
    return abs(lhs - rhs) / max(abs(lhs), 1e-300)
