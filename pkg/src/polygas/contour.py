"""M-contours: the unique M-partition, compatibility relations, nesting.

Two flip sets ``P, Q`` are *compatible* when

    dist(P, Q) > M * min(diam P, diam Q) ** a

with ``dist`` the distance between bond sets and ``diam`` the bond span.  A
contour is an irreducible flip set: every nontrivial split of it into
even-sized parts has two parts that are *not* compatible.  Every nonempty
configuration has a unique partition into pairwise compatible contours (its
M-partition).

Computing the M-partition
-------------------------
Pairing consecutive flips and merging close pairs does not work for nested
geometry: a contour may own the outer flips of a region while a different
contour owns flips in between, so the consecutive pair (b1, b2) can straddle
two contours.  Instead we use two facts:

* if two blocks of a refinement of an admissible partition (even parts,
  pairwise compatible) are not compatible with each other, they lie in the
  same part -- distances can only shrink and diameters only grow when blocks
  are enlarged;
* every admissible partition is coarser than the M-partition, which is
  therefore the admissible partition with the largest number of parts.

So we start from singleton flips, merge incompatible blocks to a fixpoint,
and branch on which odd block the first odd block is paired with.  A
branch-and-bound search keeps the admissible leaf with most parts.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from . import _num
from .lattice import ModelParams, SiteSet, SpinFlipConfig, interior_energy, phi, total_energy

__all__ = [
    "Contour",
    "ContourCollection",
    "HypothesisReport",
    "MAX_IRREDUCIBLE_FLIPS",
    "dist_dual",
    "is_compatible",
    "is_positively_compatible",
    "precedes",
    "m_partition",
    "is_irreducible",
    "even_partitions",
    "external_contours",
    "interior_collection",
    "iota",
    "collection_interior",
    "collection_energy",
    "energy_decomposition_check",
    "enumerate_contours",
    "contour_classes",
    "cover_size",
    "verify_hypotheses",
    "energy_sandwich_violations",
    "PeierlsSum",
    "peierls_sum",
]

MAX_IRREDUCIBLE_FLIPS = 12
MAX_ENUM_DIAM = 22


class Contour(SpinFlipConfig):
    """A spin-flip set that is M-irreducible for the parameters it was built with."""


@dataclass(frozen=True)
class ContourCollection:
    """A set of contours, kept in canonical (sorted) order.

    ``kind`` is ``"m_partition"`` (pairwise compatible), ``"positive"``
    (pairwise positively compatible) or ``"unchecked"``.
    """

    contours: tuple[Contour, ...]
    kind: str = "unchecked"

    def __post_init__(self):
        if self.kind not in ("m_partition", "positive", "unchecked"):
            raise ValueError(f"unknown collection kind {self.kind!r}")
        object.__setattr__(self, "contours", tuple(sorted(self.contours)))

    def __iter__(self):
        return iter(self.contours)

    def __len__(self):
        return len(self.contours)

    def __contains__(self, item):
        return item in self.contours

    @property
    def flips(self) -> SpinFlipConfig:
        if not self.contours:
            return SpinFlipConfig(())
        return self.contours[0].union(*self.contours[1:])

    @property
    def interior(self) -> SiteSet:
        return collection_interior(self.contours)


# -- distances and relations --------------------------------------------------

def _bonds(x) -> tuple[int, ...]:
    return x.bonds if isinstance(x, SpinFlipConfig) else tuple(x)


def _min_gap(a: Sequence[int], b: Sequence[int]) -> int:
    """Minimum |x - y| over sorted doubled-bond sequences (merge scan)."""
    i = j = 0
    best = None
    while i < len(a) and j < len(b):
        d = a[i] - b[j]
        if d == 0:
            return 0
        ad = -d if d < 0 else d
        if best is None or ad < best:
            best = ad
        if d < 0:
            i += 1
        else:
            j += 1
    return best


def dist_dual(a, b) -> int:
    """Distance between two nonempty bond sets (bonds at half-integers)."""
    ba, bb = _bonds(a), _bonds(b)
    if not ba or not bb:
        raise ValueError("dist_dual needs nonempty bond sets")
    return _min_gap(ba, bb) // 2


def _diam(b: Sequence[int]) -> int:
    return (b[-1] - b[0]) // 2


def _close(a: Sequence[int], b: Sequence[int], m: float, expo: float) -> bool:
    """True when the two doubled bond blocks are *not* compatible."""
    d = _min_gap(a, b) // 2
    return d <= m * min(_diam(a), _diam(b)) ** expo


def is_compatible(g1, g2, params: ModelParams) -> bool:
    """``dist(g1, g2) > M * min(diam)^a``; a contour is never compatible with itself."""
    b1, b2 = _bonds(g1), _bonds(g2)
    if b1 == b2:
        return False
    # flip sets sharing a bond are at distance 0 and hence never compatible
    return not _close(b1, b2, params.m_param, params.dist_exponent)


def is_positively_compatible(g1, g2, params: ModelParams) -> bool:
    """Compatible and with disjoint minus-interiors."""
    if not is_compatible(g1, g2, params):
        return False
    return not (set(g1.interior) & set(g2.interior))


def precedes(g1, g2) -> bool:
    """Nesting order: ``I_-(g1)`` is contained in ``I_-(g2)``."""
    return set(g1.interior) <= set(g2.interior)


# -- M-partition --------------------------------------------------------------

def _closure(blocks: list[tuple[int, ...]], m: float, expo: float, rng: random.Random | None,
             dirty: list[tuple[int, ...]] | None = None):
    """Merge non-compatible blocks until all pairs are compatible.

    ``dirty`` lists the blocks that may be close to others; when omitted every
    block is checked.  Blocks outside ``dirty`` are assumed pairwise compatible.
    """
    blocks = list(blocks)
    work = list(blocks if dirty is None else dirty)
    if rng is not None:
        rng.shuffle(work)
    while work:
        b = work.pop()
        if b not in blocks:
            continue
        others = [o for o in blocks if o != b]
        if rng is not None:
            rng.shuffle(others)
        for o in others:
            if _close(b, o, m, expo):
                merged = tuple(sorted(b + o))
                blocks = [x for x in blocks if x != b and x != o] + [merged]
                work.append(merged)
                break
    return blocks


def _finest_admissible(bonds: tuple[int, ...], m: float, expo: float, seed: int | None):
    rng = random.Random(seed) if seed is not None else None
    best: list = [None]
    seen: set = set()

    def search(blocks, dirty):
        blocks = _closure(blocks, m, expo, rng, dirty)
        key = frozenset(blocks)
        if key in seen:
            return
        seen.add(key)
        odd = [b for b in blocks if len(b) % 2]
        even = len(blocks) - len(odd)
        if best[0] is not None and even + len(odd) // 2 <= len(best[0]):
            return  # cannot beat the incumbent
        if not odd:
            best[0] = blocks
            return
        if rng is None:
            pivot = min(odd)
            partners = sorted((b for b in odd if b != pivot), key=lambda b: (_min_gap(pivot, b), b))
        else:
            pivot = rng.choice(odd)
            partners = [b for b in odd if b != pivot]
            rng.shuffle(partners)
        rest = [b for b in blocks if b != pivot]
        for q in partners:
            merged = tuple(sorted(pivot + q))
            search([b for b in rest if b != q] + [merged], [merged])

    search([(b,) for b in bonds], None)
    return best[0]


@lru_cache(maxsize=1 << 18)
def _m_partition_normalised(norm: tuple[int, ...], m: float, expo: float) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(_finest_admissible(norm, m, expo, None)))


def _m_partition_cached(bonds: tuple[int, ...], m: float, expo: float) -> tuple[tuple[int, ...], ...]:
    # compatibility only sees bond differences, so results are cached per
    # translation class (leftmost bond moved to -1/2, an even shift)
    shift = bonds[0] + 1
    parts = _m_partition_normalised(tuple(b - shift for b in bonds), m, expo)
    return tuple(tuple(b + shift for b in p) for p in parts)


def m_partition(cfg: SpinFlipConfig, params: ModelParams, order_seed: int | None = None) -> ContourCollection:
    """The unique M-partition of a nonempty configuration.

    ``order_seed`` randomises the order in which merges and branches are
    explored (used to test that the result does not depend on it).
    """
    bonds = _bonds(cfg)
    if not bonds:
        raise ValueError("the empty configuration has no M-partition")
    m, expo = float(params.m_param), float(params.dist_exponent)
    if order_seed is None:
        parts = _m_partition_cached(tuple(bonds), m, expo)
    else:
        parts = _finest_admissible(tuple(bonds), m, expo, order_seed)
    return ContourCollection(tuple(Contour(tuple(sorted(p))) for p in parts), "m_partition")


def even_partitions(items: Sequence) -> Iterator[list[tuple]]:
    """All set partitions of ``items`` into blocks of even size."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k in range(1, len(rest) + 1, 2):
        for comp in combinations(range(len(rest)), k):
            block = (first,) + tuple(rest[i] for i in comp)
            remaining = [rest[i] for i in range(len(rest)) if i not in comp]
            for tail in even_partitions(remaining):
                yield [block] + tail


def is_irreducible(cfg: SpinFlipConfig, params: ModelParams) -> bool:
    """Exhaustive irreducibility test over all nontrivial even partitions.

    Refuses configurations with more than 12 flips.
    """
    bonds = _bonds(cfg)
    if not bonds or len(bonds) % 2:
        raise ValueError("irreducibility needs a nonempty even flip set")
    if len(bonds) > MAX_IRREDUCIBLE_FLIPS:
        raise ValueError(f"exhaustive irreducibility refused for {len(bonds)} > {MAX_IRREDUCIBLE_FLIPS} flips")
    m, expo = float(params.m_param), float(params.dist_exponent)
    for part in even_partitions(bonds):
        if len(part) == 1:
            continue
        if not any(_close(p, q, m, expo) for p, q in combinations(part, 2)):
            return False
    return True


# -- nesting structure ---------------------------------------------------------

def collection_interior(contours: Iterable[SpinFlipConfig]) -> SiteSet:
    """Minus-interior of the union of flip sets (symmetric difference of interiors)."""
    acc: set[int] = set()
    for g in contours:
        acc ^= set(g.interior)
    return SiteSet(acc)


def collection_energy(contours: Iterable[SpinFlipConfig], params: ModelParams):
    """``H_h`` of the union of the given flip sets."""
    return total_energy(collection_interior(contours), params)


def external_contours(gamma_set: ContourCollection, params: ModelParams | None = None) -> ContourCollection:
    """Contours not strictly inside another one: every other contour is nested in
    them or positively compatible with them."""
    cs = list(gamma_set)
    ints = [set(g.interior) for g in cs]
    out = []
    for i, g in enumerate(cs):
        ok = True
        for j, h in enumerate(cs):
            if i == j:
                continue
            nested = ints[j] <= ints[i]
            disjoint = not (ints[i] & ints[j])
            if not (nested or disjoint):
                ok = False
                break
        if ok:
            out.append(g)
    return ContourCollection(tuple(out), "positive")


def interior_collection(gamma0: SpinFlipConfig, gamma_set: Iterable[SpinFlipConfig], params: ModelParams) -> ContourCollection:
    """Contours of ``gamma_set`` compatible with and nested inside ``gamma0``."""
    i0 = set(gamma0.interior)
    out = [g for g in gamma_set if g != gamma0 and set(g.interior) <= i0 and is_compatible(g, gamma0, params)]
    return ContourCollection(tuple(out), "m_partition")


def iota(gamma0: SpinFlipConfig, gamma_set: Iterable[SpinFlipConfig], params: ModelParams) -> ContourCollection:
    """``gamma0`` together with its interior collection."""
    inner = interior_collection(gamma0, gamma_set, params)
    return ContourCollection((Contour(gamma0.bonds),) + inner.contours, "m_partition")


def energy_decomposition_check(gamma_set: ContourCollection, params: ModelParams):
    """Residual of splitting ``H(Gamma)`` over external contours and their interiors.

    Returns ``|H(Gamma) - [sum_ext H(iota_g) - sum_{pairs} Phi(I(iota_g), I(iota_g'))]|``.
    """
    ext = list(external_contours(gamma_set))
    whole = collection_energy(gamma_set, params)
    parts = [iota(g, gamma_set, params) for g in ext]
    inter = [collection_interior(p) for p in parts]
    energies = [collection_energy(p, params) for p in parts]
    cross = [phi(inter[i], inter[j], params) for i, j in combinations(range(len(parts)), 2)]
    rhs = _num.fsum(energies) - _num.fsum(cross) if cross else _num.fsum(energies)
    return abs(whole - rhs)


# -- enumeration ---------------------------------------------------------------

def _is_single_contour(bonds: tuple[int, ...], params: ModelParams) -> bool:
    if len(bonds) == 2:
        return True
    return len(_m_partition_cached(bonds, float(params.m_param), float(params.dist_exponent))) == 1


def enumerate_contours(params: ModelParams, max_diam: int) -> Iterator[Contour]:
    """Every contour with minus-interior inside the volume and diameter ``<= max_diam``.

    Yields in canonical (sorted by bonds) order.
    """
    if max_diam > MAX_ENUM_DIAM:
        raise ValueError(f"max_diam {max_diam} too large for exhaustive enumeration (limit {MAX_ENUM_DIAM})")
    vol = list(params.volume)
    volset = set(vol)
    found = []
    for lo in vol:
        for hi in vol:
            if hi < lo or hi - lo + 1 > max_diam:
                continue
            middle = [x for x in range(lo + 1, hi) if x in volset]
            for mask in range(1 << len(middle)):
                sites = [lo] + [middle[k] for k in range(len(middle)) if mask >> k & 1]
                if hi != lo:
                    sites.append(hi)
                cfg = SpinFlipConfig.from_interior(sites)
                if _is_single_contour(cfg.bonds, params):
                    found.append(Contour(cfg.bonds))
    found.sort()
    yield from found


def contour_classes(params: ModelParams, max_diam: int) -> list[Contour]:
    """One representative per translation class: interiors inside ``[0, d-1]``
    containing both ends, for every diameter ``d <= max_diam``."""
    if max_diam > MAX_ENUM_DIAM:
        raise ValueError(f"max_diam {max_diam} too large for exhaustive enumeration (limit {MAX_ENUM_DIAM})")
    reps = []
    for d in range(1, max_diam + 1):
        inner = d - 2
        for mask in range(1 << max(inner, 0)):
            sites = [0] + [1 + k for k in range(max(inner, 0)) if mask >> k & 1]
            if d > 1:
                sites.append(d - 1)
            cfg = SpinFlipConfig.from_interior(sites)
            if _is_single_contour(cfg.bonds, params):
                reps.append(Contour(cfg.bonds))
    return reps


def cover_size(g: SpinFlipConfig) -> int:
    """Surrogate cover size ``ceil(1 + log2 diam)``, computed in exact integers."""
    d = g.diam
    if d < 1:
        raise ValueError("cover size needs a nonempty contour")
    return 1 + (d - 1).bit_length()


# -- Peierls sums -----------------------------------------------------------------

@dataclass(frozen=True)
class PeierlsSum:
    """Sum of ``exp(-beta H)`` over contours whose minus-interior contains the origin.

    ``direct`` enumerates those contours one by one; ``class_weighted`` sums
    ``|I_-| exp(-beta H)`` over translation classes; ``class_plain`` drops the
    ``|I_-|`` weight and is a lower bound.
    """

    beta: float
    max_diam: int
    direct: float | None
    class_weighted: float
    class_plain: float
    n_classes: int
    n_contours: int | None

    @property
    def value(self) -> float:
        return self.direct if self.direct is not None else self.class_weighted

    def sandwich_ok(self, rel_tol: float = 1e-13) -> bool:
        """``class_plain <= sum = class_weighted`` (equality up to ``rel_tol``)."""
        ok = self.class_plain <= self.class_weighted
        if self.direct is not None:
            ok = ok and abs(self.direct - self.class_weighted) <= rel_tol * self.class_weighted
        return ok


def _origin_contours(params: ModelParams, max_diam: int) -> Iterator[Contour]:
    """Contours with ``0`` in their minus-interior, scanned window by window."""
    for d in range(1, max_diam + 1):
        for lo in range(-(d - 1), 1):
            hi = lo + d - 1
            inner = list(range(lo + 1, hi))
            for mask in range(1 << len(inner)):
                sites = [lo] + [inner[k] for k in range(len(inner)) if mask >> k & 1]
                if hi != lo:
                    sites.append(hi)
                if 0 not in sites:
                    continue
                cfg = SpinFlipConfig.from_interior(sites)
                if _is_single_contour(cfg.bonds, params):
                    yield Contour(cfg.bonds)


def peierls_sum(params: ModelParams, beta: float, max_diam: int, direct: bool | None = None) -> PeierlsSum:
    """Peierls sum over contours through the origin with diameter ``<= max_diam``.

    The translation-class route is always computed; the direct enumeration runs
    when ``direct`` is true (default: when ``max_diam <= 12``).
    """
    p0 = params.replace(field=(), dps=None)
    alpha = float(p0.alpha)
    beta = float(beta)
    reps = contour_classes(p0, max_diam)
    energies = [interior_energy(tuple(g.interior), alpha) for g in reps]
    weighted = math.fsum(len(g.interior) * math.exp(-beta * h) for g, h in zip(reps, energies))
    plain = math.fsum(math.exp(-beta * h) for h in energies)
    if direct is None:
        direct = max_diam <= 12
    d_val = n_c = None
    if direct:
        terms = [math.exp(-beta * interior_energy(tuple(g.interior), alpha)) for g in _origin_contours(p0, max_diam)]
        d_val, n_c = math.fsum(terms), len(terms)
    return PeierlsSum(beta, max_diam, d_val, weighted, plain, len(reps), n_c)


# -- hypotheses ------------------------------------------------------------------

@dataclass
class HypothesisReport:
    """Outcome of the energy / entropy / Peierls sweeps on a finite family."""

    m_param: float
    alpha: float
    max_diam: int
    c0_fit: float
    c1_fit: float
    c2_fit: float
    violations: list[dict] = field(default_factory=list)
    beta_grid: list[float] = field(default_factory=list)
    peierls_sums: dict[float, float] = field(default_factory=dict)
    class_sums: dict[float, float] = field(default_factory=dict)
    n_partitions_checked: int = 0
    n_contour_classes: int = 0
    complete_cover_levels: list[int] = field(default_factory=list)
    min_energy: float = math.inf

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "m_param": self.m_param,
            "alpha": self.alpha,
            "max_diam": self.max_diam,
            "c0_fit": self.c0_fit,
            "c1_fit": self.c1_fit,
            "c2_fit": self.c2_fit,
            "violations": self.violations,
            "beta_grid": list(self.beta_grid),
            "peierls_sums": {repr(b): v for b, v in self.peierls_sums.items()},
            "class_sums": {repr(b): v for b, v in self.class_sums.items()},
            "n_partitions_checked": self.n_partitions_checked,
            "n_contour_classes": self.n_contour_classes,
            "complete_cover_levels": self.complete_cover_levels,
            "min_energy": self.min_energy,
        }


H1_TOL = 1e-12


def energy_sandwich_violations(params: ModelParams, window: int) -> tuple[int, list[dict]]:
    """Check ``H(G\\g) + 7/8 H(g) <= H(G) <= H(G\\g) + H(g)`` for every nonempty
    configuration with minus-interior in ``[0, window-1]`` and every external ``g``.

    Comparisons carry a relative slack of 1e-12 to absorb rounding.
    """
    p0 = params.replace(field=(), dps=None)
    alpha = float(p0.alpha)
    bad: list[dict] = []
    count = 0
    for mask in range(1, 1 << window):
        sites = tuple(k for k in range(window) if mask >> k & 1)
        cfg = SpinFlipConfig.from_interior(sites)
        gam = m_partition(cfg, p0)
        h_all = interior_energy(sites, alpha)
        for g in external_contours(gam):
            rest = [c for c in gam if c != g]
            h_rest = interior_energy(tuple(collection_interior(rest)), alpha)
            h_g = interior_energy(tuple(g.interior), alpha)
            tol = H1_TOL * (1.0 + abs(h_all))
            count += 1
            lower = h_rest + 0.875 * h_g
            upper = h_rest + h_g
            if not (lower <= h_all + tol and h_all <= upper + tol):
                bad.append({
                    "check": "energy_sandwich",
                    "interior": list(sites),
                    "contour": list(g.interior),
                    "H": h_all,
                    "lower": lower,
                    "upper": upper,
                })
    return count, bad


def verify_hypotheses(params: ModelParams, max_diam: int, beta_grid: Sequence[float]) -> HypothesisReport:
    """Sweep the three standing hypotheses on finite contour families.

    * energy sandwich over all configurations inside a window of ``max_diam`` sites;
    * cover-size bounds with the smallest admissible ``c0`` and ``c1``;
    * Peierls sums over contours containing the origin, with the largest ``c2``
      such that each sum is below ``exp(-c2 beta)`` on the grid.
    """
    p0 = params.replace(field=(), dps=None)
    alpha = float(p0.alpha)
    count, violations = energy_sandwich_violations(p0, max_diam)

    reps = contour_classes(p0, max_diam)
    energies = [interior_energy(tuple(g.interior), alpha) for g in reps]
    min_energy = min(energies)
    for g, h in zip(reps, energies):
        if h < 2.0:
            violations.append({"check": "energy_floor", "interior": list(g.interior), "H": h})

    # cover size: N(g) <= c0 H(g) / log 2  ->  c0 >= N log 2 / H
    c0 = max(cover_size(g) * math.log(2) / h for g, h in zip(reps, energies))
    # entropy: #{g containing 0 with N(g) = n} <= 2^(c1 n); only levels whose
    # diameters are all enumerated are counted.
    level_counts: dict[int, int] = {}
    for g in reps:
        n = cover_size(g)
        level_counts[n] = level_counts.get(n, 0) + len(g.interior)
    complete = sorted(n for n in level_counts if n == 1 or 2 ** (n - 1) <= max_diam)
    c1 = max((math.log2(level_counts[n]) / n for n in complete), default=0.0)
    c1 = max(c1, 1e-12)  # c1 must be positive; counts of 1 give log 0

    grid = [float(b) for b in beta_grid]
    sums: dict[float, float] = {}
    class_sums: dict[float, float] = {}
    for b in grid:
        ps = peierls_sum(p0, b, max_diam)
        sums[b] = ps.value
        class_sums[b] = ps.class_plain
        if not ps.sandwich_ok():
            violations.append({
                "check": "class_sum_sandwich",
                "beta": b,
                "direct": ps.direct,
                "class_weighted": ps.class_weighted,
                "class_plain": ps.class_plain,
            })
    ordered = sorted(grid)
    for b1, b2 in zip(ordered, ordered[1:]):
        if not sums[b2] < sums[b1]:
            violations.append({"check": "peierls_monotone", "beta": [b1, b2]})
    c2 = min((-math.log(sums[b]) / b for b in grid if b > 0), default=float("nan"))
    if not c2 > 0:
        violations.append({"check": "peierls_decay", "c2": c2})
    return HypothesisReport(
        m_param=float(p0.m_param),
        alpha=alpha,
        max_diam=max_diam,
        c0_fit=c0,
        c1_fit=c1,
        c2_fit=c2,
        violations=violations,
        beta_grid=grid,
        peierls_sums=sums,
        class_sums=class_sums,
        n_partitions_checked=count,
        n_contour_classes=len(reps),
        complete_cover_levels=complete,
        min_energy=min_energy,
    )
