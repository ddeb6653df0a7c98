"""Site-level estimates for the long-range chain.

The kernel ``C(x, y) = |x - y|^-alpha`` (and ``C(x, x) = 1``) turns
contour-level bounds into bounds on lattice sites.  This module evaluates the
chain inequalities for ``C``, the distance detector for incompatible contour
pairs, the contour-to-site inequalities, and the tree sums over sites that
form the right-hand side of the many-point correlation bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Sequence

import mpmath
import numpy as np

from .contour import Contour, dist_dual, is_compatible, is_positively_compatible
from .lattice import ModelParams, SiteSet, SpinFlipConfig, interior_energy, phi
from .trees import labeled_trees
from .zeta import zeta

__all__ = [
    "SiteKernel",
    "CorrelationBoundReport",
    "MAX_CHAIN_LENGTH",
    "MAX_SUMMED_CHAIN_LENGTH",
    "MAX_TREE_SITES",
    "kernel",
    "chain_bound_check",
    "summed_chain_bound_check",
    "interior_distance",
    "detector_set_member",
    "detector_witness",
    "contour_point_bounds_check",
    "site_tree_sum",
    "correlation_bound_report",
    "SweepResult",
    "chain_bound_sweep",
    "summed_chain_bound_sweep",
    "detector_witness_sweep",
    "contour_point_sweep",
]

MAX_CHAIN_LENGTH = 5
MAX_SUMMED_CHAIN_LENGTH = 4
MAX_TREE_SITES = 7
SUM_RADIUS = 4096


@dataclass(frozen=True)
class SiteKernel:
    """``C(x, y)``: 1 on the diagonal, ``|x - y|^-alpha`` otherwise."""

    alpha: float

    def __post_init__(self):
        if not (1.0 < self.alpha <= 2.0):
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")

    def __call__(self, x: int, y: int) -> float:
        d = abs(int(x) - int(y))
        return 1.0 if d == 0 else float(d) ** (-self.alpha)


def kernel(x: int, y: int, alpha: float) -> float:
    return SiteKernel(alpha)(x, y)


def _chain_sum(xs: Sequence[int], c: SiteKernel, end: int | None) -> float:
    """``sum_phi [C(x_phi(k), end)] prod_i C(x_phi(i), x_phi(i+1))`` over all orderings."""
    terms = []
    for order in permutations(range(len(xs))):
        val = math.prod(c(xs[order[i]], xs[order[i + 1]]) for i in range(len(xs) - 1))
        if end is not None:
            val *= c(xs[order[-1]], end)
        terms.append(val)
    return math.fsum(terms)


def chain_bound_check(xs: Sequence[int], y: int, alpha: float) -> tuple[float, float]:
    """``(prod_i C(x_i, y), 4^(alpha k) sum_phi C(x_phi(k), y) prod C(x_phi(i), x_phi(i+1)))``."""
    k = len(xs)
    if not 2 <= k <= MAX_CHAIN_LENGTH:
        raise ValueError(f"chain length must lie in [2, {MAX_CHAIN_LENGTH}], got {k}")
    c = SiteKernel(alpha)
    lhs = math.prod(c(x, y) for x in xs)
    rhs = 4.0 ** (alpha * k) * _chain_sum(xs, c, y)
    return lhs, rhs


def summed_chain_bound_check(xs: Sequence[int], alpha: float, radius: int = SUM_RADIUS) -> tuple[float, float]:
    """``(sum_y prod_i C(x_i, y), 4^(alpha k) (1 + 2 zeta) sum_phi prod C(x_phi(i), x_phi(i+1)))``.

    The ``y``-sum runs over ``[min x - radius, max x + radius]``; beyond it every
    factor is at least ``radius`` away, so the neglected part is at most
    ``2 * hurwitz_zeta(k alpha, radius + 1)``, which is added to the returned
    left side.  The left side is therefore a certified upper bound.
    """
    k = len(xs)
    if not 1 <= k <= MAX_SUMMED_CHAIN_LENGTH:
        raise ValueError(f"chain length must lie in [1, {MAX_SUMMED_CHAIN_LENGTH}], got {k}")
    c = SiteKernel(alpha)
    z = zeta(alpha)
    if k == 1:
        lhs = 1.0 + 2.0 * z
    else:
        ys = np.arange(min(xs) - radius, max(xs) + radius + 1, dtype=np.float64)
        prod = np.ones_like(ys)
        for x in xs:
            d = np.abs(ys - x)
            with np.errstate(divide="ignore"):
                prod *= np.where(d > 0, d ** (-alpha), 1.0)
        inside = math.fsum(prod.tolist())
        tail = 2.0 * float(mpmath.zeta(k * alpha, radius + 1))
        lhs = inside + tail
    rhs = 4.0 ** (alpha * k) * (1.0 + 2.0 * z) * _chain_sum(xs, c, None)
    return lhs, rhs


def interior_distance(g1: SpinFlipConfig, g2: SpinFlipConfig) -> int:
    """Distance between the minus-interiors (0 when they meet)."""
    a, b = g1.interior, g2.interior
    if not a or not b:
        raise ValueError("contours with empty interior")
    if set(a) & set(b):
        return 0
    return min(abs(x - y) for x in a for y in b)


def detector_set_member(g1: SpinFlipConfig, g2: SpinFlipConfig, params: ModelParams) -> bool:
    """Interiors within ``2 M min(diam)^a`` of each other."""
    bound = 2.0 * params.m_param * min(g1.diam, g2.diam) ** params.dist_exponent
    return interior_distance(g1, g2) <= bound


def detector_witness(p1, p2, params: ModelParams):
    """A pair ``(g1, g2)`` from ``p1 x p2`` caught by the detector, or ``None``."""
    for g1 in p1:
        for g2 in p2:
            if detector_set_member(g1, g2, params):
                return g1, g2
    return None


def _energy(g: SpinFlipConfig, alpha: float) -> float:
    return interior_energy(tuple(g.interior), alpha)


def contour_point_bounds_check(g1: SpinFlipConfig, g2: SpinFlipConfig | None, x: int, y: int,
                               params: ModelParams, c0: float) -> list[tuple[str, float, float]]:
    """Evaluate the contour-to-site inequalities that apply to the given data.

    * ``same``: ``g2`` is ``None`` and ``x, y`` lie in the interior of ``g1``:
      ``1 <= exp(alpha c0 H) C(x, y)``.
    * ``pair``: ``g1, g2`` positively compatible, ``x`` in ``I(g1)``, ``y`` in
      ``I(g2)``: ``Phi <= 4^alpha exp(2 alpha c0 (H1 + H2)) C(x, y)``.
    * ``detector``: ``(g1, g2)`` caught by the detector, same site memberships:
      ``1 <= (4M)^alpha exp(alpha c0 (H1 + H2)) C(x, y)``.

    Returns ``(case, lhs, rhs)`` triples; ``c0`` is the fitted diameter
    constant used on every right-hand side.
    """
    alpha = float(params.alpha)
    c = SiteKernel(alpha)
    if x not in g1.interior:
        raise ValueError(f"site {x} is not inside the first contour")
    h1 = _energy(g1, alpha)
    if g2 is None:
        if y not in g1.interior:
            raise ValueError(f"site {y} is not inside the contour")
        return [("same", 1.0, math.exp(alpha * c0 * h1) * c(x, y))]
    if y not in g2.interior:
        raise ValueError(f"site {y} is not inside the second contour")
    h2 = _energy(g2, alpha)
    out = []
    if is_positively_compatible(g1, g2, params):
        out.append(("pair", phi(g1.interior, g2.interior, alpha),
                    4.0 ** alpha * math.exp(2 * alpha * c0 * (h1 + h2)) * c(x, y)))
    if detector_set_member(g1, g2, params):
        out.append(("detector", 1.0, (4.0 * params.m_param) ** alpha * math.exp(alpha * c0 * (h1 + h2)) * c(x, y)))
    if not out:
        raise ValueError("the contour pair is neither positively compatible nor caught by the detector")
    return out


def site_tree_sum(a_set, alpha: float) -> float:
    """``sum over labeled trees on A of prod_{edges} |a1 - a2|^-alpha``."""
    sites = tuple(sorted(set(int(a) for a in a_set)))
    if not sites:
        raise ValueError("empty site set")
    if len(sites) > MAX_TREE_SITES:
        raise ValueError(f"site tree sums refused for |A|={len(sites)} > {MAX_TREE_SITES}")
    if len(sites) == 1:
        return 1.0
    c = SiteKernel(alpha)
    terms = []
    for tree in labeled_trees(len(sites)):
        terms.append(math.prod(c(sites[i], sites[j]) for i, j in tree.edges))
    return math.fsum(terms)


@dataclass
class CorrelationBoundReport:
    """Oracle correlation against the shape of the decay bound on a beta grid."""

    a_set: tuple[int, ...]
    alpha: float
    betas: tuple[float, ...]
    values: tuple[float, ...]
    shape: float
    ratios: tuple[float, ...]
    fitted_constant: float
    decreasing: bool
    bound_holds: bool
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "a_set": list(self.a_set),
            "alpha": self.alpha,
            "betas": list(self.betas),
            "values": list(self.values),
            "shape": self.shape,
            "ratios": list(self.ratios),
            "fitted_constant": self.fitted_constant,
            "decreasing": self.decreasing,
            "bound_holds": self.bound_holds,
            **self.meta,
        }


def correlation_bound_report(params: ModelParams, a_set, betas: Sequence[float]) -> CorrelationBoundReport:
    """Compare ``|<:sigma_A:>|`` with ``2 exp(-c beta) * shape(A)``.

    ``shape`` is ``C(x, y)`` for two sites and the site tree sum otherwise.  The
    constant is fitted as the largest ``c`` valid on the whole grid,
    ``c = min_beta -log(ratio / 2) / beta``; it is ``inf`` when every
    correlation vanishes.
    """
    from .oracle import wick_product

    sites = tuple(sorted(set(int(a) for a in a_set)))
    if len(sites) < 2:
        raise ValueError("correlation bounds need at least two sites")
    alpha = float(params.alpha)
    shape = kernel(sites[0], sites[1], alpha) if len(sites) == 2 else site_tree_sum(sites, alpha)
    betas = tuple(float(b) for b in betas)
    values = tuple(abs(float(wick_product(params.replace(beta=b), sites))) for b in betas)
    ratios = tuple(v / shape for v in values)
    fits = [-math.log(r / 2.0) / b for r, b in zip(ratios, betas) if r > 0 and b > 0]
    c_fit = min(fits) if fits else math.inf
    decreasing = all(ratios[i + 1] < ratios[i] for i in range(len(ratios) - 1))
    bound_ok = all(v <= 2.0 * math.exp(-c_fit * b) * shape * (1 + 1e-12) for v, b in zip(values, betas)) if fits else True
    return CorrelationBoundReport(sites, alpha, betas, values, shape, ratios, c_fit, decreasing,
                                  bound_ok and c_fit > 0,
                                  {"volume": [min(params.volume), max(params.volume)]})


# -- sweeps ---------------------------------------------------------------------------

@dataclass
class SweepResult:
    """Outcome of a randomized inequality sweep."""

    name: str
    samples: int
    violations: list
    max_ratio: float
    meta: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"name": self.name, "samples": self.samples, "violations": self.violations,
                "max_ratio": self.max_ratio, "ok": self.ok, **self.meta}


def _random_sites(rng: np.random.Generator, k: int, span: int) -> tuple[int, ...]:
    # small spans make coincident sites common, exercising the repeated-site case
    return tuple(int(v) for v in rng.integers(-span, span + 1, size=k))


def chain_bound_sweep(samples: int, seed: int = 0, span: int = 6, k_range: tuple[int, int] = (2, 5)) -> SweepResult:
    """Random ``(x, y, alpha)`` instances of the pointwise chain bound."""
    rng = np.random.default_rng(seed)
    bad, worst = [], 0.0
    for _ in range(samples):
        k = int(rng.integers(k_range[0], k_range[1] + 1))
        alpha = min(max(float(rng.uniform(1.0, 2.0)), 1.0 + 1e-9), 2.0)
        xs = _random_sites(rng, k, span)
        y = int(rng.integers(-span, span + 1))
        lhs, rhs = chain_bound_check(xs, y, alpha)
        worst = max(worst, lhs / rhs)
        if not lhs <= rhs:
            bad.append({"xs": list(xs), "y": y, "alpha": alpha, "lhs": lhs, "rhs": rhs})
    return SweepResult("chain", samples, bad, worst, {"seed": seed, "span": span})


def summed_chain_bound_sweep(samples: int, seed: int = 0, span: int = 6, k_range: tuple[int, int] = (1, 4),
                             radius: int = SUM_RADIUS) -> SweepResult:
    """Random ``(x, alpha)`` instances of the site-summed chain bound."""
    rng = np.random.default_rng(seed)
    bad, worst = [], 0.0
    for _ in range(samples):
        k = int(rng.integers(k_range[0], k_range[1] + 1))
        alpha = min(max(float(rng.uniform(1.0, 2.0)), 1.0 + 1e-9), 2.0)
        xs = _random_sites(rng, k, span)
        lhs, rhs = summed_chain_bound_check(xs, alpha, radius)
        worst = max(worst, lhs / rhs)
        if not lhs <= rhs:
            bad.append({"xs": list(xs), "alpha": alpha, "lhs": lhs, "rhs": rhs})
    return SweepResult("summed_chain", samples, bad, worst, {"seed": seed, "span": span, "radius": radius})


def detector_witness_sweep(params: ModelParams, polymers: Sequence, samples: int, seed: int = 0) -> SweepResult:
    """Every sampled incompatible polymer pair must contain a detector pair."""
    from .polymer import polymer_compatible

    rng = np.random.default_rng(seed)
    bad, checked = [], 0
    pol = list(polymers)
    attempts = 0
    while checked < samples and attempts < 50 * samples:
        attempts += 1
        i, j = (int(v) for v in rng.integers(0, len(pol), size=2))
        if i == j or polymer_compatible(pol[i], pol[j], params):
            continue
        checked += 1
        if detector_witness(pol[i], pol[j], params) is None:
            bad.append({"p1": str(pol[i]), "p2": str(pol[j])})
    return SweepResult("detector_witness", checked, bad, 0.0, {"seed": seed, "pool": len(pol)})


def contour_point_sweep(params: ModelParams, contours: Sequence, c0: float, samples: int, seed: int = 0) -> SweepResult:
    """Random contour pairs and interior sites through :func:`contour_point_bounds_check`."""
    rng = np.random.default_rng(seed)
    cs = list(contours)
    bad, worst, checks = [], 0.0, 0
    for _ in range(samples):
        g1 = cs[int(rng.integers(len(cs)))]
        x = int(rng.choice(g1.interior))
        if rng.random() < 0.25:
            g2, y = None, int(rng.choice(g1.interior))
        else:
            g2 = cs[int(rng.integers(len(cs)))]
            y = int(rng.choice(g2.interior))
            if not (is_positively_compatible(g1, g2, params) or detector_set_member(g1, g2, params)):
                continue
        for case, lhs, rhs in contour_point_bounds_check(g1, g2, x, y, params, c0):
            checks += 1
            worst = max(worst, lhs / rhs)
            if not lhs <= rhs:
                bad.append({"case": case, "g1": str(g1), "g2": str(g2), "x": x, "y": y, "lhs": lhs, "rhs": rhs})
    return SweepResult("contour_point", checks, bad, worst, {"seed": seed, "c0": c0, "pool": len(cs)})
