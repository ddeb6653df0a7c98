"""Configuration algebra on the dual lattice and exact energies.

Dual sites (bonds between neighbouring integers) live at half-integers.  They
are stored *doubled*, i.e. the bond ``x + 1/2`` is the odd integer ``2x + 1``,
so that all geometry is integer arithmetic.

Energies use the plus boundary condition.  The infinite tail of the
Hamiltonian is resolved in closed form: for a finite minus-interior ``I``

    H(I) = sum_{x in I, y not in I} 2|x-y|^-alpha
         = sum_{x in I} [ 4 zeta(alpha) - sum_{y in I, y != x} 2|x-y|^-alpha ],

which only involves finitely many terms once ``zeta(alpha)`` is known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping

import mpmath
import numpy as np

from . import _num
from .zeta import zeta, zeta_mp

__all__ = [
    "ModelParams",
    "SiteSet",
    "SpinFlipConfig",
    "boundary",
    "spins_from_config",
    "minus_interior",
    "hamiltonian",
    "interior_energy",
    "phi",
    "field_energy",
    "total_energy",
    "zeta",
]


class SiteSet(tuple):
    """Sorted, duplicate-free tuple of integer lattice sites."""

    def __new__(cls, sites: Iterable[int] = ()):
        return super().__new__(cls, sorted({int(s) for s in sites}))

    def __repr__(self) -> str:
        return f"SiteSet({list(self)})"


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the long-range chain ``J(r) = r^-alpha``.

    Attributes:
        alpha: decay exponent, ``1 < alpha <= 2``.
        beta: inverse temperature, ``>= 0``.
        m_param: the contour constant ``M > 1``.
        dist_exponent: distancing exponent ``a`` in ``(1, 2)``; contours are
            compatible when ``dist > M * min(diam)^a``.
        volume: the finite box (sorted sites).
        field: external field as sorted ``(site, h)`` pairs; support inside
            ``volume``.
        dps: when set, energies and weights are evaluated with mpmath at this
            many decimal digits instead of double precision.
    """

    alpha: float = 2.0
    beta: float = 1.0
    m_param: float = 2.0
    dist_exponent: float = 1.5
    volume: SiteSet = field(default_factory=lambda: SiteSet([0]))
    field: tuple[tuple[int, float], ...] = ()
    dps: int | None = None

    def __post_init__(self):
        if not (1.0 < self.alpha <= 2.0):
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not self.m_param > 1:
            raise ValueError(f"M must exceed 1, got {self.m_param}")
        if not (1.0 < self.dist_exponent < 2.0):
            raise ValueError(f"distancing exponent must lie in (1, 2), got {self.dist_exponent}")
        vol = SiteSet(self.volume)
        if len(vol) == 0:
            raise ValueError("volume must be a nonempty finite set of sites")
        object.__setattr__(self, "volume", vol)
        fld = tuple(sorted((int(x), float(h)) for x, h in dict(self.field).items() if h != 0.0))
        for x, _ in fld:
            if x not in vol:
                raise ValueError(f"field support site {x} lies outside the volume")
        object.__setattr__(self, "field", fld)
        if self.dps is not None and self.dps < 15:
            raise ValueError("dps must be at least 15 when given")

    @classmethod
    def interval(cls, a: int, b: int, **kw) -> "ModelParams":
        """Parameters on the integer box ``[a, b]``."""
        if b < a:
            raise ValueError(f"empty interval {a}..{b}")
        return cls(volume=SiteSet(range(a, b + 1)), **kw)

    def replace(self, **kw) -> "ModelParams":
        from dataclasses import replace

        return replace(self, **kw)

    @property
    def field_map(self) -> dict[int, float]:
        return dict(self.field)

    def num(self, x):
        """Lift a number to the working precision of these parameters."""
        return _num.lift(x, self.dps)


def _to_doubled(b) -> int:
    """Convert a half-integer bond (float, Fraction or str) to its doubled odd integer."""
    d = Fraction(b) * 2
    if d.denominator != 1 or d.numerator % 2 == 0:
        raise ValueError(f"{b!r} is not a half-integer dual site")
    return int(d.numerator)


@dataclass(frozen=True, order=True)
class SpinFlipConfig:
    """Finite even set of dual bonds, stored doubled (bond ``x+1/2`` -> ``2x+1``).

    Ordering is lexicographic on the doubled bonds, i.e. by leftmost bond first,
    which is the canonical order used for deterministic set semantics.
    """

    bonds: tuple[int, ...] = ()

    def __post_init__(self):
        bonds = tuple(int(b) for b in self.bonds)
        for b in bonds:
            if b % 2 == 0:
                raise ValueError(f"doubled bond {b} is even; dual sites are odd when doubled")
        if any(b2 <= b1 for b1, b2 in zip(bonds, bonds[1:])):
            raise ValueError("bonds must be strictly increasing")
        if len(bonds) % 2:
            raise ValueError("a spin-flip configuration has an even number of bonds")
        object.__setattr__(self, "bonds", bonds)

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_half(cls, bonds: Iterable) -> "SpinFlipConfig":
        """Build from half-integer bond positions such as ``[-0.5, 0.5]``."""
        return cls(tuple(sorted(_to_doubled(b) for b in bonds)))

    @classmethod
    def from_interior(cls, sites: Iterable[int]) -> "SpinFlipConfig":
        """The configuration whose minus-interior is exactly ``sites``."""
        return cls(_bonds_of_interior(tuple(SiteSet(sites))))

    # -- geometry ---------------------------------------------------------
    def half(self) -> list[float]:
        return [b / 2 for b in self.bonds]

    @property
    def interior(self) -> SiteSet:
        return SiteSet(_interior_of_bonds(self.bonds))

    @property
    def diam(self) -> int:
        """``max bond - min bond`` (a single minus site has diameter 1)."""
        if not self.bonds:
            return 0
        return (self.bonds[-1] - self.bonds[0]) // 2

    def __len__(self) -> int:
        return len(self.bonds)

    def __bool__(self) -> bool:
        return bool(self.bonds)

    def __iter__(self):
        return iter(self.bonds)

    def shift(self, k: int) -> "SpinFlipConfig":
        return type(self)(tuple(b + 2 * k for b in self.bonds))

    def union(self, *others: "SpinFlipConfig") -> "SpinFlipConfig":
        allb = list(self.bonds)
        for o in others:
            allb.extend(o.bonds)
        if len(set(allb)) != len(allb):
            raise ValueError("configurations share a bond")
        return SpinFlipConfig(tuple(sorted(allb)))

    def __str__(self) -> str:
        return "{" + ", ".join(_fmt_half(b) for b in self.bonds) + "}"


def _fmt_half(b: int) -> str:
    return f"{b}/2"


@lru_cache(maxsize=1 << 16)
def _interior_of_bonds(bonds: tuple[int, ...]) -> tuple[int, ...]:
    out: list[int] = []
    for lo, hi in zip(bonds[0::2], bonds[1::2]):
        out.extend(range((lo + 1) // 2, (hi - 1) // 2 + 1))
    return tuple(out)


@lru_cache(maxsize=1 << 16)
def _bonds_of_interior(sites: tuple[int, ...]) -> tuple[int, ...]:
    out: list[int] = []
    prev = None
    for s in sites:
        if prev is None or s != prev + 1:
            if prev is not None:
                out.append(2 * prev + 1)
            out.append(2 * s - 1)
        prev = s
    if prev is not None:
        out.append(2 * prev + 1)
    return tuple(out)


def boundary(sigma: Mapping[int, int]) -> SpinFlipConfig:
    """Spin-flip set of a configuration that equals +1 outside the given sites."""
    minus = []
    for x, s in sigma.items():
        if s not in (-1, 1):
            raise ValueError(f"spin at {x} must be +-1, got {s}")
        if s == -1:
            minus.append(x)
    return SpinFlipConfig.from_interior(minus)


def spins_from_config(cfg: SpinFlipConfig, volume: Iterable[int]) -> dict[int, int]:
    """Reconstruct spins on ``volume`` (plus outside the minus-interior)."""
    inside = set(cfg.interior)
    return {x: (-1 if x in inside else 1) for x in volume}


def minus_interior(cfg: SpinFlipConfig) -> SiteSet:
    return cfg.interior


# -- energies -----------------------------------------------------------------

def _zeta_value(alpha: float, dps: int | None):
    return zeta(alpha) if dps is None else zeta_mp(alpha, dps)


@lru_cache(maxsize=1 << 18)
def interior_energy(sites: tuple[int, ...], alpha: float, dps: int | None = None):
    """``H`` of the configuration whose minus-interior is ``sites`` (sorted tuple)."""
    n = len(sites)
    if n == 0:
        return _num.lift(0, dps)
    if dps is None:
        z4 = 4.0 * zeta(alpha) * n
        if n == 1:
            return z4
        arr = np.asarray(sites, dtype=np.float64)
        iu, ju = np.triu_indices(n, k=1)
        pair = np.abs(arr[iu] - arr[ju]) ** (-alpha)
        # ordered pairs x != y each contribute 2 J, i.e. 4 J per unordered pair
        return math.fsum([z4, -4.0 * math.fsum(pair.tolist())])
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        z4 = 4 * zeta_mp(alpha, dps) * n
        pair = mpmath.fsum(mpmath.mpf(abs(x - y)) ** (-a) for x, y in combinations(sites, 2))
        return z4 - 4 * pair


def hamiltonian(cfg: SpinFlipConfig, params: ModelParams):
    """Exact plus-boundary energy of a spin-flip configuration (no field)."""
    return interior_energy(tuple(cfg.interior), float(params.alpha), params.dps)


def phi(a: Iterable[int], b: Iterable[int], params_or_alpha) -> float:
    """``Phi(A, B) = sum_{x in A, y in B} 4 |x-y|^-alpha`` for disjoint nonempty sets."""
    alpha, dps = _alpha_dps(params_or_alpha)
    return _phi_cached(tuple(SiteSet(a)), tuple(SiteSet(b)), alpha, dps)


@lru_cache(maxsize=1 << 18)
def _phi_cached(a: tuple[int, ...], b: tuple[int, ...], alpha: float, dps: int | None):
    if not a or not b:
        raise ValueError("phi needs two nonempty site sets")
    if set(a) & set(b):
        raise ValueError("phi needs disjoint site sets")
    if a > b:  # symmetric: evaluate in one canonical order so phi(a,b) == phi(b,a) bitwise
        a, b = b, a
    if dps is None:
        xa = np.asarray(a, dtype=np.float64)[:, None]
        xb = np.asarray(b, dtype=np.float64)[None, :]
        return 4.0 * math.fsum((np.abs(xa - xb) ** (-alpha)).ravel().tolist())
    with mpmath.workdps(dps):
        al = mpmath.mpf(alpha)
        return 4 * mpmath.fsum(mpmath.mpf(abs(x - y)) ** (-al) for x in a for y in b)


def _alpha_dps(params_or_alpha):
    if isinstance(params_or_alpha, ModelParams):
        return float(params_or_alpha.alpha), params_or_alpha.dps
    return float(params_or_alpha), None


def field_energy(cfg_or_sites, params: ModelParams):
    """``E_h = sum_{x in I_-} 2 h_x`` (zero for an empty field)."""
    sites = cfg_or_sites.interior if isinstance(cfg_or_sites, SpinFlipConfig) else cfg_or_sites
    h = params.field_map
    vals = [2.0 * h[x] for x in sites if x in h]
    if params.dps is None:
        return math.fsum(vals)
    return _sum_mp(vals, params.dps)


def _sum_mp(vals, dps):
    with mpmath.workdps(dps):
        return mpmath.fsum(mpmath.mpf(v) for v in vals)


def total_energy(cfg_or_sites, params: ModelParams):
    """``H_h = H + E_h``."""
    sites = cfg_or_sites.interior if isinstance(cfg_or_sites, SpinFlipConfig) else SiteSet(cfg_or_sites)
    h = interior_energy(tuple(sites), float(params.alpha), params.dps)
    if params.field:
        h = h + field_energy(sites, params)
    return h
