"""Exact enumeration of the plus-boundary chain on small boxes.

Every configuration of the box is visited once (``2^|box|`` of them).  The
partition function is accumulated in shifted form
``Z = exp(-beta E_min) (1 + rest)``, where ``rest`` sums the weights of all
configurations other than a minimiser, so ``log Z = -beta E_min + log1p(rest)``
stays accurate even when ``rest`` is far below double resolution relative to 1.
With ``params.dps`` set the enumeration runs in mpmath at that precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Mapping

import mpmath
import numpy as np

from . import _kernels, _num
from .lattice import ModelParams, SiteSet, total_energy
from .zeta import zeta

__all__ = [
    "MAX_ORACLE_SITES",
    "MAX_MP_SITES",
    "MAX_WICK_SIZE",
    "OracleMoments",
    "CorrelationTable",
    "exact_partition_function",
    "log_partition_function",
    "spin_log_partition_function",
    "oracle_moments",
    "expectation",
    "magnetization",
    "truncated_two_point",
    "wick_product",
    "correlation_table",
    "decay_fit",
]

MAX_ORACLE_SITES = 22
MAX_MP_SITES = 14
MAX_WICK_SIZE = 5


def _check_size(params: ModelParams) -> None:
    n = len(params.volume)
    if n > MAX_ORACLE_SITES:
        raise ValueError(f"exact enumeration refused for |box|={n} > {MAX_ORACLE_SITES}")
    if params.dps is not None and n > MAX_MP_SITES:
        raise ValueError(f"high-precision enumeration refused for |box|={n} > {MAX_MP_SITES}")


def _couplings(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    sites = np.asarray(params.volume, dtype=np.float64)
    diff = np.abs(sites[:, None] - sites[None, :])
    with np.errstate(divide="ignore"):
        J = np.where(diff > 0, diff ** (-float(params.alpha)), 0.0)
    h = params.field_map
    base = np.array([4.0 * zeta(float(params.alpha)) + 2.0 * h.get(int(x), 0.0) for x in params.volume])
    return J, base


@dataclass(frozen=True)
class OracleMoments:
    """First and second moments of the minus-indicators ``s_x = (1 - sigma_x)/2``."""

    volume: SiteSet
    beta: float
    e_min: float
    rest: float
    mean: np.ndarray
    second: np.ndarray
    argmin: int

    @property
    def log_z(self) -> float:
        return -self.beta * self.e_min + math.log1p(self.rest)

    def index(self, x: int) -> int:
        try:
            return self.volume.index(x)
        except ValueError:
            raise ValueError(f"site {x} is not in the box") from None


@lru_cache(maxsize=32)
def _moments_cached(params: ModelParams, use_numba: bool | None) -> OracleMoments:
    _kernels.set_threads()
    J, base = _couplings(params)
    e_min, arg = _kernels.min_energy(J, base, use_numba)
    rest, m1, m2 = _kernels.moments(J, base, params.beta, e_min, arg, use_numba)
    scale = 1.0 + rest
    return OracleMoments(params.volume, float(params.beta), e_min, rest, m1 / scale, m2 / scale, arg)


def oracle_moments(params: ModelParams, use_numba: bool | None = None) -> OracleMoments:
    """Double-precision enumeration (cached per parameter set)."""
    _check_size(params)
    return _moments_cached(params.replace(dps=None), use_numba)


def _mp_log_z(params: ModelParams):
    with _num.precision(params.dps):
        vol = tuple(params.volume)
        energies = []
        for r in range(len(vol) + 1):
            for sub in combinations(vol, r):
                energies.append(total_energy(sub, params))
        e_min = min(energies)
        k = energies.index(e_min)
        beta = mpmath.mpf(params.beta)
        rest = mpmath.fsum(mpmath.exp(-beta * (e - e_min)) for i, e in enumerate(energies) if i != k)
        return -beta * e_min + mpmath.log1p(rest)


@lru_cache(maxsize=8)
def _mp_states(params: ModelParams):
    """All minus-sets of the box with normalised Gibbs weights (mpf)."""
    with _num.precision(params.dps):
        vol = tuple(params.volume)
        subsets, energies = [], []
        for r in range(len(vol) + 1):
            for sub in combinations(vol, r):
                subsets.append(frozenset(sub))
                energies.append(total_energy(sub, params))
        e_min = min(energies)
        beta = mpmath.mpf(params.beta)
        w = [mpmath.exp(-beta * (e - e_min)) for e in energies]
        total = mpmath.fsum(w)
        return tuple(subsets), tuple(x / total for x in w)


def _mp_expect(params: ModelParams, fn):
    subsets, weights = _mp_states(params)
    with _num.precision(params.dps):
        return mpmath.fsum(w * fn(s) for s, w in zip(subsets, weights))


def log_partition_function(params: ModelParams):
    """``log Z`` of the plus-boundary box (mpf when ``params.dps`` is set)."""
    _check_size(params)
    if params.dps is not None:
        return _mp_log_z(params)
    return oracle_moments(params).log_z


def exact_partition_function(params: ModelParams):
    """``Z = sum over configurations of exp(-beta (H + E_h))``."""
    _check_size(params)
    if params.dps is not None:
        with _num.precision(params.dps):
            return mpmath.exp(_mp_log_z(params))
    return math.exp(oracle_moments(params).log_z)


def spin_log_partition_function(params: ModelParams, boundary: int = 1) -> float:
    """``log Z`` from the spin form of the energy with boundary spins ``boundary``.

    ``H = sum_{x<y in box} J (1 - s_x s_y) + sum_{x in box} (1 - b s_x) sum_{y outside} J_xy``
    plus ``sum_x h_x (1 - s_x)``; evaluated over explicit spin arrays (boxes up to
    16 sites).  Independent of the Gray-code kernel.
    """
    if boundary not in (1, -1):
        raise ValueError("boundary must be +1 or -1")
    n = len(params.volume)
    if n > 16:
        raise ValueError("spin-form enumeration refused for more than 16 sites")
    J, _ = _couplings(params)
    outside = 2.0 * zeta(float(params.alpha)) - J.sum(axis=1)
    h = np.array([params.field_map.get(int(x), 0.0) for x in params.volume])
    masks = np.arange(1 << n, dtype=np.int64)
    spins = 1.0 - 2.0 * ((masks[:, None] >> np.arange(n)) & 1)
    inner = 0.5 * (J.sum() - np.einsum("ij,ij->i", spins @ J, spins))
    energy = inner + (1.0 - boundary * spins) @ outside + (1.0 - spins) @ h
    a = -float(params.beta) * energy
    top = a.max()
    return float(top + math.log(math.fsum(np.exp(a - top).tolist())))


def expectation(observable: Callable[[Mapping[int, int]], float], params: ModelParams) -> float:
    """Gibbs average of ``observable(spins)`` where ``spins`` maps site -> +-1."""
    _check_size(params)
    J, base = _couplings(params)
    n = len(params.volume)
    masks = np.arange(1 << n, dtype=np.int64)
    s = ((masks[:, None] >> np.arange(n)) & 1).astype(np.float64)
    energy = s @ base - 2.0 * np.einsum("ij,ij->i", s @ J, s)
    w = np.exp(-float(params.beta) * (energy - energy.min()))
    vol = tuple(params.volume)
    num = []
    for row, wt in zip(s, w):
        spins = {x: 1 - 2 * int(b) for x, b in zip(vol, row)}
        num.append(wt * float(observable(spins)))
    return math.fsum(num) / math.fsum(w.tolist())


def _require_site(params: ModelParams, x: int) -> None:
    if x not in params.volume:
        raise ValueError(f"site {x} is not in the box")


def magnetization(params: ModelParams, x: int):
    """``<sigma_x>`` (mpf when ``params.dps`` is set)."""
    if params.dps is not None:
        _check_size(params)
        _require_site(params, x)
        return _mp_expect(params, lambda s: -1 if x in s else 1)
    mom = oracle_moments(params)
    return 1.0 - 2.0 * float(mom.mean[mom.index(x)])


def truncated_two_point(params: ModelParams, x: int, y: int):
    """``<sigma_x sigma_y> - <sigma_x><sigma_y>``."""
    if params.dps is not None:
        return wick_product(params, {x, y}) if x != y else 1 - magnetization(params, x) ** 2
    mom = oracle_moments(params)
    i, j = mom.index(x), mom.index(y)
    return 4.0 * (float(mom.second[i, j]) - float(mom.mean[i]) * float(mom.mean[j]))


def wick_product(params: ModelParams, a_set, use_numba: bool | None = None) -> float:
    """``< prod_{a in A} (sigma_a - <sigma_a>) >`` by a second centred pass."""
    sites = tuple(sorted(set(int(a) for a in a_set)))
    if len(sites) > MAX_WICK_SIZE:
        raise ValueError(f"Wick products refused for |A|={len(sites)} > {MAX_WICK_SIZE}")
    if params.dps is not None:
        _check_size(params)
        for a in sites:
            _require_site(params, a)
        mus = [magnetization(params, a) for a in sites]
        with _num.precision(params.dps):
            return _mp_expect(params, lambda s: _num.prod(((-1 if a in s else 1) - m) for a, m in zip(sites, mus)))
    mom = oracle_moments(params, use_numba)
    if not sites:
        return 1.0
    idx = [mom.index(a) for a in sites]
    mu = [1.0 - 2.0 * float(mom.mean[i]) for i in idx]
    J, base = _couplings(params)
    total = _kernels.centered_moment(J, base, params.beta, mom.e_min, idx, mu, use_numba)
    return total / (1.0 + mom.rest)


@dataclass(frozen=True)
class CorrelationTable:
    """Truncated two-point functions and magnetizations of one box."""

    volume: SiteSet
    beta: float
    alpha: float
    pairs: Mapping[tuple[int, int], float]
    magnetizations: Mapping[int, float]

    def corr(self, x: int, y: int) -> float:
        return self.pairs[(x, y)]

    def as_rows(self, origin: int = 0) -> list[tuple[int, float]]:
        """``(r, corr(origin, origin + r))`` for every ``r >= 1`` inside the box."""
        return [(y - origin, v) for (x, y), v in sorted(self.pairs.items()) if x == origin and y > origin]


def correlation_table(params: ModelParams) -> CorrelationTable:
    mom = oracle_moments(params)
    vol = tuple(params.volume)
    mean = mom.mean
    pairs = {}
    for i, x in enumerate(vol):
        for j, y in enumerate(vol):
            pairs[(x, y)] = 4.0 * (float(mom.second[i, j]) - float(mean[i]) * float(mean[j]))
    mags = {x: 1.0 - 2.0 * float(mean[i]) for i, x in enumerate(vol)}
    return CorrelationTable(params.volume, float(params.beta), float(params.alpha), pairs, mags)


def decay_fit(table: CorrelationTable, r_min: int, r_max: int, origin: int = 0) -> tuple[float, float, float]:
    """Least-squares line through ``(log r, log corr(origin, origin + r))``.

    Returns ``(slope, intercept, residual)`` with the residual the RMS deviation
    in log space.
    """
    rs, vals = [], []
    for r in range(r_min, r_max + 1):
        key = (origin, origin + r)
        if key in table.pairs:
            rs.append(r)
            vals.append(table.pairs[key])
    if len(set(rs)) < 3:
        raise ValueError("a decay fit needs at least three separations in range")
    if min(vals) <= 0:
        raise ValueError("correlations must be positive on the fitted range")
    x = np.log(np.asarray(rs, dtype=np.float64))
    y = np.log(np.asarray(vals, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), float(intercept), resid
