"""Gray-code enumeration kernels for the exact oracle.

Configurations of a box of ``n`` sites are bitmasks ``s`` (bit set = minus
spin).  With ``base_x = 4 zeta(alpha) + 2 h_x`` and pair couplings ``J`` the
energy is ``E(s) = sum_x base_x s_x - 2 sum_{x != y} J_xy s_x s_y``.  Walking
the masks in Gray-code order changes one bit per step, so the energy is
updated in ``O(n)`` through the local fields ``f_x = sum_y J_xy s_y``.

The ``2^n`` masks are split into a fixed number of contiguous blocks (fixed
independently of the worker count) whose partial sums are merged in block
order, so results are reproducible across thread counts.

Set ``POLYGAS_DISABLE_NUMBA=1`` to use the pure numpy fallback.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = ["NUMBA_ENABLED", "n_blocks", "min_energy", "moments", "centered_moment", "set_threads"]

_DISABLED = os.environ.get("POLYGAS_DISABLE_NUMBA", "").strip() not in ("", "0")

try:
    if _DISABLED:
        raise ImportError
    import numba
    from numba import njit, prange

    # the system TBB is too old for numba; prefer OpenMP, then the built-in queue
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover - exercised with the env flag
    numba = None
    NUMBA_ENABLED = False

MAX_BLOCKS = 256


def n_blocks(n_sites: int) -> int:
    return min(1 << n_sites, MAX_BLOCKS)


def set_threads() -> None:
    """Honour ``POLYGAS_THREADS`` for the numba worker pool."""
    value = os.environ.get("POLYGAS_THREADS")
    if NUMBA_ENABLED and value:
        numba.set_num_threads(max(1, min(int(value), numba.config.NUMBA_NUM_THREADS)))


# -- numba path ---------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True)
    def _ctz(t):
        k = 0
        while (t & 1) == 0:
            t >>= 1
            k += 1
        return k

    @njit(cache=True)
    def _start(J, base, t0, s, f):
        n = J.shape[0]
        g = t0 ^ (t0 >> 1)
        for x in range(n):
            s[x] = (g >> x) & 1
        e = 0.0
        for x in range(n):
            acc = 0.0
            for y in range(n):
                acc += J[x, y] * s[y]
            f[x] = acc
        for x in range(n):
            if s[x]:
                e += base[x] - 2.0 * f[x]
        return e

    @njit(cache=True)
    def _step(J, base, t, s, f, e):
        k = _ctz(t)
        n = J.shape[0]
        if s[k]:
            e -= base[k] - 4.0 * f[k]
            s[k] = 0
            for y in range(n):
                f[y] -= J[y, k]
        else:
            e += base[k] - 4.0 * f[k]
            s[k] = 1
            for y in range(n):
                f[y] += J[y, k]
        return e

    @njit(parallel=True, cache=True)
    def _nb_min(J, base, nblocks):
        n = J.shape[0]
        size = (1 << n) // nblocks
        mins = np.empty(nblocks)
        where = np.empty(nblocks, dtype=np.int64)
        for b in prange(nblocks):
            s = np.zeros(n, dtype=np.int64)
            f = np.zeros(n)
            t0 = b * size
            e = _start(J, base, t0, s, f)
            best = e
            arg = t0
            for t in range(t0 + 1, t0 + size):
                e = _step(J, base, t, s, f, e)
                if e < best:
                    best = e
                    arg = t
            mins[b] = best
            where[b] = arg
        return mins, where

    @njit(parallel=True, cache=True)
    def _nb_moments(J, base, beta, emin, skip, nblocks):
        n = J.shape[0]
        size = (1 << n) // nblocks
        z = np.zeros((nblocks, 2))
        s1 = np.zeros((nblocks, 2, n))
        s2 = np.zeros((nblocks, 2, n, n))
        for b in prange(nblocks):
            s = np.zeros(n, dtype=np.int64)
            f = np.zeros(n)
            on = np.zeros(n, dtype=np.int64)
            t0 = b * size
            e = _start(J, base, t0, s, f)
            for t in range(t0, t0 + size):
                if t > t0:
                    e = _step(J, base, t, s, f, e)
                w = math.exp(-beta * (e - emin))
                if t != skip:
                    # Neumaier compensated accumulation
                    tot = z[b, 0] + w
                    if abs(z[b, 0]) >= w:
                        z[b, 1] += (z[b, 0] - tot) + w
                    else:
                        z[b, 1] += (w - tot) + z[b, 0]
                    z[b, 0] = tot
                # visit only the flipped sites of this configuration
                k = 0
                for x in range(n):
                    if s[x]:
                        on[k] = x
                        k += 1
                for i in range(k):
                    x = on[i]
                    tot = s1[b, 0, x] + w
                    if s1[b, 0, x] >= w:
                        s1[b, 1, x] += (s1[b, 0, x] - tot) + w
                    else:
                        s1[b, 1, x] += (w - tot) + s1[b, 0, x]
                    s1[b, 0, x] = tot
                    for j in range(i + 1, k):
                        y = on[j]
                        tot = s2[b, 0, x, y] + w
                        if s2[b, 0, x, y] >= w:
                            s2[b, 1, x, y] += (s2[b, 0, x, y] - tot) + w
                        else:
                            s2[b, 1, x, y] += (w - tot) + s2[b, 0, x, y]
                        s2[b, 0, x, y] = tot
        return z[:, 0] + z[:, 1], s1[:, 0] + s1[:, 1], s2[:, 0] + s2[:, 1]

    @njit(parallel=True, cache=True)
    def _nb_centered(J, base, beta, emin, sites, mu, nblocks):
        n = J.shape[0]
        size = (1 << n) // nblocks
        out = np.zeros((nblocks, 2))
        for b in prange(nblocks):
            s = np.zeros(n, dtype=np.int64)
            f = np.zeros(n)
            t0 = b * size
            e = _start(J, base, t0, s, f)
            for t in range(t0, t0 + size):
                if t > t0:
                    e = _step(J, base, t, s, f, e)
                term = math.exp(-beta * (e - emin))
                for i in range(sites.shape[0]):
                    term *= (1.0 - 2.0 * s[sites[i]]) - mu[i]
                tot = out[b, 0] + term
                if abs(out[b, 0]) >= abs(term):
                    out[b, 1] += (out[b, 0] - tot) + term
                else:
                    out[b, 1] += (term - tot) + out[b, 0]
                out[b, 0] = tot
        return out[:, 0] + out[:, 1]


# -- numpy fallback ---------------------------------------------------------------------

def _np_block(J, base, t0, size):
    n = J.shape[0]
    t = np.arange(t0, t0 + size, dtype=np.int64)
    g = t ^ (t >> 1)
    s = ((g[:, None] >> np.arange(n)) & 1).astype(np.float64)
    e = s @ base - 2.0 * np.einsum("ij,ij->i", s @ J, s)
    return t, s, e


def _np_min(J, base, nblocks):
    n = J.shape[0]
    size = (1 << n) // nblocks
    mins = np.empty(nblocks)
    where = np.empty(nblocks, dtype=np.int64)
    for b in range(nblocks):
        t, _, e = _np_block(J, base, b * size, size)
        k = int(np.argmin(e))
        mins[b], where[b] = e[k], t[k]
    return mins, where


def _np_moments(J, base, beta, emin, skip, nblocks):
    n = J.shape[0]
    size = (1 << n) // nblocks
    z = np.zeros(nblocks)
    s1 = np.zeros((nblocks, n))
    s2 = np.zeros((nblocks, n, n))
    for b in range(nblocks):
        t, s, e = _np_block(J, base, b * size, size)
        w = np.exp(-beta * (e - emin))
        w_rest = np.where(t == skip, 0.0, w)
        z[b] = math.fsum(w_rest.tolist())
        s1[b] = (s * w[:, None]).sum(axis=0)
        s2[b] = np.triu((s * w[:, None]).T @ s, k=1)
    return z, s1, s2


def _np_centered(J, base, beta, emin, sites, mu, nblocks):
    n = J.shape[0]
    size = (1 << n) // nblocks
    out = np.zeros(nblocks)
    for b in range(nblocks):
        _, s, e = _np_block(J, base, b * size, size)
        term = np.exp(-beta * (e - emin))
        for i, x in enumerate(sites):
            term = term * ((1.0 - 2.0 * s[:, x]) - mu[i])
        out[b] = math.fsum(term.tolist())
    return out


# -- dispatch --------------------------------------------------------------------------

def min_energy(J: np.ndarray, base: np.ndarray, use_numba: bool | None = None) -> tuple[float, int]:
    """Minimum energy and the Gray index of a minimising mask."""
    nb = n_blocks(J.shape[0])
    fn = _nb_min if _use(use_numba) else _np_min
    mins, where = fn(J, base, nb)
    k = int(np.argmin(mins))
    return float(mins[k]), int(where[k])


def moments(J, base, beta, emin, skip, use_numba=None):
    """Block sums of ``w``, ``w s_x`` and ``w s_x s_y`` (x < y), ``w = exp(-beta (E - emin))``.

    The block ``w`` sums leave out the mask with Gray index ``skip`` (whose
    weight is 1), so that ``Z = exp(-beta emin) (1 + rest)`` keeps full relative
    precision when ``rest`` is tiny.
    """
    nb = n_blocks(J.shape[0])
    fn = _nb_moments if _use(use_numba) else _np_moments
    z, s1, s2 = fn(J, base, float(beta), float(emin), int(skip), nb)
    rest = math.fsum(z.tolist())
    m1 = np.array([math.fsum(s1[:, x].tolist()) for x in range(J.shape[0])])
    n = J.shape[0]
    m2 = np.zeros((n, n))
    for x in range(n):
        for y in range(x + 1, n):
            m2[x, y] = m2[y, x] = math.fsum(s2[:, x, y].tolist())
        m2[x, x] = m1[x]
    return rest, m1, m2


def centered_moment(J, base, beta, emin, sites, mu, use_numba=None) -> float:
    """``sum_s w(s) prod_i (sigma_{sites_i} - mu_i)`` with ``sigma = 1 - 2 s``."""
    nb = n_blocks(J.shape[0])
    fn = _nb_centered if _use(use_numba) else _np_centered
    out = fn(J, base, float(beta), float(emin), np.asarray(sites, dtype=np.int64), np.asarray(mu, dtype=np.float64), nb)
    return math.fsum(np.asarray(out).tolist())


def _use(flag: bool | None) -> bool:
    if flag is None:
        return NUMBA_ENABLED
    if flag and not NUMBA_ENABLED:
        raise RuntimeError("numba kernels are disabled or unavailable")
    return bool(flag)
