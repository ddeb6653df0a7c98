"""Timing of the exact-enumeration kernels: compiled (numba) against the numpy fallback.

Usage::

    python benchmarks/bench_oracle.py [--sizes 12,14,16,18] [--repeat 3]

Each row reports the best wall time of a full moment pass (minimum search,
partition function, first and second moments) and the relative difference of
``log Z`` between the two back ends.  Set ``POLYGAS_THREADS`` to pin the number
of worker threads used by the compiled kernel.
"""

from __future__ import annotations

import argparse
import time

from polygas import _kernels
from polygas.lattice import ModelParams
from polygas.oracle import _moments_cached


def best_time(params: ModelParams, use_numba: bool, repeat: int) -> tuple[float, float]:
    best, log_z = float("inf"), float("nan")
    for _ in range(repeat):
        _moments_cached.cache_clear()
        t0 = time.perf_counter()
        mom = _moments_cached(params, use_numba)
        best = min(best, time.perf_counter() - t0)
        log_z = mom.log_z
    return best, log_z


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="12,14,16,18")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--beta", type=float, default=6.0)
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"numba enabled: {_kernels.NUMBA_ENABLED}")
    if _kernels.NUMBA_ENABLED:
        # compile outside the timed region
        _moments_cached(ModelParams.interval(0, 3, alpha=args.alpha, beta=args.beta), True)
    print(f"{'sites':>5} {'configs':>9} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8} {'rel diff':>9}")
    for n in sizes:
        p = ModelParams.interval(0, n - 1, alpha=args.alpha, beta=args.beta)
        t_np, lz_np = best_time(p, False, args.repeat)
        if _kernels.NUMBA_ENABLED:
            t_nb, lz_nb = best_time(p, True, args.repeat)
            diff = abs(lz_nb - lz_np) / abs(lz_np) if lz_np else abs(lz_nb)
            print(f"{n:>5} {1 << n:>9} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>8.1f} {diff:>9.1e}")
        else:
            print(f"{n:>5} {1 << n:>9} {'-':>10} {t_np:>10.4f} {'-':>8} {'-':>9}")


if __name__ == "__main__":
    main()
