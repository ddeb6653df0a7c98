"""Scalar arithmetic that works for both ``float`` and ``mpmath.mpf``.

Most of the package is written once and evaluated either in double
precision or, when a ``dps`` (decimal digits) is requested, in mpmath
multiprecision.  The helpers below dispatch on the operand type so that the
calling code does not need to care.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from typing import Iterable, Iterator

import mpmath

Real = float  # documentation alias; values may also be mpmath.mpf


def is_mp(x) -> bool:
    return isinstance(x, mpmath.mpf)


def exp(x):
    return mpmath.exp(x) if is_mp(x) else math.exp(x)


def expm1(x):
    return mpmath.expm1(x) if is_mp(x) else math.expm1(x)


def log(x):
    return mpmath.log(x) if is_mp(x) else math.log(x)


def log1p(x):
    return mpmath.log1p(x) if is_mp(x) else math.log1p(x)


def fsum(values: Iterable):
    """Accurate sum.  Uses ``math.fsum`` for floats and ``mpmath.fsum`` otherwise."""
    vals = list(values)
    if any(is_mp(v) for v in vals):
        return mpmath.fsum(vals)
    return math.fsum(vals)


def prod(values: Iterable, start=1):
    out = start
    for v in values:
        out = out * v
    return out


def power(base: float, expo: float, like=None):
    """``base ** expo`` evaluated in the precision of ``like`` (or float)."""
    if like is not None and is_mp(like):
        return mpmath.mpf(base) ** mpmath.mpf(expo)
    return float(base) ** float(expo)


def as_float(x) -> float:
    return float(x)


@contextmanager
def precision(dps: int | None) -> Iterator[None]:
    """Context manager that sets mpmath precision when ``dps`` is given."""
    if dps is None:
        yield
    else:
        with mpmath.workdps(dps):
            yield


def lift(x, dps: int | None):
    """Convert ``x`` to the working number type for the requested precision."""
    if dps is None:
        return float(x)
    return mpmath.mpf(x)
