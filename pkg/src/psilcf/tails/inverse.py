"""Generalized inverses of monotone functions."""

from __future__ import annotations

import math
import warnings
from typing import Callable


class BelowRangeWarning(UserWarning):
    """The level is already reached at the left end of the search range."""


class InverseBracketError(ArithmeticError):
    pass


def generalized_inverse(
    h: Callable[[float], float], t: float, lo: float = 0.0, hi: float = 1.0, cap: float = 1e300
) -> float:
    """``inf{v >= lo : h(v) >= t}`` for non-decreasing ``h``.

    Bisection runs until the bracket endpoints are adjacent doubles, so the
    result is exact for continuous strictly increasing ``h`` and lands on
    the jump point (left-continuous convention) for step functions.
    """
    if h(lo) >= t:
        warnings.warn(f"level {t!r} is reached at v={lo!r}; returning the left end", BelowRangeWarning,
                      stacklevel=2)
        return lo
    hi = max(hi, lo + 1.0)
    while h(hi) < t:
        lo, hi = hi, 2.0 * hi
        if hi > cap:
            raise InverseBracketError(f"h stays below {t!r} up to {cap!r}")
    while True:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            return hi
        if h(mid) >= t:
            hi = mid
        else:
            lo = mid


def sigma(V: Callable[[float], float], v: float, lo: float = 0.0) -> float:
    """``sigma(v) = V^{(-1)}(1/v)``: the smallest t with ``V(t) <= 1/v``.

    Solved as the generalized inverse of ``-ln V`` at ``ln v`` so tiny levels
    stay representable.
    """
    if v < 1:
        raise ValueError(f"sigma needs v >= 1, got {v!r}")

    def level(t: float) -> float:
        if t <= 0:
            return -math.inf
        y = V(t)
        return math.inf if y <= 0 else -math.log(y)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BelowRangeWarning)
        return generalized_inverse(level, math.log(v), lo=lo)
