"""Quadrature, root bracketing and finite differences shared by the checkers."""

from __future__ import annotations

import math
from typing import Callable

from scipy.optimize import brentq


class QuadratureError(ArithmeticError):
    pass


class BracketError(ArithmeticError):
    pass


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-15,
    max_depth: int = 50,
    initial_panels: int = 4,
) -> float:
    """Integrate ``f`` over ``[a, b]`` by adaptive Simpson with bisection.

    A panel is accepted when its Richardson error estimate is below
    ``max(abs_tol, rel_tol * |panel value|)``; the relative floor keeps
    large-magnitude integrands from demanding sub-ulp accuracy.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, abs_tol, rel_tol, max_depth, initial_panels)

    def value(t: float) -> float:
        y = f(t)
        if not math.isfinite(y):
            raise QuadratureError(f"integrand is not finite at t={t!r}")
        return y

    parts = []
    edges = [a + (b - a) * i / initial_panels for i in range(initial_panels)] + [b]
    stack = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        flo, fmid, fhi = value(lo), value(mid), value(hi)
        stack.append((lo, hi, flo, fmid, fhi, _simpson(flo, fmid, fhi, hi - lo), 0))
    while stack:
        lo, hi, flo, fmid, fhi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = value(lm), value(rm)
        left = _simpson(flo, flm, fmid, mid - lo)
        right = _simpson(fmid, frm, fhi, hi - mid)
        delta = left + right - whole
        if abs(delta) <= 15.0 * max(abs_tol, rel_tol * abs(left + right)):
            parts.append(left + right + delta / 15.0)
            continue
        if depth >= max_depth or not (lo < lm < mid < rm < hi):
            raise QuadratureError(f"no convergence on [{lo!r}, {hi!r}] after {depth} bisections")
        stack.append((mid, hi, fmid, frm, fhi, right, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, depth + 1))
    return math.fsum(parts)


class CumulativeIntegral:
    """``F(b) = integral of f from lower to b`` with memoised node values.

    With ``growth="doubling"`` nodes sit at ``lower + step * (2**k - 1)`` so
    long ranges cost a logarithmic number of cached pieces; ``"linear"``
    uses ``lower + k * step``.  Each query integrates only the remainder
    past the nearest node.
    """

    def __init__(
        self,
        f: Callable[[float], float],
        lower: float = 0.0,
        step: float = 1.0,
        growth: str = "doubling",
        **quad_kw,
    ):
        if growth not in ("doubling", "linear"):
            raise ValueError(f"unknown growth {growth!r}")
        self.f = f
        self.lower = lower
        self.step = step
        self.growth = growth
        self.quad_kw = quad_kw
        self._nodes = [lower]
        self._pieces: list[float] = []
        self._cum = [0.0]

    def _node(self, k: int) -> float:
        if self.growth == "linear":
            return self.lower + self.step * k
        return self.lower + self.step * (2.0**k - 1.0)

    def __call__(self, b: float) -> float:
        if b < self.lower:
            return -adaptive_simpson(self.f, b, self.lower, **self.quad_kw)
        while self._nodes[-1] <= b and len(self._nodes) < 100_000:
            k = len(self._nodes)
            nxt = self._node(k)
            if nxt > b:
                break
            self._pieces.append(adaptive_simpson(self.f, self._nodes[-1], nxt, **self.quad_kw))
            self._nodes.append(nxt)
            self._cum.append(math.fsum(self._pieces))
        # nearest cached node at or below b
        k = len(self._nodes) - 1
        while self._nodes[k] > b:
            k -= 1
        return self._cum[k] + adaptive_simpson(self.f, self._nodes[k], b, **self.quad_kw)


def expand_bracket_up(
    f: Callable[[float], float], target: float, lo: float, hi: float, cap: float
) -> tuple[float, float]:
    """Grow ``hi`` geometrically until ``f(hi) >= target`` (f non-decreasing)."""
    if hi <= lo:
        hi = lo + 1.0
    while f(hi) < target:
        lo = hi
        hi = max(2.0 * hi, hi + 1.0)
        if hi > cap:
            raise BracketError(f"no bracket for level {target!r} below cap {cap!r}")
    return lo, hi


def solve_increasing(
    f: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    cap: float = 1e200,
    xtol: float = 1e-300,
    rtol: float = 8.9e-16,
) -> float:
    """Root of ``f(y) = target`` for non-decreasing ``f`` with ``f(lo) <= target``.

    Bracketing by doubling, then Brent's bisection/secant hybrid.
    """
    if f(lo) >= target:
        return lo
    lo, hi = expand_bracket_up(f, target, lo, hi, cap)
    if f(hi) == target:
        return hi
    return brentq(lambda y: f(y) - target, lo, hi, xtol=xtol, rtol=rtol, maxiter=500)


def central_derivative(f: Callable[[float], float], x: float, h: float) -> float:
    """Central difference with one Richardson step (base step ``h``)."""
    d1 = (f(x + h) - f(x - h)) / (2.0 * h)
    h2 = 0.5 * h
    d2 = (f(x + h2) - f(x - h2)) / (2.0 * h2)
    return (4.0 * d2 - d1) / 3.0
