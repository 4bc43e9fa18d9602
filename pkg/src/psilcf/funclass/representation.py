"""Constructors from a (c, eps) pair.

All three share ``g(x) = c(x) * exp(int_0^Gamma eps(e^u) du)`` and differ
only in the upper limit: ``Gamma = ln x`` (slowly varying), ``Gamma = x``
(locally constant) and ``Gamma = gamma(x)`` (psi-locally constant).  The
substitution ``t = e^u`` is what keeps ``e^gamma(x)`` out of the arithmetic.
"""

from __future__ import annotations

import math
from typing import Callable

import mpmath
import numpy as np

from ..exprlang import ExprAst, as_ast, compile_scalar, depends_on_variable, evaluate_mp, to_text
from .functions import PositiveFunction
from .grids import non_increasing
from .numerics import CumulativeIntegral
from .psi import PsiSpec, check_class_K, gamma

_EXP_SAFE = 700.0


class RepresentationError(ValueError):
    pass


def _callable(f) -> tuple[Callable[[float], float], ExprAst | None, str]:
    if isinstance(f, (str, ExprAst, int, float)):
        ast = as_ast(f)
        return compile_scalar(ast), ast, f if isinstance(f, str) else to_text(ast)
    return f, None, getattr(f, "__name__", "f")


class RepresentationSpec:
    """The pair ``(c, eps)``: ``c(t) -> c_limit in (0, inf)``, ``eps(t) -> alpha``.

    ``alpha`` is 0 for the slowly varying family and the index in
    regularly varying mode.  ``eps_of_log`` may supply ``u -> eps(e^u)``
    directly for callables that cannot take huge arguments; expressions are
    handled automatically with mpmath beyond double range.
    """

    def __init__(
        self,
        cfun=1.0,
        epsfun=0.0,
        c_limit: float | None = None,
        alpha: float = 0.0,
        eps_of_log: Callable[[float], float] | None = None,
    ):
        self.cfun, self._c_ast, self.c_label = _callable(cfun)
        self.epsfun, self._eps_ast, self.eps_label = _callable(epsfun)
        if c_limit is None and self._c_ast is not None and not depends_on_variable(self._c_ast):
            c_limit = self.cfun(1.0)
        self.c_limit = c_limit
        self.alpha = float(alpha)
        self._eps_of_log = eps_of_log

    def eps_at_exp(self, u: float) -> float:
        if self._eps_of_log is not None:
            return self._eps_of_log(u)
        if u <= _EXP_SAFE:
            return self.epsfun(math.exp(u))
        if self._eps_ast is not None:
            if not depends_on_variable(self._eps_ast):
                return self.epsfun(1.0)
            return float(evaluate_mp(self._eps_ast, mpmath.exp(u)))
        raise RepresentationError(f"eps({self.eps_label}) cannot be evaluated at e^{u:g}; pass eps_of_log")

    def log_c(self, x: float) -> float:
        c = self.cfun(x)
        if not (c > 0 and math.isfinite(c)):
            raise RepresentationError(f"c({x!r}) = {c!r} is not in (0, inf)")
        return math.log(c)

    def validate(self, tol: float = 1e-2) -> dict:
        """Check the invariants on a diagnostic grid; raise on violation."""
        ts = np.geomspace(1.0, 1e10, 41)
        cs = np.array([self.cfun(t) for t in ts])
        if not np.all((cs > 0) & np.isfinite(cs)):
            raise RepresentationError(f"c({self.c_label}) leaves (0, inf) on the diagnostic grid")
        if self.c_limit is not None:
            if not (0 < self.c_limit < math.inf):
                raise RepresentationError(f"c limit {self.c_limit!r} is not in (0, inf)")
            if abs(cs[-1] - self.c_limit) > tol * self.c_limit:
                raise RepresentationError(f"c({self.c_label}) is not near its limit {self.c_limit!r}")
        us = 2.0 ** np.arange(0, 17)
        dev = np.array([abs(self.eps_at_exp(u) - self.alpha) for u in us])
        if dev[-1] > tol or not non_increasing(dev[len(dev) // 2:], slack=1e-15):
            raise RepresentationError(
                f"eps({self.eps_label}) does not settle at {self.alpha!r} (deviation {dev[-1]:.3g} at t=e^{us[-1]:g})"
            )
        return {"c_last": float(cs[-1]), "eps_deviation_last": float(dev[-1]), "u_max": float(us[-1])}


def _build(rep: RepresentationSpec, upper: Callable[[float], float], label: str) -> PositiveFunction:
    integral = CumulativeIntegral(rep.eps_at_exp, 0.0, step=1.0, growth="doubling")

    def log(x: float) -> float:
        return rep.log_c(x) + integral(upper(x))

    return PositiveFunction(log, label)


def build_svf(rep: RepresentationSpec) -> PositiveFunction:
    """``c(x) exp(int_1^x eps(t)/t dt)`` for ``x >= 1``."""
    def upper(x: float) -> float:
        if x < 1:
            raise ValueError(f"representation is defined for x >= 1, got {x!r}")
        return math.log(x)

    return _build(rep, upper, f"svf[c={rep.c_label}, eps={rep.eps_label}]")


def build_lcf(rep: RepresentationSpec) -> PositiveFunction:
    """``c(x) exp(int_1^{e^x} eps(t)/t dt)``."""
    return _build(rep, lambda x: x, f"lcf[c={rep.c_label}, eps={rep.eps_label}]")


def build_psi_lcf(rep: RepresentationSpec, psi: PsiSpec, require_K: bool = True) -> PositiveFunction:
    """``c(x) exp(int_1^{e^gamma(x)} eps(t)/t dt)``; psi must pass the class-K check."""
    if require_K:
        verdict = check_class_K(psi)
        if not verdict.passed:
            raise RepresentationError(f"psi={psi.label} failed the class-K check: {verdict.summary()}")
    return _build(rep, lambda x: gamma(psi, x), f"psi_lcf[psi={psi.label}, c={rep.c_label}, eps={rep.eps_label}]")
