"""The width function psi and everything derived from it.

``gamma(x) = int_1^x dt / psi(t)`` is the clock in which a psi-l.c.f.
becomes an ordinary l.c.f.; ``theta(x) = x / psi(x)`` is its cheaper
stand-in for regularly varying psi of index below one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..exprlang import ExprAst, as_ast, compile_scalar, to_text
from .grids import TIE_SLACK, geometric_grid, non_increasing, tail_half
from .numerics import CumulativeIntegral, adaptive_simpson, central_derivative, solve_increasing
from .verdicts import ClassVerdict, Verdict


class PsiSpecError(ValueError):
    pass


class ShiftError(ArithmeticError):
    pass


_CERT_GRID_TOP = 1e10


class PsiSpec:
    """A validated non-decreasing ``psi >= 1`` on ``[x0, inf)``.

    Accepts an expression (text or AST), a number, or a Python callable.
    Construction verifies monotonicity and the lower bound on a log grid and
    keeps the result as ``certificate``.
    """

    def __init__(
        self,
        func: ExprAst | str | float | Callable[[float], float],
        label: str | None = None,
        x0: float = 1.0,
    ):
        if isinstance(func, (str, ExprAst, int, float)):
            ast = as_ast(func)
            self.ast: ExprAst | None = ast
            self._f = compile_scalar(ast)
            default_label = func if isinstance(func, str) else to_text(ast)
        else:
            self.ast = None
            self._f = func
            default_label = getattr(func, "__name__", "psi")
        self.label = label or str(default_label)
        self.x0 = float(x0)
        self.certificate = self._certify()
        self._gamma_cum = CumulativeIntegral(self._gamma_integrand, 0.0, step=0.5, growth="linear")
        self._condition_a: dict = {}

    @classmethod
    def constant(cls, c: float = 1.0) -> "PsiSpec":
        return cls(float(c), label=repr(float(c)) if c != 1 else "1")

    @classmethod
    def power(cls, beta: float, x0: float = 1.0) -> "PsiSpec":
        if beta == 0:
            return cls.constant()
        b = float(beta)
        return cls(lambda t: t**b, label=f"x^{b!r}", x0=x0)

    def __call__(self, x: float) -> float:
        return self._f(x)

    def __repr__(self) -> str:
        return f"PsiSpec({self.label!r}, x0={self.x0!r})"

    def _certify(self) -> dict:
        grid = np.unique(np.concatenate(([self.x0], np.geomspace(max(self.x0, 1.0), _CERT_GRID_TOP, 256))))
        vals = np.array([self._f(x) for x in grid])
        if not np.all(np.isfinite(vals)):
            raise PsiSpecError(f"psi={self.label} is not finite on the certificate grid")
        if vals.min() < 1.0 - TIE_SLACK:
            bad = grid[np.argmin(vals)]
            raise PsiSpecError(f"psi={self.label} drops below 1 at x={bad:g} (value {vals.min():g})")
        steps = np.diff(vals)
        if np.any(steps < -TIE_SLACK * np.maximum(1.0, vals[1:])):
            bad = grid[1:][np.argmin(steps)]
            raise PsiSpecError(f"psi={self.label} decreases near x={bad:g}")
        return {"grid_points": len(grid), "x_min": float(grid[0]), "x_max": float(grid[-1]),
                "psi_min": float(vals.min()), "non_decreasing": True}

    def _gamma_integrand(self, s: float) -> float:
        t = math.exp(s)
        p = self._f(t)
        if not p > 0:
            raise PsiSpecError(f"psi={self.label} is not positive at t={t!r}")
        return t / p


# --------------------------------------------------------------------------
# gamma / theta


def gamma(psi: PsiSpec, x: float) -> float:
    """``int_1^x dt / psi(t)``, integrated in ``s = ln t``."""
    if not x >= 1.0:
        raise ValueError(f"gamma needs x >= 1, got {x!r}")
    return psi._gamma_cum(math.log(x))


def gamma_inverse(psi: PsiSpec, t: float, x_cap: float = 1e300) -> float:
    if not t >= 0:
        raise ValueError(f"gamma_inverse needs t >= 0, got {t!r}")
    if t == 0:
        return 1.0
    # psi >= 1 on [1, y] gives gamma(y) <= y - 1, so y >= t + 1
    return solve_increasing(lambda y: gamma(psi, y), t, 1.0, max(2.0, t + 1.0), cap=x_cap)


def theta(psi: PsiSpec, x: float) -> float:
    return x / psi(x)


def check_theta_monotone(psi: PsiSpec, grid=None) -> None:
    if grid is None:
        grid = np.geomspace(max(psi.x0, 1.0), _CERT_GRID_TOP, 256)
    vals = np.array([theta(psi, x) for x in grid])
    steps = np.diff(vals)
    if np.any(steps <= 0):
        bad = grid[1:][np.argmin(steps)]
        raise PsiSpecError(f"theta = x/psi(x) is not strictly increasing near x={bad:g} for psi={psi.label}")


def theta_inverse(psi: PsiSpec, t: float, x_cap: float = 1e300) -> float:
    if "theta_monotone" not in psi.certificate:
        check_theta_monotone(psi)
        psi.certificate["theta_monotone"] = True
    lo = max(psi.x0, 1.0)
    if t <= theta(psi, lo):
        raise ValueError(f"t={t!r} is below theta({lo!r})")
    return solve_increasing(lambda y: theta(psi, y), t, lo, max(2.0 * lo, t), cap=x_cap)


# --------------------------------------------------------------------------
# condition (A) and classes K, K1


@dataclass
class ConditionAReport:
    psi: str
    v: np.ndarray
    a_hat: np.ndarray  # nan where the domain was insufficient
    a_regularized: np.ndarray
    passed: np.ndarray
    skipped: np.ndarray
    upper_sup: np.ndarray
    upper_ok: np.ndarray
    partial_integral: np.ndarray
    x: np.ndarray
    insufficient_domain: list[float] = field(default_factory=list)

    def rows(self):
        for i, v in enumerate(self.v):
            yield {"check": "condition_A", "psi": self.psi, "v": float(v), "x": float(self.x[0]),
                   "value": float(self.a_hat[i]), "verdict": "PASS" if self.passed[i] else "FAIL"}


def estimate_condition_A(psi: PsiSpec, vmax: float = 10.0, xgrid=None, vsteps: int = 40) -> ConditionAReport:
    """Estimate ``a(v) = inf_x psi(x - v psi(x)) / psi(x)`` on the x-tail.

    Pairs with ``x - v psi(x) < x0`` are skipped; a v with no usable pair is
    reported as insufficient domain.  The implied upper bound
    ``psi(x + v psi(x)) / psi(x) <= 1 / a(v)`` is measured on the same pairs.
    """
    xs = tail_half(geometric_grid()) if xgrid is None else np.asarray(xgrid, dtype=float)
    key = (float(vmax), tuple(xs), int(vsteps))
    if key in psi._condition_a:
        return psi._condition_a[key]
    vs = np.linspace(0.0, vmax, vsteps + 1)
    px = np.array([psi(x) for x in xs])
    a_hat = np.full(len(vs), np.nan)
    upper = np.full(len(vs), np.nan)
    skipped = np.zeros(len(vs), dtype=int)
    for i, v in enumerate(vs):
        lows, highs = [], []
        for x, p in zip(xs, px):
            y = x - v * p
            if y < psi.x0:
                skipped[i] += 1
                continue
            lows.append(psi(y) / p)
            highs.append(psi(x + v * p) / p)
        if lows:
            a_hat[i] = min(lows)
            upper[i] = max(highs)
    insufficient = [float(v) for v, a in zip(vs, a_hat) if np.isnan(a)]
    a_reg = np.fmin.accumulate(np.where(np.isnan(a_hat), 0.0, a_hat))
    a_reg[np.isnan(a_hat)] = np.nan
    passed = (a_hat > 0) & (a_hat <= 1.0 + TIE_SLACK)
    with np.errstate(divide="ignore", invalid="ignore"):
        upper_ok = upper <= 1.0 / a_hat + 1e-6
    upper_ok[np.isnan(a_hat)] = False
    # trapezoid cumulative integral over the usable prefix
    usable = np.where(np.isnan(a_reg), 0.0, a_reg)
    partial = np.concatenate(([0.0], np.cumsum(0.5 * (usable[1:] + usable[:-1]) * np.diff(vs))))
    report = ConditionAReport(psi.label, vs, a_hat, a_reg, passed, skipped, upper, upper_ok, partial, xs, insufficient)
    psi._condition_a[key] = report
    return report


def _psi_over_x_decreasing(psi: PsiSpec, xs) -> bool:
    vals = np.array([psi(x) / x for x in xs])
    return bool(np.all(np.diff(vals) < 0))


def check_class_K(
    psi: PsiSpec,
    vmax: float = 10.0,
    xgrid=None,
    a_floor: float = 0.05,
    growth: float = 0.25,
    min_slope: float = 0.05,
) -> ClassVerdict:
    """Finite-range evidence for class K membership.

    PASS needs: every v in ``[0, vmax]`` has a usable estimate, ``a(v)`` stays
    above ``a_floor``, the partial integral of ``a`` reaches ``growth * vmax``
    with tail slope at least ``min_slope``, and ``psi(x)/x`` decreases on the
    grid.  Divergence of the full integral cannot be decided from finite
    data, so the verdict is always marked heuristic.
    """
    rep = estimate_condition_A(psi, vmax, xgrid)
    full_domain = not rep.insufficient_domain
    a_min = float(np.nanmin(rep.a_regularized)) if not np.all(np.isnan(rep.a_regularized)) else 0.0
    total = float(rep.partial_integral[-1])
    half = len(rep.v) // 2
    slope = (total - float(rep.partial_integral[half])) / (rep.v[-1] - rep.v[half])
    o_of_x = _psi_over_x_decreasing(psi, rep.x)
    ok = full_domain and a_min >= a_floor and total >= growth * vmax and slope >= min_slope and o_of_x
    return ClassVerdict(
        "class_K",
        psi.label,
        Verdict.of(ok),
        heuristic=True,
        caveat="finite-range evidence: divergence of the integral of a(u) is not decidable from data",
        details={"vmax": vmax, "a_min": a_min, "partial_integral": total, "tail_slope": slope,
                 "full_domain": full_domain, "psi_o_of_x": o_of_x,
                 "insufficient_v": rep.insufficient_domain, "report": rep},
    )


def check_class_K1(
    psi: PsiSpec,
    xmax: float = 1e8,
    tol: float = 0.02,
    residual_tol: float = 1e-2,
    vlist=(-2.0, -1.0, 1.0, 2.0),
) -> ClassVerdict:
    """Evidence for class K1: regular variation with index below one,
    ``x/psi(x)`` increasing, and the asymptotic smoothness expansion.

    The local index ``x psi'(x) / psi(x)`` is estimated by central
    differences with step ``psi(x)/100`` on a dyadic grid up to ``xmax``.
    """
    top = int(math.ceil(math.log2(xmax)))
    lo = max(4, int(math.ceil(math.log2(max(psi.x0, 1.0)))) + 2)
    xs = 2.0 ** np.arange(lo, top + 1)
    alpha_hat = np.array([
        x * central_derivative(lambda t: math.log(psi(t)), x, psi(x) / 100.0) for x in xs
    ])
    tail = alpha_hat[len(xs) // 2:]
    spread = float(tail.max() - tail.min())
    alpha = float(alpha_hat[-1])
    theta_vals = np.array([theta(psi, x) for x in xs])
    theta_up = bool(np.all(np.diff(theta_vals) > 0))
    residual = np.full(len(xs), np.nan)
    for j, x in enumerate(xs):
        p = psi(x)
        worst = 0.0
        for v in vlist:
            d = v * p
            if x + d < max(psi.x0, 0.5 * x):
                continue
            worst = max(worst, abs(psi(x + d) - p - alpha * d * p / x) / p)
        residual[j] = worst
    mid = len(xs) // 2
    smooth = bool(residual[-1] <= residual_tol and residual[-1] <= residual[mid] + TIE_SLACK)
    details = {"alpha_hat": alpha, "alpha_spread": spread, "theta_increasing": theta_up,
               "smoothness_residual": float(residual[-1]), "smooth": smooth,
               "x": xs, "alpha_trace": alpha_hat, "residual_trace": residual}
    if spread > tol:
        verdict = Verdict.INDETERMINATE
    else:
        verdict = Verdict.of(alpha < 1.0 - tol and theta_up and smooth)
    return ClassVerdict("class_K1", psi.label, verdict, heuristic=True,
                        caveat="index estimated by finite differences up to x=%g" % xs[-1], details=details)


# --------------------------------------------------------------------------
# gamma shift r(x, v)


def shift_integral(psi: PsiSpec, x: float, r: float) -> float:
    """``I(r, x) = int_0^r psi(x) / psi(x + z psi(x)) dz = gamma(x + r psi(x)) - gamma(x)``."""
    p = psi(x)
    return adaptive_simpson(lambda z: p / psi(x + z * p), 0.0, r)


def solve_shift(psi: PsiSpec, x: float, v: float, r_cap: float = 1e8) -> float:
    """``r`` with ``gamma(x + r psi(x)) = gamma(x) + v``."""
    if v == 0:
        return 0.0
    if v > 0:
        # integrand <= 1 for non-decreasing psi, so r >= v
        try:
            return solve_increasing(lambda r: shift_integral(psi, x, r), v, 0.0, 2.0 * v, cap=r_cap)
        except ArithmeticError as exc:
            raise ShiftError(f"no shift below r_cap={r_cap!r} for x={x!r}, v={v!r}") from exc
    p = psi(x)
    r_min = (1.0 - x) / p  # keep x + r psi(x) >= 1
    if shift_integral(psi, x, r_min) > v:
        raise ShiftError(f"gamma cannot drop by {-v!r} from x={x!r}")
    from scipy.optimize import brentq

    return brentq(lambda r: shift_integral(psi, x, r) - v, r_min, 0.0, xtol=1e-300, rtol=8.9e-16, maxiter=500)


def shift_bound(report: ConditionAReport, v: float) -> float:
    """``r_v`` solving ``int_0^r a(z) dz = v`` from a condition-(A) report; inf if out of range."""
    if v <= 0:
        return 0.0
    cum = report.partial_integral
    if cum[-1] < v:
        return math.inf
    return float(np.interp(v, cum, report.v))
