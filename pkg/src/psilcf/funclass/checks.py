"""Membership checks for psi-locally constant functions and relatives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .functions import NonPositiveValueError, PositiveFunction, as_function
from .grids import TIE_SLACK, geometric_grid, non_increasing, tail_half
from .numerics import central_derivative
from .psi import PsiSpec, gamma, gamma_inverse, theta, theta_inverse
from .verdicts import ClassVerdict, Verdict

DEFAULT_VLIST = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)
DEFAULT_C = 0.5
DEFAULT_TOL = 1e-2


@dataclass
class ConvergenceDiagnostic:
    """Ratios ``g(x + v psi(x)) / g(x)`` on a (v, x) grid and their sup-deviation ``H(x)``."""

    function: str
    psi: str
    x: np.ndarray
    v: np.ndarray
    ratios: np.ndarray  # shape (len(v), len(x)); nan where the pair was skipped
    H: np.ndarray
    tol: float
    verdict: Verdict
    window: tuple[float, float]
    c: float = DEFAULT_C
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def rows(self, check: str = "psi_lcf"):
        for i, v in enumerate(self.v):
            for j, x in enumerate(self.x):
                yield {"check": check, "function": self.function, "psi": self.psi, "v": float(v),
                       "x": float(x), "value": float(self.ratios[i, j]), "verdict": self.verdict.value}

    def summary(self) -> dict:
        finite = self.H[np.isfinite(self.H)]
        return {"check": "psi_lcf", "function": self.function, "psi": self.psi, "verdict": self.verdict.value,
                "tol": self.tol, "H_last": float(self.H[-1]), "x_last": float(self.x[-1]),
                "H_max": float(finite.max()) if finite.size else math.nan,
                "v_window": list(self.window), "c": self.c}


def _admissible(x: float, y: float, c: float) -> bool:
    return y >= c * x and y > 0


def _safe_log(g: PositiveFunction, x: float) -> float:
    lx = g.log(x)
    if math.isnan(lx):
        raise NonPositiveValueError(f"{g.label} is not positive at x={x!r}")
    return lx


def _deviation(g: PositiveFunction, lx: float, y: float) -> tuple[float, float]:
    ly = _safe_log(g, y)
    d = ly - lx
    if d > 709.0:
        return math.inf, math.inf
    r = math.exp(d)
    return r, abs(math.expm1(d))


def check_psi_lcf(
    g,
    psi: PsiSpec,
    vlist: Sequence[float] = DEFAULT_VLIST,
    xgrid=None,
    tol: float = DEFAULT_TOL,
    c: float = DEFAULT_C,
) -> ConvergenceDiagnostic:
    """Test ``g(x + v psi(x)) / g(x) -> 1`` on the tail of a geometric grid.

    Pairs with ``x + v psi(x) < c x`` are outside the quantifier and are
    skipped rather than failed.  PASS needs ``H`` at the largest x within
    ``tol`` and a non-increasing ``H`` along the grid.
    """
    g = as_function(g)
    xs = tail_half(geometric_grid()) if xgrid is None else np.asarray(xgrid, dtype=float)
    vs = np.asarray(sorted(vlist), dtype=float)
    ratios = np.full((len(vs), len(xs)), np.nan)
    H = np.full(len(xs), np.nan)
    for j, x in enumerate(xs):
        lx = _safe_log(g, x)
        p = psi(x)
        worst = -1.0
        for i, v in enumerate(vs):
            y = x + v * p
            if not _admissible(x, y, c):
                continue
            ratios[i, j], dev = _deviation(g, lx, y)
            worst = max(worst, dev)
        if worst >= 0:
            H[j] = worst
    notes = []
    used = H[~np.isnan(H)]
    if used.size == 0:
        notes.append("every (v, x) pair violated x + v psi(x) >= c x")
        verdict = Verdict.INDETERMINATE
    else:
        ok = bool(np.isfinite(H[-1]) and H[-1] <= tol + TIE_SLACK and non_increasing(used))
        verdict = Verdict.of(ok)
    return ConvergenceDiagnostic(g.label, psi.label, xs, vs, ratios, H, tol, verdict,
                                 (float(vs[0]), float(vs[-1])), c, notes)


def uniform_deviation(g, psi: PsiSpec, v1: float, v2: float, x: float, vsteps: int = 201,
                      c: float = DEFAULT_C) -> float:
    """``sup_{v1 <= v <= v2} |g(x + v psi(x)) / g(x) - 1|`` over an evenly spaced v-grid."""
    g = as_function(g)
    lx = _safe_log(g, x)
    p = psi(x)
    worst = math.nan
    for v in np.linspace(v1, v2, vsteps):
        y = x + v * p
        if not _admissible(x, y, c):
            continue
        dev = _deviation(g, lx, y)[1]
        worst = dev if math.isnan(worst) else max(worst, dev)
    return worst


# --------------------------------------------------------------------------
# conjugates


def conjugate_gamma(g, psi: PsiSpec) -> PositiveFunction:
    """``t -> g(gamma^{-1}(t))``: a psi-l.c.f. becomes an l.c.f."""
    g = as_function(g)
    return PositiveFunction(lambda t: g.log(gamma_inverse(psi, t)), f"{g.label}@gamma_inv[{psi.label}]")


def conjugate_theta(g, psi: PsiSpec) -> PositiveFunction:
    """``t -> g(theta^{-1}(t))`` for psi of class K1."""
    g = as_function(g)
    return PositiveFunction(lambda t: g.log(theta_inverse(psi, t)), f"{g.label}@theta_inv[{psi.label}]")


def induced_grid(psi: PsiSpec, xgrid=None, clock: str = "gamma") -> np.ndarray:
    """Image of the x-grid under gamma or theta."""
    xs = tail_half(geometric_grid()) if xgrid is None else np.asarray(xgrid, dtype=float)
    f = gamma if clock == "gamma" else theta
    return np.array([f(psi, x) for x in xs])


def check_conjugate(g, psi: PsiSpec, clock: str = "gamma", xgrid=None, **kw) -> ConvergenceDiagnostic:
    """Plain l.c.f. check of the gamma- or theta-conjugate on the induced grid."""
    conj = conjugate_gamma(g, psi) if clock == "gamma" else conjugate_theta(g, psi)
    return check_psi_lcf(conj, PsiSpec.constant(), xgrid=induced_grid(psi, xgrid, clock), **kw)


# --------------------------------------------------------------------------
# local index and growth diagnostics


def extract_epsilon(g, psi: PsiSpec, x: float) -> float:
    """``psi(x) * d ln g / dx`` with step ``psi(x)/100``."""
    g = as_function(g)
    p = psi(x)
    d = central_derivative(g.log, x, p / 100.0)
    if not math.isfinite(d):
        raise ArithmeticError(f"difference quotient of ln {g.label} is not finite at x={x!r}")
    return p * d


def growth_ratio_trend(g, psi: PsiSpec, xgrid=None, clock: str = "gamma") -> dict:
    """``|ln g(x)| / clock(x)`` at the median and largest grid x.

    A psi-l.c.f. satisfies ``ln g = o(gamma)`` (and ``o(theta)`` for class
    K1), so the last value should sit below the median one.
    """
    g = as_function(g)
    xs = tail_half(geometric_grid()) if xgrid is None else np.asarray(xgrid, dtype=float)
    f = gamma if clock == "gamma" else theta
    vals = np.array([abs(g.log(x)) / f(psi, x) for x in xs])
    mid, last = float(vals[len(vals) // 2]), float(vals[-1])
    return {"clock": clock, "median": mid, "last": last, "decreasing": last <= mid + TIE_SLACK, "trace": vals}


# --------------------------------------------------------------------------
# upper-power


def check_upper_power(
    g,
    pgrid: Sequence[float] | None = None,
    xgrid=None,
    margin: float = 1e-6,
    p1: float | None = None,
    tol: float = DEFAULT_TOL,
) -> ClassVerdict:
    """``c(p) = inf_x g(x) / g(p x)`` on the x-tail; PASS needs an l.c.f.
    and ``min_{p >= p1} c(p)`` above ``margin``."""
    g = as_function(g)
    ps = np.linspace(0.1, 0.9, 9) if pgrid is None else np.asarray(pgrid, dtype=float)
    if np.any((ps <= 0) | (ps >= 1)):
        raise ValueError("pgrid must lie in (0, 1)")
    p1 = float(ps.min()) if p1 is None else float(p1)
    xs = tail_half(geometric_grid()) if xgrid is None else np.asarray(xgrid, dtype=float)
    lcf = check_psi_lcf(g, PsiSpec.constant(), xgrid=xs, tol=tol)
    logs = np.array([_safe_log(g, x) for x in xs])
    c_hat = np.empty(len(ps))
    for i, p in enumerate(ps):
        d = logs - np.array([_safe_log(g, p * x) for x in xs])
        c_hat[i] = math.exp(min(d.min(), 709.0))
    sel = c_hat[ps >= p1 - TIE_SLACK]
    c_min = float(sel.min()) if sel.size else math.nan
    ok = lcf.passed and c_min > margin
    return ClassVerdict("upper_power", "1", Verdict.of(ok),
                        caveat="" if lcf.passed else "not a locally constant function",
                        details={"function": g.label, "c_min": c_min, "p1": p1, "lcf": lcf.verdict.value,
                                 "p": ps, "c_hat": c_hat, "x": xs})
