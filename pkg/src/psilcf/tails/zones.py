"""Deviation zones ``x >= h(n)``, the side conditions on them, and the
matching choice of the width function psi."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..exprlang import ExprAst, UnknownIdentifierError, compile_scalar, parse, power_law_form, to_text
from ..funclass.psi import PsiSpec
from ..funclass.verdicts import ClassVerdict, Verdict
from .inverse import generalized_inverse, sigma
from .model import TailModel

FINITE = "finite-variance"
INFINITE = "infinite-variance"


class ZoneError(ValueError):
    pass


def parse_in_n(text: str) -> ExprAst:
    """Zone boundaries are written in ``n``; ``x`` is accepted as well."""
    try:
        return parse(text, "n")
    except UnknownIdentifierError:
        return parse(text, "x")


def regime_of(model: TailModel) -> str:
    if model.alpha is None or model.alpha < -2:
        return FINITE
    return INFINITE


@dataclass
class ZoneSpec:
    """Boundary ``h`` of the zone ``x >= h(n)`` and the variance regime."""

    h: str
    regime: str | None = None
    beta: float | None = None
    _ast: ExprAst = field(init=False, repr=False)

    def __post_init__(self):
        self._ast = parse_in_n(self.h)
        self._f = compile_scalar(self._ast)
        pl = power_law_form(self._ast)
        if self.beta is None and pl is not None:
            self.beta = float(pl[1])
        self._coef = pl[0] if pl is not None else None
        if self.regime not in (None, FINITE, INFINITE):
            raise ZoneError(f"unknown regime {self.regime!r}")

    def __call__(self, n: float) -> float:
        return self._f(n)

    def text(self) -> str:
        return to_text(self._ast, "n")

    def resolved(self, model: TailModel) -> "ZoneSpec":
        return self if self.regime else ZoneSpec(self.h, regime_of(model), self.beta)


def _increasing_top_half(values) -> bool:
    v = np.asarray(values, dtype=float)
    top = v[len(v) // 2:]
    return bool(np.all(np.diff(top) > 0))


def validate_zone(zone: ZoneSpec, model: TailModel, ngrid=None) -> dict:
    """``h(n)`` must outgrow ``sqrt(n ln n)`` (finite variance) or
    ``sigma(n)`` (infinite variance) over the top half of the n-grid."""
    zone = zone.resolved(model)
    ns = np.geomspace(16, 1e8, 25) if ngrid is None else np.asarray(ngrid, dtype=float)
    hs = np.array([zone(n) for n in ns])
    if zone.regime == FINITE:
        scale = np.sqrt(ns * np.log(ns))
    else:
        scale = np.array([sigma(model.V_sf, n) for n in ns])
    ratio = hs / scale
    ok = _increasing_top_half(ratio)
    if not np.all(np.diff(hs) >= 0):
        ok = False
    return {"regime": zone.regime, "n": ns, "ratio": ratio, "passed": ok}


def zone_flag_xlnn(n: float, x: float) -> float:
    """``x / sqrt(n ln n)``; must grow without bound for the single-big-jump asymptotics."""
    return x / math.sqrt(n * math.log(n)) if n > 1 else math.inf


def zone_flag_sigma(model: TailModel, n: float, x: float) -> float:
    return x / sigma(model.V_sf, n)


def ap5_ratio(model: TailModel, n: float, x: float) -> float:
    """``n V(x)^2 / F(x)``."""
    return n * model.V_sf(x) ** 2 / model.sf(x)


@dataclass
class Ap5Report:
    n: np.ndarray
    x: np.ndarray
    ratio: np.ndarray
    trend_ok: bool
    sufficient: bool
    sufficient_min: float

    @property
    def passed(self) -> bool:
        return self.trend_ok

    def summary(self) -> dict:
        return {"check": "ap5", "verdict": "PASS" if self.passed else "FAIL", "ratio_first": float(self.ratio[0]),
                "ratio_last": float(self.ratio[-1]), "sufficient_condition": self.sufficient,
                "sufficient_min": self.sufficient_min}


def check_ap5(model: TailModel, ns, xs, eps: float = 0.1, grid=None) -> Ap5Report:
    """``n V(x)^2 / F(x)`` along a zone path must decrease toward 0.

    Also reports the sufficient condition ``F(t) >= c V(t) t^{-eps}`` as the
    infimum of ``F(t) t^eps / V(t)`` on a log grid.
    """
    ns = np.atleast_1d(np.asarray(ns, dtype=float))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    r = np.array([ap5_ratio(model, n, x) for n, x in zip(ns, xs)])
    trend = bool(np.all(np.diff(r) < 0)) if len(r) > 1 else bool(r[0] < 1)
    grid = np.geomspace(max(model.x0, 1.0) * 2, 1e12, 60) if grid is None else grid
    vals = np.exp([model.log_sf(t) + eps * math.log(t) - model.log_V(t) for t in grid])
    smin = float(vals.min())
    sufficient = smin > 1e-12 and vals[-1] >= vals[len(vals) // 2] * (1 - 1e-9)
    return Ap5Report(ns, xs, r, trend, bool(sufficient), smin)


def choose_psi(zone: ZoneSpec, model: TailModel) -> PsiSpec:
    """Width function matched to the zone.

    Finite variance: ``psi(t) = sqrt(h^{-1}(t))``, i.e. ``t^{1/(2 beta)}`` for
    ``h(v) = c v^beta``.  Infinite variance: ``psi(t) = sigma(h^{-1}(t))``,
    i.e. ``t^{-1/(alpha beta)}`` for power-law V and h.
    """
    zone = zone.resolved(model)
    if not validate_zone(zone, model)["passed"]:
        raise ZoneError(f"zone h(n)={zone.h} does not outgrow the {zone.regime} scale")
    power_h = zone.beta is not None and zone._coef is not None
    if zone.regime == FINITE:
        if power_h:
            e = 1.0 / (2.0 * zone.beta)
            return PsiSpec(f"x^{e!r}", label=f"x^{e:.6g}")
        return PsiSpec(lambda t: max(1.0, math.sqrt(_h_inverse(zone, t))), label=f"sqrt(hinv[{zone.h}])")
    a = model.alpha
    power_v = model.V is None and model.kind == "pareto"
    if power_h and power_v:
        e = -1.0 / (a * zone.beta)
        return PsiSpec(f"x^{e!r}", label=f"x^{e:.6g}")
    return PsiSpec(lambda t: max(1.0, sigma(model.V_sf, max(1.0, _h_inverse(zone, t)))),
                   label=f"sigma(hinv[{zone.h}])")


def _h_inverse(zone: ZoneSpec, t: float) -> float:
    import warnings

    from .inverse import BelowRangeWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BelowRangeWarning)
        return generalized_inverse(zone, t, lo=1.0)


def check_left_tail(model: TailModel, grid=None) -> ClassVerdict:
    """``P(xi < -t) <= c_left V(t)``; the centered non-negative construction has
    support ``[x0 - m, inf)`` so the left tail vanishes beyond ``m - x0``."""
    grid = np.geomspace(1.0, 1e12, 60) if grid is None else np.asarray(grid, dtype=float)
    m = model.mean
    left = np.array([1.0 - model.sf(m - t) if m - t >= model.x0 else 0.0 for t in grid])
    bound = np.array([model.c_left * model.V_sf(t) for t in grid])
    ok = bool(np.all(left <= bound))
    return ClassVerdict("left_tail", "", Verdict.of(ok),
                        details={"support_left_end": model.x0 - m, "c_left": model.c_left})
