"""Right-tail models ``F(x) = P(xi' >= x)`` of a non-negative variable.

The walk increments are ``xi = xi' - m`` with ``m = E xi'``.  Pure power and
exponential tails are inverted in closed form; anything else goes through
a monotone cubic table in ``(ln u, ln x)`` refined by Newton steps.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..exprlang import ExprDomainError, as_ast, compile_numpy, evaluate_log, exponential_rate, power_law_form
from ..funclass.numerics import adaptive_simpson, solve_increasing

TABLE_NODES = 4096
TABLE_FLOOR = 1e-18  # smallest tail level covered by the table before power-law extrapolation


class TailModelError(ValueError):
    pass


class DivergingMeanError(TailModelError):
    pass


@dataclass(frozen=True)
class TailModel:
    """``F(x) = expr(x)`` for ``x >= x0`` and 1 below.

    ``alpha`` is the tail index (``None`` for light tails); ``V`` optionally
    names a dominating function ``F <= V``; ``c_left`` bounds the left tail
    of the centered variable by ``c_left * V``.
    """

    expr: str
    alpha: float | None = None
    x0: float | None = None
    V: str | None = None
    c_left: float = 1.0
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        ast = as_ast(self.expr)
        object.__setattr__(self, "_ast", ast)
        object.__setattr__(self, "_np", compile_numpy(ast))
        pl = power_law_form(ast)
        rate = exponential_rate(ast)
        if pl is not None:
            kind = "pareto"
            if self.alpha is None:
                object.__setattr__(self, "alpha", float(pl[1]))
            elif abs(self.alpha - pl[1]) > 1e-12:
                raise TailModelError(f"alpha={self.alpha!r} disagrees with the exponent {pl[1]!r} of {self.expr}")
        elif rate is not None:
            kind = "exponential"
        else:
            kind = "table"
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "_power", pl)
        object.__setattr__(self, "_rate", rate)
        if self.x0 is None:
            object.__setattr__(self, "x0", self._solve_x0())
        if abs(self.log_sf(self.x0)) > 1e-9:
            raise TailModelError(f"F({self.x0!r}) = {math.exp(self.log_sf(self.x0))!r}, expected 1")
        if not self.name:
            object.__setattr__(self, "name", self.expr)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def pareto(cls, alpha: float, x0: float = 1.0, **kw) -> "TailModel":
        a = float(alpha)
        scale = x0 ** (-a)
        expr = f"x^{a!r}" if x0 == 1 else f"{scale!r}*x^{a!r}"
        return cls(expr, alpha=a, x0=float(x0), name=kw.pop("name", f"pareto({a:g})"), **kw)

    @classmethod
    def exponential(cls, rate: float = 1.0, **kw) -> "TailModel":
        return cls(f"exp(-{float(rate)!r}*x)", alpha=None, x0=0.0, name=kw.pop("name", f"exponential({rate:g})"), **kw)

    def _solve_x0(self) -> float:
        if self._power is not None:
            c, a = self._power
            return c ** (-1.0 / a)
        if self._rate is not None:
            return 0.0
        # smallest x with F(x) <= 1 on a decreasing tail
        return solve_increasing(lambda x: -self._log_expr(x), 0.0, 1e-12, 1.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("_cache")
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "TailModel":
        allowed = {"expr", "alpha", "x0", "V", "c_left", "name"}
        unknown = set(d) - allowed
        if unknown:
            raise TailModelError(f"unknown tail-model keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def loads(cls, text: str) -> "TailModel":
        return cls.from_dict(json.loads(text))

    def __reduce__(self):
        # compiled evaluators are closures; rebuild them in worker processes
        return (_rebuild, (self.to_dict(),))

    # -- tail function -------------------------------------------------------

    def _log_expr(self, x: float) -> float:
        try:
            return evaluate_log(self._ast, x)
        except ExprDomainError as exc:
            raise TailModelError(f"tail {self.expr} is not positive at x={x!r}") from exc

    def log_sf(self, x: float) -> float:
        if x < self.x0:
            return 0.0
        return self._log_expr(x)

    def sf(self, x):
        """``F(x)``; accepts scalars or arrays."""
        if np.ndim(x) == 0:
            x = float(x)
            if x < self.x0:
                return 1.0
            if self._power is not None:
                c, a = self._power
                return c * x**a
            return math.exp(self._log_expr(x))
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        m = x >= self.x0
        with np.errstate(all="ignore"):
            out[m] = self._np(x[m])
        return out

    def V_sf(self, x: float) -> float:
        """Dominating function; defaults to F itself."""
        if self.V is None:
            return self.sf(x)
        return math.exp(self.log_V(x))

    def log_V(self, x: float) -> float:
        if self.V is None:
            return self.log_sf(x)
        if x < self.x0:
            return 0.0
        return evaluate_log(as_ast(self.V), x)

    def check_dominance(self, grid=None, slack: float = 1e-12) -> bool:
        if self.V is None:
            return True
        grid = np.geomspace(max(self.x0, 1.0), 1e12, 200) if grid is None else grid
        return all(self.sf(t) <= self.V_sf(t) * (1 + slack) for t in grid)

    # -- centering -----------------------------------------------------------

    @cached_property
    def mean(self) -> float:
        return centering_mean(self)

    # -- inversion -----------------------------------------------------------

    def isf(self, u):
        """``F^{-1}(u)`` for ``u in (0, 1]``: the largest x with ``F(x) >= u``, clamped to x0."""
        scalar = np.ndim(u) == 0
        out = self.isf_inplace(np.array(u, dtype=float, ndmin=1))
        return float(out[0]) if scalar else out

    def isf_inplace(self, u: np.ndarray) -> np.ndarray:
        """Overwrite ``u`` (levels in (0, 1]) with ``F^{-1}(u)``; returns the result array."""
        if self._power is not None:
            c, a = self._power
            np.power(u, 1.0 / a, out=u)
            s = c ** (-1.0 / a)
            if s != 1.0:
                u *= s
            np.maximum(u, self.x0, out=u)
            return u
        if self._rate is not None:
            np.log(u, out=u)
            u *= -1.0 / self._rate
            np.maximum(u, self.x0, out=u)
            return u
        return self._table_isf(u)

    def _table(self):
        if "table" not in self._cache:
            self._cache["table"] = _build_table(self)
        return self._cache["table"]

    def table_nodes(self) -> np.ndarray:
        """x-nodes of the inversion table (table-kind models only)."""
        return self._table().x_nodes.copy()

    def _table_isf(self, u: np.ndarray) -> np.ndarray:
        tab = self._table()
        lu = np.log(u)
        inside = lu >= tab.lu_min
        lx = np.empty_like(lu)
        lx[inside] = tab.interp(lu[inside])
        lx[~inside] = tab.lx_min + tab.slope * (lu[~inside] - tab.lu_min)
        # Newton on ln F(e^s) = ln u, derivative taken from the table
        d = np.where(inside, tab.dinterp(np.maximum(lu, tab.lu_min)), tab.slope)
        for _ in range(3):
            x = np.exp(lx)
            with np.errstate(all="ignore"):
                lf = np.log(self._np(x))
            step = (lu - lf) * d
            ok = np.isfinite(step) & (x > self.x0)
            lx[ok] += step[ok]
        x = np.exp(lx)
        # levels that are exactly table levels map back to their node
        k = np.minimum(np.searchsorted(tab.levels_up, u), len(tab.levels_up) - 1)
        hit = tab.levels_up[k] == u
        x[hit] = tab.x_nodes[::-1][k[hit]]
        x[u >= 1.0] = self.x0
        np.maximum(x, self.x0, out=x)
        u[...] = x
        return u


def _rebuild(d: dict) -> TailModel:
    return TailModel.from_dict(d)


class _Table(NamedTuple):
    interp: PchipInterpolator
    dinterp: PchipInterpolator
    lu_min: float
    lx_min: float
    slope: float
    x_nodes: np.ndarray  # increasing
    levels_up: np.ndarray  # F at the nodes, increasing (so reversed w.r.t. x_nodes)


def _build_table(model: TailModel) -> _Table:
    x_lo = max(model.x0, 1e-300)
    x_hi = max(2.0 * x_lo, 1.0)
    while model.log_sf(x_hi) > math.log(TABLE_FLOOR):
        x_hi *= 2.0
        if x_hi > 1e300:
            raise TailModelError(f"tail {model.expr} does not reach {TABLE_FLOOR:g} below 1e300")
    lo = math.log(x_lo) if model.x0 > 0 else math.log(x_hi) - 60.0
    xs = np.array([math.exp(s) for s in np.linspace(lo, math.log(x_hi), TABLE_NODES)])
    levels = np.array([model.sf(x) for x in xs])
    keep = np.concatenate(([True], np.diff(levels) < 0))
    # flat stretches would make the inverse multivalued
    xs, levels = xs[keep], levels[keep]
    if len(xs) < 16:
        raise TailModelError(f"tail {model.expr} is not strictly decreasing on its table range")
    lx, lu = np.log(xs), np.log(levels)
    interp = PchipInterpolator(lu[::-1], lx[::-1], extrapolate=False)
    slope = (lx[-1] - lx[-2]) / (lu[-1] - lu[-2])
    return _Table(interp, interp.derivative(), float(lu[-1]), float(lx[-1]), float(slope), xs, levels[::-1].copy())


def local_index(model: TailModel, x: float, h: float = 1e-3) -> float:
    """``d ln F / d ln x`` at ``x`` by a central difference in ``ln x``."""
    return (model.log_sf(x * math.exp(h)) - model.log_sf(x * math.exp(-h))) / (2.0 * h)


def centering_mean(model: TailModel, window: float = 1e12) -> float:
    """``m = x0 + int_{x0}^inf F(t) dt``.

    Quadrature in ``s = ln t`` up to ``X = x0 + window``, then the tail
    ``int_X^inf F`` in closed form: ``X F(X) / (-alpha - 1)`` for regularly
    varying F (slowly varying factor frozen at X) or ``F(X) / rate`` for an
    exponential tail.
    """
    if model.alpha is not None and model.alpha >= -1:
        raise DivergingMeanError(f"tail index {model.alpha!r} >= -1: the mean diverges")
    if model._power is not None:
        c, a = model._power
        x0 = model.x0
        return x0 + c * x0 ** (a + 1) / (-a - 1)
    if model._rate is not None:
        return model.x0 + math.exp(model.log_sf(model.x0)) / model._rate
    x0 = model.x0
    near = adaptive_simpson(lambda t: model.sf(t), x0, x0 + 1.0, abs_tol=1e-13)
    X = x0 + window
    far = adaptive_simpson(lambda s: math.exp(model.log_sf(math.exp(s)) + s), math.log(x0 + 1.0), math.log(X),
                           abs_tol=1e-13)
    FX = math.exp(model.log_sf(X))
    index = model.alpha if model.alpha is not None else local_index(model, X)
    if index >= -1:
        raise DivergingMeanError(f"local tail index {index!r} at x={X:g} is >= -1")
    tail = X * FX / (-index - 1.0)
    return x0 + near + far + tail
