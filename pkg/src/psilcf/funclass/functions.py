from __future__ import annotations

import math
from typing import Callable

from ..exprlang import ExprAst, ExprDomainError, as_ast, evaluate_log, to_text


class NonPositiveValueError(ValueError):
    pass


class PositiveFunction:
    """A positive function handled through its logarithm ``l(x) = ln g(x)``.

    Ratios ``g(y)/g(x)`` are formed as ``exp(l(y) - l(x))`` so functions like
    ``exp(-x)`` or ``exp(x^0.6)`` stay usable far beyond double range.
    """

    def __init__(self, log: Callable[[float], float], label: str = "g"):
        self._log = log
        self.label = label

    @classmethod
    def from_expr(cls, expr: ExprAst | str, label: str | None = None) -> "PositiveFunction":
        ast = as_ast(expr)

        def log(x: float) -> float:
            try:
                return evaluate_log(ast, x)
            except ExprDomainError as exc:
                raise NonPositiveValueError(f"g is not positive at x={x!r}: {exc}") from exc

        return cls(log, label or (expr if isinstance(expr, str) else to_text(ast)))

    @classmethod
    def from_callable(cls, f: Callable[[float], float], label: str = "g") -> "PositiveFunction":
        def log(x: float) -> float:
            y = f(x)
            if not y > 0:
                raise NonPositiveValueError(f"g({x!r}) = {y!r} is not positive")
            return math.log(y)

        return cls(log, label)

    def log(self, x: float) -> float:
        return self._log(x)

    def __call__(self, x: float) -> float:
        try:
            return math.exp(self._log(x))
        except OverflowError:
            return math.inf

    def ratio(self, y: float, x: float) -> float:
        """``g(y) / g(x)``."""
        try:
            return math.exp(self._log(y) - self._log(x))
        except OverflowError:
            return math.inf

    def __repr__(self) -> str:
        return f"PositiveFunction({self.label!r})"


def as_function(g: PositiveFunction | ExprAst | str | Callable[[float], float], label: str | None = None) -> PositiveFunction:
    if isinstance(g, PositiveFunction):
        return g
    if isinstance(g, (str, ExprAst)):
        return PositiveFunction.from_expr(g, label)
    return PositiveFunction.from_callable(g, label or getattr(g, "__name__", "g"))
