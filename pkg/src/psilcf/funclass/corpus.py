"""Named test functions and widths used across the checks and the CLI."""

from __future__ import annotations

from .functions import PositiveFunction
from .psi import PsiSpec
from .representation import RepresentationSpec, build_psi_lcf

EXPRESSIONS = {
    "power": "x^-3",
    "power_log": "x^-3*ln(x)",
    "stretched_quarter": "exp(x^0.25)",
    "stretched_half": "exp(sqrt(x))",
    "exponential": "exp(-x)",
    "constant": "5",
    "stretched_060": "exp(x^0.6)",
}

WIDTHS = {"1": "1", "sqrt": "sqrt(x)", "linear": "x"}


def built_example() -> PositiveFunction:
    """``exp(int_0^gamma(x) du / ln(e + e^u))`` for ``psi = sqrt``; grows like ``gamma(x)``."""
    return build_psi_lcf(RepresentationSpec(1.0, "1/ln(e+x)"), PsiSpec("sqrt(x)"))


def corpus() -> dict[str, PositiveFunction]:
    out = {name: PositiveFunction.from_expr(text) for name, text in EXPRESSIONS.items()}
    out["built"] = built_example()
    return out


def widths() -> dict[str, PsiSpec]:
    return {name: PsiSpec(text, label=text) for name, text in WIDTHS.items()}
