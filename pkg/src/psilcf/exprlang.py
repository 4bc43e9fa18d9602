"""Single-variable arithmetic expressions.

Every user-facing function in the toolkit (g, psi, L, V, h, c, eps) can be
written as text such as ``"x^-3"`` or ``"exp(x^0.25)"``.  Grammar, loosest
binding first::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := atom ("^" unary)?          # right associative
    atom    := NUMBER | VAR | CONST | FUNC "(" expr ("," expr)* ")" | "(" expr ")"

``FUNC`` is one of exp, ln (alias log), sqrt, abs, min, max; ``CONST`` is
``e`` or ``pi``.  There is no implicit multiplication.  Unary minus on a
literal folds into a negative constant; on anything else it becomes
``mul(-1, operand)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np

CONST = "const"
VAR = "var"
ADD = "add"
SUB = "sub"
MUL = "mul"
DIV = "div"
POW = "pow"
EXP = "exp"
LN = "ln"
SQRT = "sqrt"
ABS = "abs"
MIN = "min"
MAX = "max"

BINARY = {ADD, SUB, MUL, DIV, POW, MIN, MAX}
UNARY = {EXP, LN, SQRT, ABS}
LEAVES = {CONST, VAR}

_FUNCTIONS = {"exp": EXP, "ln": LN, "log": LN, "sqrt": SQRT, "abs": ABS, "min": MIN, "max": MAX}
_NAMED_CONSTANTS = {"e": math.e, "pi": math.pi}
_SYMBOL = {ADD: "+", SUB: "-", MUL: "*", DIV: "/", POW: "^"}


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, expected: str | None = None):
        self.offset = offset
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at offset {offset}{hint}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ExprDomainError(ExprError, ArithmeticError):
    def __init__(self, message: str, node: "ExprAst"):
        self.node = node
        super().__init__(f"{message} in '{to_text(node)}'")


@dataclass(frozen=True)
class ExprAst:
    kind: str
    children: tuple["ExprAst", ...] = ()
    value: float = 0.0

    def __post_init__(self):
        arity = len(self.children)
        if self.kind in LEAVES:
            ok = arity == 0
        elif self.kind in UNARY:
            ok = arity == 1
        elif self.kind in BINARY:
            ok = arity == 2
        else:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if not ok:
            raise ValueError(f"{self.kind} node cannot have {arity} children")

    def __str__(self) -> str:
        return to_text(self)

    def __call__(self, x: float) -> float:
        return evaluate(self, x)


def constant(c: float) -> ExprAst:
    return ExprAst(CONST, value=float(c))


def variable() -> ExprAst:
    return ExprAst(VAR)


def node(kind: str, *children: ExprAst) -> ExprAst:
    return ExprAst(kind, tuple(children))


# --------------------------------------------------------------------------
# tokenizer / parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


@dataclass
class _Token:
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, "number, name or operator")
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variable_name: str):
        self.text = text
        self.var = variable_name
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def _advance(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def _expect(self, op: str) -> None:
        if self.tok.kind != "op" or self.tok.text != op:
            found = self.tok.text or "end of input"
            raise ExprSyntaxError(f"unexpected {found!r}", self.tok.offset, repr(op))
        self._advance()

    def _is_op(self, *ops: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def parse(self) -> ExprAst:
        if self.tok.kind == "end":
            raise ExprSyntaxError("empty expression", 0, "an expression")
        ast = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset, "operator or end of input")
        return ast

    def expr(self) -> ExprAst:
        left = self.term()
        while self._is_op("+", "-"):
            op = self._advance().text
            left = node(ADD if op == "+" else SUB, left, self.term())
        return left

    def term(self) -> ExprAst:
        left = self.unary()
        while self._is_op("*", "/"):
            op = self._advance().text
            left = node(MUL if op == "*" else DIV, left, self.unary())
        return left

    def unary(self) -> ExprAst:
        if self._is_op("-"):
            self._advance()
            operand = self.unary()
            if operand.kind == CONST:
                return constant(-operand.value)
            return node(MUL, constant(-1.0), operand)
        if self._is_op("+"):
            self._advance()
            return self.unary()
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        if self._is_op("^"):
            self._advance()
            return node(POW, base, self.unary())
        return base

    def atom(self) -> ExprAst:
        tok = self.tok
        if tok.kind == "num":
            self._advance()
            return constant(float(tok.text))
        if tok.kind == "name":
            self._advance()
            if tok.text == self.var:
                return variable()
            if tok.text in _FUNCTIONS:
                return self._call(_FUNCTIONS[tok.text], tok)
            if tok.text in _NAMED_CONSTANTS:
                return constant(_NAMED_CONSTANTS[tok.text])
            raise UnknownIdentifierError(
                f"unknown identifier {tok.text!r}", tok.offset, f"'{self.var}', a function or e/pi"
            )
        if self._is_op("("):
            self._advance()
            inner = self.expr()
            self._expect(")")
            return inner
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", tok.offset, "number, variable, function or '('")

    def _call(self, kind: str, name_tok: _Token) -> ExprAst:
        if not self._is_op("("):
            raise ExprSyntaxError(f"function {name_tok.text!r} needs arguments", self.tok.offset, "'('")
        self._advance()
        args = [self.expr()]
        while self._is_op(","):
            self._advance()
            args.append(self.expr())
        self._expect(")")
        want = 2 if kind in BINARY else 1
        if len(args) != want:
            raise ExprSyntaxError(
                f"{name_tok.text} takes {want} argument(s), got {len(args)}", name_tok.offset
            )
        return node(kind, *args)


def parse(text: str, variable_name: str = "x") -> ExprAst:
    """Parse ``text`` into an :class:`ExprAst`.

    Raises :class:`ExprSyntaxError` (with ``offset`` and ``expected``) on
    malformed input and :class:`UnknownIdentifierError` for names other than
    the variable, the supported functions, ``e`` and ``pi``.
    """
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", 0, "an expression")
    return _Parser(text, variable_name).parse()


def as_ast(expr: ExprAst | str | float | int) -> ExprAst:
    if isinstance(expr, ExprAst):
        return expr
    if isinstance(expr, (int, float)):
        return constant(expr)
    return parse(expr)


def to_text(ast: ExprAst, variable_name: str = "x") -> str:
    """Fully parenthesised text form; ``parse(to_text(a))`` rebuilds ``a`` exactly."""
    k = ast.kind
    if k == CONST:
        r = repr(ast.value)
        return f"({r})" if r.startswith("-") else r
    if k == VAR:
        return variable_name
    if k in _SYMBOL:
        a, b = (to_text(c, variable_name) for c in ast.children)
        return f"({a} {_SYMBOL[k]} {b})"
    args = ", ".join(to_text(c, variable_name) for c in ast.children)
    return f"{k}({args})"


# --------------------------------------------------------------------------
# evaluation


def _is_integer(v: float) -> bool:
    return math.isfinite(v) and v == math.floor(v)


def _pow(node_: ExprAst, a: float, b: float) -> float:
    if a < 0 and not _is_integer(b):
        raise ExprDomainError("negative base with non-integer exponent", node_)
    if a == 0 and b < 0:
        raise ExprDomainError("division by zero (zero to a negative power)", node_)
    try:
        return a**b
    except OverflowError:
        if a < 0 and _is_integer(b) and int(b) % 2:
            return -math.inf
        return math.inf


def _eval(ast: ExprAst, x: float) -> float:
    k = ast.kind
    if k == CONST:
        return ast.value
    if k == VAR:
        return x
    if k in BINARY:
        a = _eval(ast.children[0], x)
        b = _eval(ast.children[1], x)
        if k == ADD:
            return a + b
        if k == SUB:
            return a - b
        if k == MUL:
            return a * b
        if k == DIV:
            if b == 0:
                raise ExprDomainError("division by zero", ast)
            return a / b
        if k == POW:
            return _pow(ast, a, b)
        if k == MIN:
            return min(a, b)
        return max(a, b)
    a = _eval(ast.children[0], x)
    if k == EXP:
        try:
            return math.exp(a)
        except OverflowError:
            return math.inf
    if k == LN:
        if a <= 0:
            raise ExprDomainError("logarithm of non-positive value", ast)
        return math.log(a)
    if k == SQRT:
        if a < 0:
            raise ExprDomainError("square root of negative value", ast)
        return math.sqrt(a)
    return abs(a)


def evaluate(ast: ExprAst | str, x: float) -> float:
    """IEEE double evaluation of ``ast`` at ``x``; overflow gives +-inf."""
    return _eval(as_ast(ast), float(x))


def evaluate_mp(ast: ExprAst | str, x) -> mpmath.mpf:
    """Evaluate with mpmath numbers; used where doubles would overflow."""
    return _eval_mp(as_ast(ast), mpmath.mpf(x))


def _eval_mp(ast: ExprAst, x):
    k = ast.kind
    if k == CONST:
        return mpmath.mpf(ast.value)
    if k == VAR:
        return x
    if k in BINARY:
        a = _eval_mp(ast.children[0], x)
        b = _eval_mp(ast.children[1], x)
        if k == ADD:
            return a + b
        if k == SUB:
            return a - b
        if k == MUL:
            return a * b
        if k == DIV:
            if b == 0:
                raise ExprDomainError("division by zero", ast)
            return a / b
        if k == POW:
            if a < 0 and b != mpmath.floor(b):
                raise ExprDomainError("negative base with non-integer exponent", ast)
            if a == 0 and b < 0:
                raise ExprDomainError("division by zero (zero to a negative power)", ast)
            return a**b
        return min(a, b) if k == MIN else max(a, b)
    a = _eval_mp(ast.children[0], x)
    if k == EXP:
        return mpmath.exp(a)
    if k == LN:
        if a <= 0:
            raise ExprDomainError("logarithm of non-positive value", ast)
        return mpmath.log(a)
    if k == SQRT:
        if a < 0:
            raise ExprDomainError("square root of negative value", ast)
        return mpmath.sqrt(a)
    return abs(a)


def _signed_log(ast: ExprAst, x: float) -> tuple[int, float]:
    """Return (sign, ln|value|) so that huge and tiny values stay finite."""
    k = ast.kind
    if k == CONST or k == VAR:
        v = ast.value if k == CONST else x
        if v == 0:
            return 0, -math.inf
        return (1 if v > 0 else -1), math.log(abs(v))
    if k in (ADD, SUB):
        sa, la = _signed_log(ast.children[0], x)
        sb, lb = _signed_log(ast.children[1], x)
        if k == SUB:
            sb = -sb
        if sb == 0:
            return sa, la
        if sa == 0:
            return sb, lb
        if la < lb:
            sa, la, sb, lb = sb, lb, sa, la
        d = math.exp(lb - la)
        if sa == sb:
            return sa, la + math.log1p(d)
        if d == 1.0:
            return 0, -math.inf
        return sa, la + math.log1p(-d)
    if k in (MUL, DIV):
        sa, la = _signed_log(ast.children[0], x)
        sb, lb = _signed_log(ast.children[1], x)
        if k == DIV:
            if sb == 0:
                raise ExprDomainError("division by zero", ast)
            return sa * sb, la - lb
        return sa * sb, la + lb
    if k == POW:
        sa, la = _signed_log(ast.children[0], x)
        b = _eval(ast.children[1], x)
        if sa == 0:
            if b < 0:
                raise ExprDomainError("division by zero (zero to a negative power)", ast)
            return (0, -math.inf) if b > 0 else (1, 0.0)
        if sa < 0:
            if not _is_integer(b):
                raise ExprDomainError("negative base with non-integer exponent", ast)
            sign = -1 if int(b) % 2 else 1
            return sign, b * la
        return 1, b * la
    if k in (MIN, MAX):
        pa = _signed_log(ast.children[0], x)
        pb = _signed_log(ast.children[1], x)
        key = lambda p: (p[0], p[0] * p[1]) if p[0] else (0, 0.0)  # noqa: E731
        lo, hi = sorted((pa, pb), key=key)
        return lo if k == MIN else hi
    sa, la = _signed_log(ast.children[0], x)
    if k == EXP:
        a = sa * math.exp(la) if sa else 0.0
        return 1, a
    if k == LN:
        if sa <= 0:
            raise ExprDomainError("logarithm of non-positive value", ast)
        if la == 0:
            return 0, -math.inf
        return (1 if la > 0 else -1), math.log(abs(la))
    if k == SQRT:
        if sa < 0:
            raise ExprDomainError("square root of negative value", ast)
        return sa, 0.5 * la
    return abs(sa), la


def evaluate_log(ast: ExprAst | str, x: float) -> float:
    """Natural log of a positive expression value, robust to over/underflow.

    The direct double evaluation is used when it is finite and normal;
    otherwise the expression is re-evaluated in sign/log-magnitude form.
    """
    ast = as_ast(ast)
    x = float(x)
    try:
        v = _eval(ast, x)
    except ExprDomainError:
        v = math.nan
    if math.isfinite(v):
        if v > 1e-300:
            return math.log(v)
        if v < -1e-300:
            raise ExprDomainError("non-positive value", ast)
    sign, lv = _signed_log(ast, x)
    if sign <= 0:
        raise ExprDomainError("non-positive value", ast)
    return lv


def compile_numpy(ast: ExprAst | str) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorised evaluator; domain violations produce nan instead of raising."""
    ast = as_ast(ast)

    def build(n: ExprAst):
        k = n.kind
        if k == CONST:
            c = n.value
            return lambda x: np.full_like(x, c)
        if k == VAR:
            return lambda x: x
        fs = [build(c) for c in n.children]
        if k in BINARY:
            fa, fb = fs
            op = {
                ADD: np.add,
                SUB: np.subtract,
                MUL: np.multiply,
                DIV: np.divide,
                POW: np.power,
                MIN: np.minimum,
                MAX: np.maximum,
            }[k]
            return lambda x: op(fa(x), fb(x))
        (fa,) = fs
        op = {EXP: np.exp, LN: np.log, SQRT: np.sqrt, ABS: np.abs}[k]
        return lambda x: op(fa(x))

    f = build(ast)

    def run(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return f(x)

    return run


def depends_on_variable(ast: ExprAst) -> bool:
    if ast.kind == VAR:
        return True
    return any(depends_on_variable(c) for c in ast.children)


def power_law_form(ast: ExprAst) -> tuple[float, float] | None:
    """Recognise ``c * x^a`` (in a few spellings); return ``(c, a)`` or None."""
    k = ast.kind
    if k == VAR:
        return 1.0, 1.0
    if k == CONST:
        return ast.value, 0.0
    if k == POW:
        base, ex = ast.children
        if ex.kind != CONST:
            return None
        inner = power_law_form(base)
        if inner is None or inner[0] <= 0:
            return None
        c, a = inner
        return c**ex.value, a * ex.value
    if k == SQRT:
        inner = power_law_form(ast.children[0])
        if inner is None or inner[0] <= 0:
            return None
        return math.sqrt(inner[0]), inner[1] / 2
    if k in (MUL, DIV):
        pa = power_law_form(ast.children[0])
        pb = power_law_form(ast.children[1])
        if pa is None or pb is None:
            return None
        if k == MUL:
            return pa[0] * pb[0], pa[1] + pb[1]
        if pb[0] == 0:
            return None
        return pa[0] / pb[0], pa[1] - pb[1]
    return None


def exponential_rate(ast: ExprAst) -> float | None:
    """Recognise ``exp(-lam * x)`` and return ``lam`` (> 0), else None."""
    if ast.kind != EXP:
        return None
    form = power_law_form(ast.children[0])
    if form is None or form[1] != 1.0 or form[0] >= 0:
        return None
    return -form[0]


def compile_scalar(ast: ExprAst | str) -> Callable[[float], float]:
    """Closure-compiled equivalent of :func:`evaluate` (same results, faster)."""
    ast = as_ast(ast)

    def build(n: ExprAst):
        k = n.kind
        if k == CONST:
            c = n.value
            return lambda x: c
        if k == VAR:
            return lambda x: x
        if k in BINARY:
            fa, fb = (build(c) for c in n.children)
            if k == ADD:
                return lambda x: fa(x) + fb(x)
            if k == SUB:
                return lambda x: fa(x) - fb(x)
            if k == MUL:
                return lambda x: fa(x) * fb(x)
            if k == DIV:
                def div(x):
                    b = fb(x)
                    if b == 0:
                        raise ExprDomainError("division by zero", n)
                    return fa(x) / b
                return div
            if k == POW:
                if n.children[1].kind == CONST:
                    e = n.children[1].value
                    return lambda x: _pow(n, fa(x), e)
                return lambda x: _pow(n, fa(x), fb(x))
            if k == MIN:
                return lambda x: min(fa(x), fb(x))
            return lambda x: max(fa(x), fb(x))
        (fa,) = (build(c) for c in n.children)
        if k == EXP:
            def exp_(x):
                try:
                    return math.exp(fa(x))
                except OverflowError:
                    return math.inf
            return exp_
        if k == LN:
            def ln_(x):
                a = fa(x)
                if a <= 0:
                    raise ExprDomainError("logarithm of non-positive value", n)
                return math.log(a)
            return ln_
        if k == SQRT:
            def sqrt_(x):
                a = fa(x)
                if a < 0:
                    raise ExprDomainError("square root of negative value", n)
                return math.sqrt(a)
            return sqrt_
        return lambda x: abs(fa(x))

    f = build(ast)
    return lambda x: f(float(x))
