"""Small arithmetic expression language used in problem files.

Grammar (lowest to highest binding)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Two contexts exist. Nonlinearities see the variables ``t``, ``u1`` and ``u2``.
Functionals see point evaluations ``u1(p)``/``u2(p)`` whose argument is a
constant expression, and no bare variables.

Evaluation is vectorised: bindings may be floats or numpy arrays.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np

__all__ = [
    "Context",
    "Expr",
    "Num",
    "Var",
    "PointEval",
    "Neg",
    "BinOp",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "ArityError",
    "EvalError",
    "FUNCTIONS",
    "parse",
    "evaluate",
    "to_source",
    "variables",
    "point_evals",
]


class Context(enum.Enum):
    F = "F"
    FUNCTIONAL = "functional"


F_VARIABLES = ("t", "u1", "u2")
COMPONENT_NAMES = {"u1": 1, "u2": 2}


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, pos: int):
        super().__init__(f"unknown identifier {name!r} at position {pos}")
        self.name = name
        self.pos = pos


class ArityError(ExprError):
    pass


class EvalError(ExprError):
    pass


# ---------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class PointEval:
    component: int
    point: float


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, PointEval, Neg, BinOp, Call]


def _sqrt(x):
    if np.any(np.asarray(x) < 0):
        raise ValueError("negative argument")
    return np.sqrt(x)


def _log(x):
    if np.any(np.asarray(x) <= 0):
        raise ValueError("nonpositive argument")
    return np.log(x)


FUNCTIONS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": _sqrt,
    "abs": np.abs,
    "log": _log,
}

# ---------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, name, op, eof
    text: str
    pos: int


def _tokenize(src: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(src)))
    return toks


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, src: str, context: Context):
        self.toks = _tokenize(src)
        self.i = 0
        self.context = context

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.tok
        if t.text != text or t.kind != "op":
            what = "end of input" if t.kind == "eof" else repr(t.text)
            raise ExprSyntaxError(f"expected {text!r}, found {what}", t.pos)
        return self.advance()

    def parse(self) -> Expr:
        if self.tok.kind == "eof":
            raise ExprSyntaxError("empty expression", 0)
        e = self.expr()
        if self.tok.kind != "eof":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "name":
            self.advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                return self.call(t)
            return self.name(t)
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {what}", t.pos)

    def name(self, t: _Tok) -> Expr:
        if self.context is Context.F and t.text in F_VARIABLES:
            return Var(t.text)
        raise UnknownIdentifierError(t.text, t.pos)

    def call(self, t: _Tok) -> Expr:
        open_paren = self.expect("(")
        if self.tok.kind == "op" and self.tok.text == ")":
            raise ArityError(f"{t.text}() takes exactly one argument (position {open_paren.pos})")
        arg = self.expr()
        if self.tok.kind == "op" and self.tok.text == ",":
            raise ArityError(f"{t.text}() takes exactly one argument (position {self.tok.pos})")
        self.expect(")")
        if t.text in FUNCTIONS:
            return Call(t.text, arg)
        if t.text in COMPONENT_NAMES and self.context is Context.FUNCTIONAL:
            if variables(arg) or point_evals(arg):
                raise ExprSyntaxError("point-evaluation argument must be constant", open_paren.pos + 1)
            p = float(evaluate(arg, {}))
            if not 0.0 <= p <= 1.0:
                raise ExprSyntaxError(f"evaluation point {p} outside [0, 1]", open_paren.pos + 1)
            return PointEval(COMPONENT_NAMES[t.text], p)
        raise UnknownIdentifierError(t.text, t.pos)


def parse(src: str, context: Context = Context.F) -> Expr:
    """Parse ``src`` into an expression tree for the given context."""
    return _Parser(src, context).parse()


# ---------------------------------------------------------------- printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3
_ATOM_PREC = 5


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def _num_text(v: float) -> str:
    text = repr(float(v))
    if text in ("inf", "nan") or text.startswith("-"):
        raise ExprError(f"literal {text} cannot be printed")
    return text


def to_source(e: Expr) -> str:
    """Print ``e`` so that ``parse(to_source(e))`` reproduces the same tree."""
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, PointEval):
        return f"u{e.component}({_num_text(e.point)})"
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        if _prec(e.operand) < _NEG_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[e.op]
    left, right = to_source(e.left), to_source(e.right)
    if e.op == "^":
        # both a Neg and a power on the left would rebind
        if _prec(e.left) <= p:
            left = f"({left})"
        if _prec(e.right) < _NEG_PREC:
            right = f"({right})"
    else:
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
    return f"{left} {e.op} {right}" if p == 1 else f"{left}{e.op}{right}"


def variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Num, PointEval)):
        return set()
    if isinstance(e, (Neg, Call)):
        return variables(e.operand if isinstance(e, Neg) else e.arg)
    return variables(e.left) | variables(e.right)


def point_evals(e: Expr) -> set[PointEval]:
    if isinstance(e, PointEval):
        return {e}
    if isinstance(e, (Num, Var)):
        return set()
    if isinstance(e, Neg):
        return point_evals(e.operand)
    if isinstance(e, Call):
        return point_evals(e.arg)
    return point_evals(e.left) | point_evals(e.right)


# ---------------------------------------------------------------- evaluation

Env = Mapping[str, object]


def _fail(e: Expr, why: str):
    raise EvalError(f"{why} in '{to_source(e)}'")


def _power(e: BinOp, x, y):
    x_arr, y_arr = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    non_integer = y_arr != np.floor(y_arr)
    if np.any((x_arr < 0) & non_integer):
        _fail(e, "non-integer power of a negative base")
    if np.any((x_arr == 0) & (y_arr < 0)):
        _fail(e, "division by zero")
    return np.power(x, y)


def evaluate(e: Expr, env: Env):
    """Evaluate ``e``; ``env`` binds ``t``/``u1``/``u2`` to numbers or arrays.

    In a functional context ``env['u1']``/``env['u2']`` are callables taking an
    evaluation point.
    """
    with np.errstate(all="ignore"):
        value = _eval(e, env)
    if not np.all(np.isfinite(value)):
        _fail(e, "non-finite result")
    return value


def _eval(e: Expr, env: Env):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvalError(f"variable {e.name!r} is not bound") from None
    if isinstance(e, PointEval):
        try:
            f = env[f"u{e.component}"]
        except KeyError:
            raise EvalError(f"u{e.component} is not bound") from None
        return f(e.point)
    if isinstance(e, Neg):
        return -_eval(e.operand, env)
    if isinstance(e, Call):
        arg = _eval(e.arg, env)
        try:
            out = FUNCTIONS[e.func](arg)
        except ValueError as err:
            _fail(e, str(err))
        if not np.all(np.isfinite(out)):
            _fail(e, "overflow")
        return out
    x = _eval(e.left, env)
    y = _eval(e.right, env)
    if e.op == "+":
        out = x + y
    elif e.op == "-":
        out = x - y
    elif e.op == "*":
        out = x * y
    elif e.op == "/":
        if np.any(np.asarray(y) == 0):
            _fail(e, "division by zero")
        out = x / y
    else:
        out = _power(e, x, y)
    if not np.all(np.isfinite(out)):
        _fail(e, "overflow")
    return out


def is_constant(e: Expr) -> bool:
    return not variables(e) and not point_evals(e)


def constant_value(e: Expr) -> float:
    return float(evaluate(e, {}))


# ---------------------------------------------------------------- monotonicity


@dataclass(frozen=True)
class _Shape:
    """Sign and per-atom monotonicity of a subexpression over nonnegative atoms.

    ``mono`` maps an atom key to +1 (nondecreasing), -1 (nonincreasing) or
    ``None`` (unknown); atoms the subexpression does not depend on are absent.
    """

    sign: str | None  # "pos", "nonneg" or None
    mono: dict
    const: float | None = None


def _combine(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        if k in out and out[k] != v:
            out[k] = None
        else:
            out.setdefault(k, v)
    return out


def _flip(m: dict) -> dict:
    return {k: (None if v is None else -v) for k, v in m.items()}


def _const_shape(v: float) -> _Shape:
    sign = "pos" if v > 0 else ("nonneg" if v == 0 else None)
    return _Shape(sign, {}, v)


def _unknown(*parts: _Shape) -> _Shape:
    keys = set().union(*(p.mono for p in parts))
    return _Shape(None, {k: None for k in keys})


def _shape(e: Expr) -> _Shape:
    if is_constant(e):
        return _const_shape(constant_value(e))
    if isinstance(e, Var):
        return _Shape("nonneg", {e.name: 1})
    if isinstance(e, PointEval):
        return _Shape("nonneg", {(e.component, e.point): 1})
    if isinstance(e, Neg):
        s = _shape(e.operand)
        return _Shape(None, _flip(s.mono))
    if isinstance(e, Call):
        s = _shape(e.arg)
        if e.func == "exp":
            return _Shape("pos", s.mono)
        if e.func == "sqrt":
            return _Shape(s.sign, s.mono)
        if e.func == "log":
            return _Shape(None, s.mono)
        if e.func == "abs" and s.sign is not None:
            return s
        return _unknown(s)
    a, b = _shape(e.left), _shape(e.right)
    if e.op == "-":
        return _Shape(None, _combine(a.mono, _flip(b.mono)))
    if e.op == "+":
        sign = None
        if a.sign and b.sign:
            sign = "pos" if "pos" in (a.sign, b.sign) else "nonneg"
        return _Shape(sign, _combine(a.mono, b.mono))
    if e.op in "*/":
        if e.op == "/":
            if b.const is not None:
                if b.const == 0:
                    return _unknown(a)
                b = _const_shape(1.0 / b.const)
            elif b.sign == "pos" and a.sign:
                return _Shape(a.sign, _combine(a.mono, _flip(b.mono)))
            else:
                return _unknown(a, b)
        for c, other in ((a, b), (b, a)):
            if c.const is not None:
                if c.const > 0:
                    return other
                if c.const == 0:
                    return _const_shape(0.0)
                return _Shape(None, _flip(other.mono))
        if a.sign and b.sign:
            sign = "pos" if a.sign == b.sign == "pos" else "nonneg"
            return _Shape(sign, _combine(a.mono, b.mono))
        return _unknown(a, b)
    # power
    if b.const is not None:
        k = b.const
        if a.sign:
            if k > 0:
                return _Shape(a.sign, a.mono)
            if k == 0:
                return _const_shape(1.0)
            if a.sign == "pos":
                return _Shape("pos", _flip(a.mono))
        return _unknown(a)
    if a.const is not None and a.const > 0:
        if a.const > 1:
            return _Shape("pos", b.mono)
        if a.const < 1:
            return _Shape("pos", _flip(b.mono))
        return _const_shape(1.0)
    return _unknown(a, b)


def monotonicity(e: Expr) -> dict | None:
    """Per-atom monotonicity of ``e`` when every atom ranges over [0, inf).

    Atoms are variable names (``'t'``, ``'u1'``, ``'u2'``) or
    ``(component, point)`` pairs for point evaluations. Returns ``None`` when
    the structural analysis cannot establish monotonicity in every atom.
    """
    mono = _shape(e).mono
    if any(v is None for v in mono.values()):
        return None
    return mono
