"""A small expression language for kernels and dilation components.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``* /``, then ``+ -``; ``^`` is right-associative)::

    sum     := product (("+" | "-") product)*
    product := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?
    atom    := NUMBER | VAR | FUNC "(" args ")" | "indicator" "(" sum "," sum ")" "(" sum ")"
             | "(" sum ")"

Variables are ``u`` (first component) and ``u1``, ``u2``, ...  Functions:
``exp log abs sqrt`` (one argument), ``pow`` (two).  ``indicator(lo, hi)(x)``
is 1 on the closed interval ``[lo, hi]`` and 0 elsewhere.

Evaluation raises :class:`EvalDomainError` instead of producing NaN or inf.
"""

import re
from dataclasses import dataclass

import numpy as np

from .errors import EvalDomainError, ParseError, ValidationError

FUNCTIONS = {"exp": 1, "log": 1, "abs": 1, "sqrt": 1, "pow": 2}


class Expr:
    """Base class of syntax-tree nodes."""

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 0-based component of u


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple


@dataclass(frozen=True)
class Indicator(Expr):
    lo: Expr
    hi: Expr
    arg: Expr


# --------------------------------------------------------------------------
# tokenizer
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(src):
    toks = []
    pos = 0
    n = len(src)
    while True:
        while pos < n and src[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        start = m.start(m.lastgroup)
        toks.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, src):
        self.toks = _tokenize(src)
        self.i = 0

    @property
    def cur(self):
        return self.toks[self.i]

    def _advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def _expect(self, text):
        kind, val, pos = self.cur
        if val != text or kind not in ("op",):
            what = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {text!r}, found {what}", pos)
        return self._advance()

    def parse(self):
        e = self.sum()
        kind, val, pos = self.cur
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return e

    def sum(self):
        left = self.product()
        while self.cur[1] in ("+", "-") and self.cur[0] == "op":
            op = self._advance()[1]
            left = BinOp(op, left, self.product())
        return left

    def product(self):
        left = self.unary()
        while self.cur[1] in ("*", "/") and self.cur[0] == "op":
            op = self._advance()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self):
        if self.cur[0] == "op" and self.cur[1] == "-":
            self._advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.cur[0] == "op" and self.cur[1] == "^":
            self._advance()
            return BinOp("^", base, self.unary())
        return base

    def _args(self):
        args = [self.sum()]
        while self.cur[0] == "op" and self.cur[1] == ",":
            self._advance()
            args.append(self.sum())
        self._expect(")")
        return args

    def atom(self):
        kind, val, pos = self.cur
        if kind == "num":
            self._advance()
            return Num(float(val))
        if kind == "name":
            self._advance()
            if val == "u":
                return Var(0)
            m = re.fullmatch(r"u([1-9][0-9]*)", val)
            if m:
                return Var(int(m.group(1)) - 1)
            if val == "indicator":
                self._expect("(")
                args = self._args()
                if len(args) != 2:
                    raise ParseError(f"indicator takes 2 bounds, got {len(args)}", pos)
                if not (self.cur[0] == "op" and self.cur[1] == "("):
                    raise ParseError("indicator(lo, hi) must be applied to an argument", self.cur[2])
                self._advance()
                arg = self._args()
                if len(arg) != 1:
                    raise ParseError(f"indicator(lo, hi)(...) takes 1 argument, got {len(arg)}", pos)
                return Indicator(args[0], args[1], arg[0])
            if val in FUNCTIONS:
                self._expect("(")
                args = self._args()
                if len(args) != FUNCTIONS[val]:
                    raise ParseError(f"{val} takes {FUNCTIONS[val]} argument(s), got {len(args)}", pos)
                return Call(val, tuple(args))
            raise ParseError(f"unknown identifier {val!r}", pos)
        if kind == "op" and val == "(":
            self._advance()
            e = self.sum()
            self._expect(")")
            return e
        what = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {what}", pos)


def parse(src):
    """Parse ``src`` into an expression tree."""
    if not isinstance(src, str):
        raise ValidationError("expression source must be a string")
    return _Parser(src).parse()


# --------------------------------------------------------------------------
# printer (inverse of parse: parse(to_source(e)) == e)
# --------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG = 3
_ATOM = 5


def _prec(e):
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _NEG
    return _ATOM


def _wrap(e, need):
    s = to_source(e)
    return f"({s})" if _prec(e) < need else s


def to_source(e):
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return f"u{e.index + 1}"
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _NEG)
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        if e.op == "^":
            return f"{_wrap(e.left, _ATOM)}^{_wrap(e.right, _NEG)}"
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"
    if isinstance(e, Call):
        return f"{e.func}(" + ", ".join(to_source(a) for a in e.args) + ")"
    if isinstance(e, Indicator):
        return f"indicator({to_source(e.lo)}, {to_source(e.hi)})({to_source(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def n_variables(e):
    """Number of ``u`` components the expression needs (highest index + 1)."""
    if isinstance(e, Var):
        return e.index + 1
    if isinstance(e, Num):
        return 0
    if isinstance(e, Neg):
        return n_variables(e.operand)
    if isinstance(e, BinOp):
        return max(n_variables(e.left), n_variables(e.right))
    if isinstance(e, Call):
        return max(n_variables(a) for a in e.args)
    if isinstance(e, Indicator):
        return max(n_variables(e.lo), n_variables(e.hi), n_variables(e.arg))
    raise TypeError(f"not an expression node: {e!r}")


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


def _fail(msg, e):
    raise EvalDomainError(msg, to_source(e))


def _power(base, expo, e):
    neg_base = base < 0
    if np.any(neg_base & (expo != np.round(expo))):
        _fail("negative base with non-integer exponent", e)
    if np.any((base == 0) & (expo < 0)):
        _fail("zero raised to a negative power", e)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return np.power(base, expo)


def _eval(e, U):
    if isinstance(e, Num):
        return np.full(U.shape[0], e.value)
    if isinstance(e, Var):
        return U[:, e.index]
    if isinstance(e, Neg):
        return -_eval(e.operand, U)
    if isinstance(e, BinOp):
        a = _eval(e.left, U)
        b = _eval(e.right, U)
        with np.errstate(over="ignore", invalid="ignore"):
            if e.op == "+":
                out = a + b
            elif e.op == "-":
                out = a - b
            elif e.op == "*":
                out = a * b
            elif e.op == "/":
                if np.any(b == 0):
                    _fail("division by zero", e)
                out = a / b
            else:
                out = _power(a, b, e)
    elif isinstance(e, Call):
        args = [_eval(a, U) for a in e.args]
        x = args[0]
        with np.errstate(over="ignore", invalid="ignore"):
            if e.func == "exp":
                out = np.exp(x)
            elif e.func == "log":
                if np.any(x <= 0):
                    _fail("log of a non-positive number", e)
                out = np.log(x)
            elif e.func == "abs":
                out = np.abs(x)
            elif e.func == "sqrt":
                if np.any(x < 0):
                    _fail("sqrt of a negative number", e)
                out = np.sqrt(x)
            else:
                out = _power(x, args[1], e)
    elif isinstance(e, Indicator):
        lo, hi, x = _eval(e.lo, U), _eval(e.hi, U), _eval(e.arg, U)
        out = ((x >= lo) & (x <= hi)).astype(float)
    else:
        raise TypeError(f"not an expression node: {e!r}")
    if not np.all(np.isfinite(out)):
        _fail("non-finite result (overflow)", e)
    return out


def _as_points(u, e):
    U = np.asarray(u, dtype=float)
    if U.ndim == 0:
        U = U.reshape(1, 1)
    elif U.ndim == 1:
        U = U[:, None]
    need = n_variables(e)
    if U.shape[1] < need:
        raise ValidationError(f"expression uses u{need} but points have {U.shape[1]} component(s)")
    return U


def evaluate_many(e, points):
    """Evaluate at each row of ``points`` (``(K, m)``, or ``(K,)`` for scalar ``u``)."""
    if isinstance(e, str):
        e = parse(e)
    U = _as_points(points, e)
    return np.asarray(_eval(e, U), dtype=float)


def evaluate(e, u):
    """Evaluate at a single point ``u`` (scalar or vector)."""
    if isinstance(e, str):
        e = parse(e)
    U = np.atleast_1d(np.asarray(u, dtype=float)).reshape(1, -1)
    return float(evaluate_many(e, U)[0])
