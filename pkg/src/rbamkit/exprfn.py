"""A small arithmetic expression language and the function models built on it.

Grammar (whitespace is insignificant)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := unary ('^' factor)?
    unary   := '-'? primary
    primary := number | variable | call | '(' expr ')'
    call    := name '(' expr (',' expr)* ')'

Variables are ``x1`` .. ``xd``.  ``^`` is right-associative and a leading
minus binds tighter than ``^``, so ``-x1^2`` means ``(-x1)^2``.
Available calls: ``max(a, b)``, ``min(a, b)``, ``abs``, ``exp``, ``log`` and
``relu(t) = max(t, 0)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .coalition import Permutation


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class ExprDomainError(ArithmeticError):
    def __init__(self, message: str, point: Sequence[float]):
        coords = ", ".join(f"x{i + 1}={v!r}" for i, v in enumerate(point))
        super().__init__(f"{message} at ({coords})")
        self.point = tuple(float(v) for v in point)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int


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
    name: str
    args: tuple["Expr", ...]


Expr = Union[Num, Var, Neg, BinOp, Call]

ARITY = {"max": 2, "min": 2, "abs": 1, "exp": 1, "log": 1, "relu": 1}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(source: str) -> list[_Tok]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        offset = len(source[:pos].encode("utf-8"))
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", offset)
        if m.lastgroup != "ws":
            tokens.append(_Tok(m.lastgroup, m.group(), offset))
        pos = m.end()
    tokens.append(_Tok("end", "", len(source.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, source: str, d: int):
        self.toks = _tokenize(source)
        self.pos = 0
        self.d = d

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok.text != text:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", tok.offset)
        return self.take()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        base = self.unary()
        if self.peek().text == "^":
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def unary(self) -> Expr:
        if self.peek().text == "-":
            self.take()
            return Neg(self.primary())
        return self.primary()

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.take()
            if self.peek().text == "(":
                return self.call(tok)
            return self.variable(tok)
        if tok.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"expected a number, variable, call or '(' but found {found}", tok.offset)

    def variable(self, tok: _Tok) -> Var:
        m = re.fullmatch(r"x([1-9]\d*)", tok.text)
        if m is None:
            raise ExprSyntaxError(f"unknown identifier {tok.text!r}", tok.offset)
        index = int(m.group(1))
        if index > self.d:
            raise ExprSyntaxError(f"variable {tok.text} exceeds dimension {self.d}", tok.offset)
        return Var(index)

    def call(self, tok: _Tok) -> Call:
        if tok.text not in ARITY:
            raise ExprSyntaxError(f"unknown function {tok.text!r}", tok.offset)
        self.expect("(")
        args = [self.expr()]
        while self.peek().text == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        if len(args) != ARITY[tok.text]:
            raise ExprSyntaxError(
                f"{tok.text} takes {ARITY[tok.text]} argument(s), got {len(args)}", tok.offset
            )
        return Call(tok.text, tuple(args))


def parse(source: str, d: int) -> Expr:
    if d < 1:
        raise ValueError(f"dimension must be at least 1, got {d}")
    return _Parser(source, d).parse()


def unparse(e: Expr) -> str:
    """Fully parenthesized source text that parses back to ``e``."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Neg):
        return f"(-{unparse(e.operand)})"
    if isinstance(e, BinOp):
        return f"({unparse(e.left)} {e.op} {unparse(e.right)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(unparse(a) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")


def max_variable(e: Expr) -> int:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Num):
        return 0
    if isinstance(e, Neg):
        return max_variable(e.operand)
    if isinstance(e, BinOp):
        return max(max_variable(e.left), max_variable(e.right))
    return max((max_variable(a) for a in e.args), default=0)


def _first_bad(mask: np.ndarray, X: np.ndarray) -> np.ndarray:
    return X[int(np.flatnonzero(mask)[0])]


def _eval(e: Expr, X: np.ndarray) -> np.ndarray:
    n = X.shape[0]
    if isinstance(e, Num):
        return np.full(n, e.value)
    if isinstance(e, Var):
        return X[:, e.index - 1].astype(float, copy=True)
    if isinstance(e, Neg):
        return -_eval(e.operand, X)
    if isinstance(e, BinOp):
        a, b = _eval(e.left, X), _eval(e.right, X)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            zero = b == 0
            if np.any(zero):
                raise ExprDomainError("division by zero", _first_bad(zero, X))
            return a / b
        with np.errstate(all="ignore"):
            out = np.power(a, b)
        bad = np.isnan(out) & ~np.isnan(a) & ~np.isnan(b)
        bad |= (a == 0) & (b < 0)
        if np.any(bad):
            raise ExprDomainError("power undefined", _first_bad(bad, X))
        return out
    if isinstance(e, Call):
        args = [_eval(a, X) for a in e.args]
        if e.name == "max":
            return np.maximum(args[0], args[1])
        if e.name == "min":
            return np.minimum(args[0], args[1])
        if e.name == "abs":
            return np.abs(args[0])
        if e.name == "relu":
            return np.maximum(args[0], 0.0)
        if e.name == "exp":
            with np.errstate(over="ignore"):
                return np.exp(args[0])
        if e.name == "log":
            bad = args[0] <= 0
            if np.any(bad):
                raise ExprDomainError("log of a non-positive value", _first_bad(bad, X))
            return np.log(args[0])
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, x: np.ndarray | Sequence[float]) -> float | np.ndarray:
    """Evaluate at one point (shape ``(d,)``) or a batch (shape ``(n, d)``)."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X2 = X.reshape(1, -1) if single else X
    need = max_variable(e)
    if X2.shape[1] < need:
        raise ValueError(f"point has {X2.shape[1]} coordinates, expression uses x{need}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = _eval(e, X2)
    bad = ~np.isfinite(out)
    if np.any(bad):
        raise ExprDomainError("non-finite result", _first_bad(bad, X2))
    return float(out[0]) if single else out


Domain = tuple[tuple[float, float], ...]


def _unbounded(d: int) -> Domain:
    return tuple((-np.inf, np.inf) for _ in range(d))


class FunctionModel:
    """Real-valued function on a hyperrectangle in ``d`` dimensions.

    ``fn`` maps an ``(n, d)`` batch to ``n`` values.  Calling the model on a
    single point returns a float.
    """

    __slots__ = ("d", "domain", "fn", "label")

    def __init__(self, d: int, fn: Callable[[np.ndarray], np.ndarray], domain: Domain | None = None,
                 label: str = "<function>"):
        if d < 1:
            raise ValueError(f"dimension must be at least 1, got {d}")
        dom = _unbounded(d) if domain is None else tuple((float(lo), float(hi)) for lo, hi in domain)
        if len(dom) != d or any(lo > hi for lo, hi in dom):
            raise ValueError(f"domain must be {d} intervals with lo ≤ hi")
        self.d = d
        self.domain = dom
        self.fn = fn
        self.label = label

    @classmethod
    def from_expression(cls, source: str, d: int, domain: Domain | None = None) -> "FunctionModel":
        tree = parse(source, d)
        return cls(d, lambda X: evaluate(tree, X), domain, label=source)

    @classmethod
    def constant(cls, d: int, c: float, domain: Domain | None = None) -> "FunctionModel":
        c = float(c)
        return cls(d, lambda X: np.full(X.shape[0], c), domain, label=repr(c))

    def __call__(self, x):
        X = np.asarray(x, dtype=float)
        if X.ndim == 1:
            if X.shape[0] != self.d:
                raise ValueError(f"point has {X.shape[0]} coordinates, model expects {self.d}")
            return float(np.asarray(self.fn(X.reshape(1, -1)))[0])
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ValueError(f"batch must have shape (n, {self.d}), got {X.shape}")
        return np.asarray(self.fn(X), dtype=float).reshape(-1)

    def contains(self, x) -> bool:
        X = np.atleast_2d(np.asarray(x, dtype=float))
        lo = np.array([a for a, _ in self.domain])
        hi = np.array([b for _, b in self.domain])
        return bool(np.all((X >= lo) & (X <= hi)))

    def _combine(self, other: "FunctionModel", sign: float, symbol: str) -> "FunctionModel":
        if other.d != self.d:
            raise ValueError(f"dimension mismatch: {self.d} vs {other.d}")
        f, g = self.fn, other.fn
        return FunctionModel(self.d, lambda X: f(X) + sign * g(X), self.domain,
                             label=f"({self.label}) {symbol} ({other.label})")

    def __add__(self, other: "FunctionModel") -> "FunctionModel":
        return self._combine(other, 1.0, "+")

    def __sub__(self, other: "FunctionModel") -> "FunctionModel":
        return self._combine(other, -1.0, "-")

    def __mul__(self, k: float) -> "FunctionModel":
        k = float(k)
        f = self.fn
        return FunctionModel(self.d, lambda X: k * f(X), self.domain, label=f"{k!r} * ({self.label})")

    __rmul__ = __mul__

    def __neg__(self) -> "FunctionModel":
        return self * -1.0

    def __repr__(self) -> str:
        return f"FunctionModel(d={self.d}, {self.label})"


def permute_point(pi: Permutation, x: np.ndarray) -> np.ndarray:
    """``πx = (x_{π(1)}, ..., x_{π(d)})`` for a point or a batch."""
    cols = [p - 1 for p in pi.mapping]
    X = np.asarray(x, dtype=float)
    return X[..., cols]


def permuted_function(pi: Permutation, f: FunctionModel) -> FunctionModel:
    """The model ``πf`` defined by ``(πf)(πx) = f(x)``."""
    if pi.d != f.d:
        raise ValueError(f"dimension mismatch: permutation on {pi.d}, function on {f.d}")
    inv = pi.inverse()
    cols = [p - 1 for p in inv.mapping]
    g = f.fn
    domain = tuple(f.domain[p - 1] for p in pi.mapping)
    return FunctionModel(f.d, lambda Y: g(Y[:, cols]), domain, label=f"{pi}·({f.label})")
