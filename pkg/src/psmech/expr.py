"""Scalar expressions: parsing, printing, evaluation and forward-mode derivatives.

Grammar (see README for the full EBNF)::

    expr    = term { ("+" | "-") term }
    term    = unary { ("*" | "/") unary }
    unary   = ("-" | "+") unary | power
    power   = primary [ ("^" | "**") unary ]
    primary = number | name | name "(" expr ")" | "(" expr ")"

Variables are ``x1 .. xn``; callers may also register coordinate aliases and
named parameters.  ``pi`` is a predefined constant.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


class ExprError(Exception):
    """Syntax or name error while parsing; ``offset`` is a byte offset."""

    def __init__(self, message, text="", offset=0):
        self.text = text
        self.offset = offset
        super().__init__(f"{message} at byte {offset}" if text else message)


class DomainError(ArithmeticError):
    """A primitive was evaluated outside its domain."""

    def __init__(self, message, subexpr=""):
        self.subexpr = subexpr
        super().__init__(f"{message}: {subexpr}" if subexpr else message)


class HessianAsymmetryError(ArithmeticError):
    pass


# --------------------------------------------------------------------------
# AST

class Node:
    __slots__ = ()

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True, eq=True)
class Num(Node):
    value: float


@dataclass(frozen=True, eq=True)
class Var(Node):
    index: int  # zero based


@dataclass(frozen=True, eq=True)
class Param(Node):
    name: str


@dataclass(frozen=True, eq=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True, eq=True)
class BinOp(Node):
    op: str  # one of + - * / ^
    left: Node
    right: Node


@dataclass(frozen=True, eq=True)
class Call(Node):
    func: str
    arg: Node


Expression = Node

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt")
CONSTANTS = {"pi": math.pi}


# --------------------------------------------------------------------------
# printing

def to_string(node: Node) -> str:
    """Print with full parenthesisation so that parse(to_string(t)) == t."""
    s = _fmt(node)
    if s.startswith("(") and isinstance(node, BinOp):
        return s[1:-1]
    return s


def _fmt(node):
    if isinstance(node, Num):
        v = float(node.value)
        if v.is_integer() and abs(v) < 1e15:
            return str(int(v))
        return repr(v)
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_fmt(node.arg)})"
    if isinstance(node, BinOp):
        return f"({_fmt(node.left)} {node.op} {_fmt(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)
_VAR = re.compile(r"x([1-9]\d*)\Z")


def _tokenize(text):
    toks = []
    pos = 0
    boff = 0  # running byte offset
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprError(f"unexpected character {text[pos]!r}", text, boff)
        kind = m.lastgroup
        val = m.group()
        if kind == "num":
            nxt = text[m.end():m.end() + 1]
            if nxt and (nxt.isalpha() or nxt in "._"):
                raise ExprError(f"malformed number {val + nxt!r}", text, boff)
        if kind != "ws":
            toks.append((kind, "^" if val == "**" else val, boff))
        boff += len(val.encode("utf-8"))
        pos = m.end()
    toks.append(("end", "", boff))
    return toks


class _Parser:
    def __init__(self, text, n, params, aliases):
        self.text = text
        self.n = n
        self.params = params
        self.aliases = aliases
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val):
        kind, v, off = self.take()
        if v != val or kind == "end":
            found = "end of input" if kind == "end" else repr(v)
            raise ExprError(f"expected {val!r}, found {found}", self.text, off)

    def error(self, msg, off):
        return ExprError(msg, self.text, off)

    def parse(self):
        node = self.expr()
        kind, v, off = self.peek()
        if kind != "end":
            raise self.error(f"unexpected {v!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, v, off = self.peek()
        if kind == "op" and v == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and v == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        kind, v, off = self.take()
        if kind == "num":
            try:
                return Num(float(v))
            except ValueError:  # pragma: no cover - regex guarantees a float
                raise self.error(f"malformed number {v!r}", off)
        if kind == "name":
            if self.peek()[1] == "(":
                if v not in FUNCTIONS:
                    raise self.error(f"unknown function {v!r}", off)
                self.take()
                arg = self.expr()
                if self.peek()[1] == ",":
                    raise self.error(f"{v} takes exactly one argument", self.peek()[2])
                self.expect(")")
                return Call(v, arg)
            return self.name(v, off)
        if kind == "op" and v == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(v)
        raise self.error(f"unexpected {found}", off)

    def name(self, v, off):
        if v in self.aliases:
            return Var(self.aliases[v])
        if v in self.params:
            return Param(v)
        m = _VAR.match(v)
        if m:
            idx = int(m.group(1))
            if idx > self.n:
                raise self.error(f"variable {v} exceeds dimension {self.n}", off)
            return Var(idx - 1)
        if v in CONSTANTS:
            return Num(CONSTANTS[v])
        if v in FUNCTIONS:
            raise self.error(f"function {v} needs an argument", off)
        raise self.error(f"unknown identifier {v!r}", off)


def parse(text: str, n: int, params: Mapping[str, float] | None = None,
          aliases: Mapping[str, int] | None = None) -> Node:
    """Parse ``text`` into an AST over variables x1..xn.

    >>> evaluate(parse("x1^2 * x2", 2), [3, 2])
    18.0
    """
    if isinstance(text, (int, float)):
        text = repr(float(text))
    return _Parser(text, n, dict(params or {}), dict(aliases or {})).parse()


# --------------------------------------------------------------------------
# structural helpers

def has_vars(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, (Num, Param)):
        return False
    if isinstance(node, (Neg, Call)):
        return has_vars(node.arg)
    return has_vars(node.left) or has_vars(node.right)


def variables(node: Node) -> set[int]:
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, (Num, Param)):
        return set()
    if isinstance(node, (Neg, Call)):
        return variables(node.arg)
    return variables(node.left) | variables(node.right)


def param_names(node: Node) -> set[str]:
    if isinstance(node, Param):
        return {node.name}
    if isinstance(node, (Num, Var)):
        return set()
    if isinstance(node, (Neg, Call)):
        return param_names(node.arg)
    return param_names(node.left) | param_names(node.right)


def _int_exponent(e):
    if e == int(e) and abs(e) <= 64:
        return int(e)
    return None


# --------------------------------------------------------------------------
# float evaluation (compiled to closures)

def _compile(node, params):
    if isinstance(node, Num):
        c = float(node.value)
        return lambda x: c
    if isinstance(node, Var):
        i = node.index
        return lambda x: x[i]
    if isinstance(node, Param):
        if node.name not in params:
            raise DomainError("unbound parameter", node.name)
        c = float(params[node.name])
        return lambda x: c
    if isinstance(node, Neg):
        f = _compile(node.arg, params)
        return lambda x: -f(x)
    if isinstance(node, Call):
        f = _compile(node.arg, params)
        fn = _FLOAT_FUNCS[node.func]
        src = to_string(node)

        def call(x):
            try:
                return fn(f(x))
            except (ValueError, OverflowError) as exc:
                raise DomainError(str(exc), src) from None
        return call
    a = _compile(node.left, params)
    b = _compile(node.right, params)
    op = node.op
    if op == "+":
        return lambda x: a(x) + b(x)
    if op == "-":
        return lambda x: a(x) - b(x)
    if op == "*":
        return lambda x: a(x) * b(x)
    src = to_string(node)
    if op == "/":
        def div(x):
            d = b(x)
            if d == 0.0:
                raise DomainError("division by zero", src)
            return a(x) / d
        return div
    # power
    if not has_vars(node.right):
        k = _int_exponent(b(None))
        if k is not None:
            def ipow(x):
                base = a(x)
                if k < 0 and base == 0.0:
                    raise DomainError("division by zero", src)
                return _ipow(base, k)
            return ipow

    def rpow(x):
        base = a(x)
        if base <= 0.0:
            raise DomainError("non-positive base for real exponent", src)
        try:
            return math.exp(b(x) * math.log(base))
        except OverflowError as exc:
            raise DomainError(str(exc), src) from None
    return rpow


def _ipow(base, k):
    if k < 0:
        return 1.0 / _ipow(base, -k)
    r = 1.0
    for _ in range(k):
        r = r * base
    return r


def _sqrt(v):
    if v < 0:
        raise ValueError("sqrt of negative number")
    return math.sqrt(v)


def _log(v):
    if v <= 0:
        raise ValueError("log of non-positive number")
    return math.log(v)


def _tan(v):
    if math.cos(v) == 0.0:
        raise ValueError("tan pole")
    return math.tan(v)


_FLOAT_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": _tan,
                "exp": math.exp, "log": _log, "sqrt": _sqrt}


def evaluate(node: Node, point, params: Mapping[str, float] | None = None) -> float:
    return float(_compile(node, dict(params or {}))(point))


# --------------------------------------------------------------------------
# forward mode: first and second order dual numbers

class Dual:
    """Truncated Taylor jet: value, partials and (optionally) second partials.

    With ``hess`` set to ``None`` this is an ordinary dual number.  Arithmetic
    applies the first- and second-order chain rules exactly.
    """

    __slots__ = ("value", "partials", "hess")

    def __init__(self, value, partials, hess=None):
        self.value = value
        self.partials = partials
        self.hess = hess

    @classmethod
    def constant(cls, value, n, order=1):
        return cls(float(value), np.zeros(n), np.zeros((n, n)) if order > 1 else None)

    @classmethod
    def variable(cls, value, i, n, order=1):
        g = np.zeros(n)
        g[i] = 1.0
        return cls(float(value), g, np.zeros((n, n)) if order > 1 else None)

    @classmethod
    def seed(cls, point, order=1):
        """One jet per coordinate of ``point``."""
        n = len(point)
        return [cls.variable(point[i], i, n, order) for i in range(n)]

    def __repr__(self):
        return f"Dual({self.value!r}, {self.partials!r})"

    def _lift(self, other):
        if isinstance(other, Dual):
            return other
        n = len(self.partials)
        return Dual(float(other), np.zeros(n), None if self.hess is None else np.zeros((n, n)))

    def chain(self, f0, f1, f2=0.0):
        """Apply a scalar function with value f0, slope f1, curvature f2."""
        g = f1 * self.partials
        if self.hess is None:
            return Dual(f0, g)
        return Dual(f0, g, f1 * self.hess + f2 * np.outer(self.partials, self.partials))

    def __neg__(self):
        return Dual(-self.value, -self.partials, None if self.hess is None else -self.hess)

    def __add__(self, other):
        if not isinstance(other, Dual):
            return Dual(self.value + other, self.partials, self.hess)
        h = None if self.hess is None else self.hess + other.hess
        return Dual(self.value + other.value, self.partials + other.partials, h)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Dual):
            return Dual(self.value * other, self.partials * other,
                        None if self.hess is None else self.hess * other)
        a, b = self, other
        g = a.value * b.partials + b.value * a.partials
        if a.hess is None:
            return Dual(a.value * b.value, g)
        cross = np.outer(a.partials, b.partials)
        h = a.value * b.hess + b.value * a.hess + cross + cross.T
        return Dual(a.value * b.value, g, h)

    __rmul__ = __mul__

    def reciprocal(self):
        u = self.value
        if u == 0.0:
            raise DomainError("division by zero")
        return self.chain(1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u))

    def __truediv__(self, other):
        if not isinstance(other, Dual):
            if other == 0:
                raise DomainError("division by zero")
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def ipow(self, k: int):
        if k < 0:
            return self.ipow(-k).reciprocal()
        out = self._lift(1.0)
        for _ in range(k):
            out = out * self
        return out


def _d_sin(u):
    s, c = math.sin(u.value), math.cos(u.value)
    return u.chain(s, c, -s)


def _d_cos(u):
    s, c = math.sin(u.value), math.cos(u.value)
    return u.chain(c, -s, -c)


def _d_tan(u):
    c = math.cos(u.value)
    if c == 0.0:
        raise ValueError("tan pole")
    t = math.tan(u.value)
    sec2 = 1.0 / (c * c)
    return u.chain(t, sec2, 2.0 * sec2 * t)


def _d_exp(u):
    e = math.exp(u.value)
    return u.chain(e, e, e)


def _d_log(u):
    v = u.value
    if v <= 0:
        raise ValueError("log of non-positive number")
    return u.chain(math.log(v), 1.0 / v, -1.0 / (v * v))


def _d_sqrt(u):
    v = u.value
    if v <= 0:
        # the derivative is unbounded at 0, so the jet is undefined there
        raise ValueError("sqrt of non-positive number")
    s = math.sqrt(v)
    return u.chain(s, 0.5 / s, -0.25 / (s * v))


_DUAL_FUNCS = {"sin": _d_sin, "cos": _d_cos, "tan": _d_tan,
               "exp": _d_exp, "log": _d_log, "sqrt": _d_sqrt}


def evaluate_dual(node: Node, point, params: Mapping[str, float] | None = None,
                  order: int = 1) -> Dual:
    """Evaluate ``node`` with an n-wide forward seed (order 1 or 2)."""
    params = dict(params or {})
    seeds = Dual.seed(np.asarray(point, dtype=float), order)
    return _eval_dual(node, seeds, len(point), order, _constant_table(node, params))


def _constant_table(node, params):
    """Map id(subtree) -> value for every variable-free subtree."""
    table = {}

    def walk(nd):
        if isinstance(nd, Var):
            return False
        if isinstance(nd, (Num, Param)):
            const = True
        elif isinstance(nd, (Neg, Call)):
            const = walk(nd.arg)
        else:
            const = walk(nd.left) & walk(nd.right)
        if const:
            table[id(nd)] = _compile(nd, params)(None)
        return const

    walk(node)
    return table


def _eval_dual(node, seeds, n, order, consts):
    c = consts.get(id(node))
    if c is not None:
        return Dual.constant(c, n, order)
    if isinstance(node, Var):
        return seeds[node.index]
    if isinstance(node, Neg):
        return -_eval_dual(node.arg, seeds, n, order, consts)
    if isinstance(node, Call):
        u = _eval_dual(node.arg, seeds, n, order, consts)
        try:
            return _DUAL_FUNCS[node.func](u)
        except (ValueError, OverflowError) as exc:
            raise DomainError(str(exc), to_string(node)) from None
    op = node.op
    e = consts.get(id(node.right))
    if op == "^" and e is not None:
        k = _int_exponent(e)
        base = _eval_dual(node.left, seeds, n, order, consts)
        if k is not None:
            try:
                return base.ipow(k)
            except DomainError:
                raise DomainError("division by zero", to_string(node)) from None
        v = base.value
        if v <= 0:
            raise DomainError("non-positive base for real exponent", to_string(node))
        return base.chain(v ** e, e * v ** (e - 1), e * (e - 1) * v ** (e - 2))
    a = _eval_dual(node.left, seeds, n, order, consts)
    b = _eval_dual(node.right, seeds, n, order, consts)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        try:
            return a / b
        except DomainError:
            raise DomainError("division by zero", to_string(node)) from None
    # variable exponent: exp(b log a)
    if a.value <= 0:
        raise DomainError("non-positive base for real exponent", to_string(node))
    try:
        return _d_exp(b * _d_log(a))
    except OverflowError as exc:
        raise DomainError(str(exc), to_string(node)) from None


# --------------------------------------------------------------------------
# fields

def _as_node(e, n, params, aliases):
    if isinstance(e, Node):
        return e
    return parse(str(e) if not isinstance(e, (int, float)) else repr(float(e)), n, params, aliases)


class ScalarField:
    """A scalar expression over R^n with a parameter binding."""

    def __init__(self, expr, n: int, params: Mapping[str, float] | None = None,
                 aliases: Mapping[str, int] | None = None):
        self.n = n
        self.params = dict(params or {})
        self.expr = _as_node(expr, n, self.params, aliases)
        bad = [i for i in variables(self.expr) if i >= n]
        if bad:
            raise ExprError(f"variable x{max(bad) + 1} exceeds dimension {n}")
        self._f = _compile(self.expr, self.params)
        self._consts = _constant_table(self.expr, self.params)
        self.constant = id(self.expr) in self._consts

    def __repr__(self):
        return f"ScalarField({to_string(self.expr)!r})"

    def __str__(self):
        return to_string(self.expr)

    def __call__(self, p):
        return self.value(p)

    def value(self, p) -> float:
        return float(self._f(p))

    def dual(self, p, order=1) -> Dual:
        return _eval_dual(self.expr, Dual.seed(np.asarray(p, dtype=float), order),
                          self.n, order, self._consts)

    def grad(self, p) -> np.ndarray:
        if self.constant:
            return np.zeros(self.n)
        return self.dual(p).partials

    def hessian(self, p) -> np.ndarray:
        if self.constant:
            return np.zeros((self.n, self.n))
        return _symmetrize(self.dual(p, order=2).hess, str(self))


def _symmetrize(H, label=""):
    scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
    asym = float(np.max(np.abs(H - H.T))) if H.size else 0.0
    if asym > 1e-9 * scale:
        raise HessianAsymmetryError(f"Hessian asymmetry {asym:.3g} for {label}")
    return 0.5 * (H + H.T)


class VectorFieldExpr:
    """n component expressions ``X = sum_i X_i d/dx_i``."""

    def __init__(self, components: Sequence, n: int, params=None, aliases=None):
        if len(components) != n:
            raise ExprError(f"vector field needs {n} components, got {len(components)}")
        self.n = n
        self.params = dict(params or {})
        self.components = [ScalarField(c, n, self.params, aliases) for c in components]

    def __repr__(self):
        return f"VectorFieldExpr({[str(c) for c in self.components]!r})"

    def __call__(self, p):
        return self.value(p)

    def value(self, p) -> np.ndarray:
        return np.array([c.value(p) for c in self.components])

    def jacobian(self, p) -> np.ndarray:
        """J[i, j] = d X_i / d x_j."""
        return np.array([c.grad(p) for c in self.components]).reshape(self.n, self.n)

    def strings(self):
        return [str(c) for c in self.components]


class MatrixFieldExpr:
    """Skew-symmetric n x n matrix field given by its strict upper triangle.

    ``entries`` may be a full n x n nested list; entries below the diagonal
    are then checked for consistency by :func:`check_skew` and otherwise
    ignored.  ``None`` or ``""`` entries are zero.
    """

    def __init__(self, entries, n: int, params=None, aliases=None):
        if len(entries) != n or any(len(row) != n for row in entries):
            raise ExprError(f"form needs an {n}x{n} matrix")
        self.n = n
        self.params = dict(params or {})
        self.upper = {}
        self.lower = {}
        for i in range(n):
            for j in range(n):
                e = entries[i][j]
                if e is None or (isinstance(e, str) and not e.strip()):
                    continue
                f = ScalarField(e, n, self.params, aliases)
                if i < j:
                    if not (f.constant and f.value(None) == 0.0):
                        self.upper[(i, j)] = f
                else:
                    self.lower[(i, j)] = f
        self._const = all(f.constant for f in self.upper.values())
        if self._const:
            self._A0 = self._assemble({k: f.value(None) for k, f in self.upper.items()})

    def _assemble(self, vals):
        A = np.zeros((self.n, self.n))
        for (i, j), v in vals.items():
            A[i, j] = v
            A[j, i] = -v
        return A

    def __call__(self, p):
        return self.value(p)

    def value(self, p) -> np.ndarray:
        if self._const:
            return self._A0.copy()
        return self._assemble({k: f.value(p) for k, f in self.upper.items()})

    def derivative(self, p) -> np.ndarray:
        """D[i, j, l] = d A_ij / d x_l."""
        D = np.zeros((self.n, self.n, self.n))
        if self._const:
            return D
        for (i, j), f in self.upper.items():
            g = f.grad(p)
            D[i, j] = g
            D[j, i] = -g
        return D

    def skew_violations(self, points, tol=1e-10):
        """Explicit lower or diagonal entries that contradict skewness."""
        bad = []
        for (i, j), f in sorted(self.lower.items()):
            for p in points:
                other = self.upper.get((j, i))
                expected = -other.value(p) if other is not None else 0.0
                got = f.value(p)
                if abs(got - expected) > tol * max(1.0, abs(expected)):
                    bad.append((i, j, str(f)))
                    break
        return bad

    def strings(self):
        out = [["0"] * self.n for _ in range(self.n)]
        for (i, j), f in self.upper.items():
            out[i][j] = str(f)
        return out


# spec-level entry points

def grad(f: ScalarField, p) -> np.ndarray:
    return f.grad(p)


def jacobian(V: VectorFieldExpr, p) -> np.ndarray:
    return V.jacobian(p)


def hessian(f: ScalarField, p) -> np.ndarray:
    return f.hessian(p)
