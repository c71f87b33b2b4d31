"""Meromorphic expressions in one complex variable ``z``.

Expressions are parsed into small immutable trees, printed back in a fully
parenthesised canonical form, and evaluated together with their first three
derivatives (``Jet3``).  ``coss(z)`` is cos(sqrt(z)) as a single entire
primitive, so its jets stay regular at the origin.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('-')? power
    power  := atom ('^' integer)?
    atom   := number | 'i' | 'z' | ident | ident '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

from .errors import ParseError, PoleOrOverflow, UnboundParam, UnknownFunction

FUNCTIONS = ("sin", "cos", "tan", "exp", "sqrt", "sinh", "cosh", "tanh", "coss")
MAX_POW = 8
OVERFLOW = 1e150
COSS_SEAM = 0.01


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Add:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Sub:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Mul:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Div:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Neg:
    child: "ExprNode"


@dataclass(frozen=True)
class Pow:
    base: "ExprNode"
    exponent: int

    def __post_init__(self):
        if not (isinstance(self.exponent, int) and -MAX_POW <= self.exponent <= MAX_POW):
            raise ValueError(f"exponent must be an integer in [-{MAX_POW}, {MAX_POW}]")


@dataclass(frozen=True)
class Call:
    fn: str
    child: "ExprNode"

    def __post_init__(self):
        if self.fn not in FUNCTIONS:
            raise UnknownFunction(f"unknown function {self.fn!r}", 0, FUNCTIONS)


ExprNode = Union[Const, Var, Param, Add, Sub, Mul, Div, Neg, Pow, Call]
_BINARY = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def params_of(ast: ExprNode) -> set[str]:
    """Names of all parameters referenced in ``ast``."""
    if isinstance(ast, Param):
        return {ast.name}
    if isinstance(ast, (Add, Sub, Mul, Div)):
        return params_of(ast.left) | params_of(ast.right)
    if isinstance(ast, (Neg, Call)):
        return params_of(ast.child)
    if isinstance(ast, Pow):
        return params_of(ast.base)
    return set()


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = []  # (kind, text, char_offset)
        pos = 0
        while True:
            while pos < len(source) and source[pos].isspace():
                pos += 1
            if pos >= len(source):
                break
            m = _TOKEN.match(source, pos)
            if m is None or m.end() == pos:
                raise ParseError(f"unexpected character {source[pos]!r}", self._byte(pos))
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("eof", "", len(source)))
        self.i = 0

    def _byte(self, char_offset):
        return len(self.source[:char_offset].encode("utf-8"))

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected, tok=None):
        kind, text, off = tok or self.peek()
        what = "end of input" if kind == "eof" else repr(text)
        raise ParseError(f"unexpected {what}", self._byte(off), expected)

    def expect(self, text):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != text:
            self.fail({text})
        return self.next()

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "eof":
            self.fail({"+", "-", "*", "/", "^", "end of input"})
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.next()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.next()[1]
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self):
        if self.peek()[:2] == ("op", "-"):
            self.next()
            return Neg(self.power())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.next()
            sign = 1
            if self.peek()[:2] == ("op", "-"):
                self.next()
                sign = -1
            tok = self.peek()
            if tok[0] != "num" or not tok[1].isdigit():
                self.fail({"integer"})
            self.next()
            n = sign * int(tok[1])
            if abs(n) > MAX_POW:
                raise ParseError(f"exponent {n} outside [-{MAX_POW}, {MAX_POW}]", self._byte(tok[2]))
            return Pow(base, n)
        return base

    def atom(self):
        kind, text, off = tok = self.next()
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            if text == "i":
                return Const(1j)
            if text == "z":
                return Var()
            if self.peek()[:2] == ("op", "("):
                if text not in FUNCTIONS:
                    raise UnknownFunction(f"unknown function {text!r}", self._byte(off), FUNCTIONS)
                self.next()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in FUNCTIONS:
                self.fail({"("})
            return Param(text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.fail({"number", "i", "z", "identifier", "("}, tok)


def parse(source: str) -> ExprNode:
    """Parse ``source`` into an expression tree.

    >>> parse("a*tan(z)/tan(a)")
    Div(left=Mul(left=Param(name='a'), right=Call(fn='tan', child=Var())), right=Call(fn='tan', child=Param(name='a')))
    """
    return _Parser(source).parse()


def _format_number(x: float) -> str:
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def format(ast: ExprNode) -> str:  # noqa: A001 - mirrors parse()
    """Canonical fully parenthesised text of ``ast``.

    Non-negative real constants and the constant ``i`` round-trip
    structurally; other constants are printed as equivalent arithmetic.
    """
    if isinstance(ast, Var):
        return "z"
    if isinstance(ast, Param):
        return ast.name
    if isinstance(ast, Const):
        v = ast.value
        if v == 1j:
            return "i"
        re_, im = v.real, v.imag
        if im == 0 and re_ >= 0 and math.copysign(1, re_) > 0:
            return _format_number(re_)
        parts = []
        if re_ != 0 or im == 0:
            parts.append(_format_number(abs(re_)) if re_ >= 0 else f"(-{_format_number(-re_)})")
        if im != 0:
            mag = "i" if abs(im) == 1 else f"({_format_number(abs(im))} * i)"
            parts.append(mag if im > 0 else f"(-{mag})")
        return parts[0] if len(parts) == 1 else f"({parts[0]} + {parts[1]})"
    if isinstance(ast, Neg):
        return f"(-{format(ast.child)})"
    if isinstance(ast, Pow):
        return f"({format(ast.base)}^{ast.exponent})"
    if isinstance(ast, Call):
        return f"{ast.fn}({format(ast.child)})"
    op = _BINARY[type(ast)]
    return f"({format(ast.left)} {op} {format(ast.right)})"


# ---------------------------------------------------------------------------
# Jets


@dataclass(frozen=True)
class Jet3:
    """Value and first three derivatives at a point.

    ``err`` is an absolute error bound on ``d0`` for truncated evaluations
    (zero for closed-form expressions).
    """

    d0: complex
    d1: complex = 0j
    d2: complex = 0j
    d3: complex = 0j
    err: float = 0.0

    @classmethod
    def variable(cls, z) -> "Jet3":
        return cls(complex(z), 1 + 0j)

    @classmethod
    def constant(cls, c) -> "Jet3":
        return cls(complex(c))

    def slots(self):
        return (self.d0, self.d1, self.d2, self.d3)

    def __add__(self, o: "Jet3") -> "Jet3":
        return Jet3(self.d0 + o.d0, self.d1 + o.d1, self.d2 + o.d2, self.d3 + o.d3)

    def __sub__(self, o: "Jet3") -> "Jet3":
        return Jet3(self.d0 - o.d0, self.d1 - o.d1, self.d2 - o.d2, self.d3 - o.d3)

    def __neg__(self) -> "Jet3":
        return Jet3(-self.d0, -self.d1, -self.d2, -self.d3)

    def __mul__(self, o: "Jet3") -> "Jet3":
        f0, f1, f2, f3 = self.slots()
        g0, g1, g2, g3 = o.slots()
        return Jet3(
            f0 * g0,
            f1 * g0 + f0 * g1,
            f2 * g0 + 2 * f1 * g1 + f0 * g2,
            f3 * g0 + 3 * f2 * g1 + 3 * f1 * g2 + f0 * g3,
        )

    def compose(self, p0, p1, p2, p3) -> "Jet3":
        """Jet of phi(self) given phi and its derivatives at ``self.d0``."""
        u1, u2, u3 = self.d1, self.d2, self.d3
        return Jet3(
            p0,
            p1 * u1,
            p2 * u1 * u1 + p1 * u2,
            p3 * u1 * u1 * u1 + 3 * p2 * u1 * u2 + p1 * u3,
        )

    def reciprocal(self) -> "Jet3":
        u = self.d0
        if u == 0:
            raise PoleOrOverflow("division by zero")
        r = 1 / u
        return self.compose(r, -r * r, 2 * r * r * r, -6 * r * r * r * r)

    def __truediv__(self, o: "Jet3") -> "Jet3":
        return self * o.reciprocal()

    def __pow__(self, n: int) -> "Jet3":
        u = self.d0
        if n < 0 and u == 0:
            raise PoleOrOverflow("negative power of zero")
        derivs = []
        coef = 1
        for m in range(4):
            # m-th derivative of u**n; zero once the falling factorial hits 0
            derivs.append(coef * u ** (n - m) if coef else 0j)
            coef *= n - m
        return self.compose(*derivs)


_FACT = [math.factorial(k) for k in range(40)]


def coss_series(z: complex, terms: int = 12):
    """cos(sqrt(z)) and three derivatives from the Taylor series at 0."""
    out = [0j, 0j, 0j, 0j]
    for k in range(terms):
        sign = -1 if k % 2 else 1
        c = sign / _FACT[2 * k]
        for m in range(4):
            if k >= m:
                # d^m/dz^m z^k = k!/(k-m)! z^(k-m)
                out[m] += c * (_FACT[k] / _FACT[k - m]) * z ** (k - m)
    return out


def coss_closed(z: complex):
    """cos(sqrt(z)) and three derivatives via the principal square root.

    Every expression is even in sqrt(z), so the branch choice cancels.
    """
    s = cmath.sqrt(z)
    sn, cs = cmath.sin(s), cmath.cos(s)
    s2 = s * s
    d1 = -sn / (2 * s)
    d2 = (sn - s * cs) / (4 * s2 * s)
    d3 = (s2 * sn - 3 * sn + 3 * s * cs) / (8 * s2 * s2 * s)
    return [cs, d1, d2, d3]


def coss_derivs(z: complex):
    if abs(z) < COSS_SEAM:
        return coss_series(z)
    return coss_closed(z)


def _fn_derivs(fn: str, u: complex):
    if fn == "sin":
        s, c = cmath.sin(u), cmath.cos(u)
        return s, c, -s, -c
    if fn == "cos":
        s, c = cmath.sin(u), cmath.cos(u)
        return c, -s, -c, s
    if fn == "exp":
        e = cmath.exp(u)
        return e, e, e, e
    if fn == "sinh":
        s, c = cmath.sinh(u), cmath.cosh(u)
        return s, c, s, c
    if fn == "cosh":
        s, c = cmath.sinh(u), cmath.cosh(u)
        return c, s, c, s
    if fn == "tan":
        t = cmath.tan(u)
        sec2 = 1 + t * t
        return t, sec2, 2 * t * sec2, sec2 * (2 + 6 * t * t)
    if fn == "tanh":
        t = cmath.tanh(u)
        sech2 = 1 - t * t
        return t, sech2, -2 * t * sech2, sech2 * (6 * t * t - 2)
    if fn == "sqrt":
        r = cmath.sqrt(u)
        if r == 0:
            raise PoleOrOverflow("sqrt is not differentiable at 0")
        return r, 1 / (2 * r), -1 / (4 * r**3), 3 / (8 * r**5)
    if fn == "coss":
        return tuple(coss_derivs(u))
    raise UnknownFunction(f"unknown function {fn!r}", 0, FUNCTIONS)


def _check(j: Jet3, order: int) -> Jet3:
    for v in j.slots()[: order + 1]:
        if not abs(v) <= OVERFLOW:
            raise PoleOrOverflow(f"intermediate magnitude {abs(v):.3g} exceeds {OVERFLOW:g}")
    return j


def eval_jet(ast: ExprNode, z, params: Mapping[str, complex] | None = None, order: int = 3) -> Jet3:
    """Evaluate ``ast`` and its derivatives up to ``order`` (at most 3) at ``z``.

    Raises PoleOrOverflow when an intermediate value (or derivative up to
    ``order``) exceeds 1e150 in magnitude, and UnboundParam for unknown names.
    """
    if not 0 <= order <= 3:
        raise ValueError("order must be in 0..3")
    params = params or {}
    z = complex(z)

    def ev(node):
        if isinstance(node, Var):
            return Jet3.variable(z)
        if isinstance(node, Const):
            return Jet3.constant(node.value)
        if isinstance(node, Param):
            try:
                return Jet3.constant(params[node.name])
            except KeyError:
                raise UnboundParam(node.name) from None
        if isinstance(node, Neg):
            return -ev(node.child)
        if isinstance(node, Pow):
            return _check(ev(node.base) ** node.exponent, order)
        if isinstance(node, Call):
            u = ev(node.child)
            try:
                d = _fn_derivs(node.fn, u.d0)
            except (OverflowError, ValueError) as exc:
                raise PoleOrOverflow(f"{node.fn} overflow: {exc}") from None
            return _check(u.compose(*d), order)
        left, right = ev(node.left), ev(node.right)
        if isinstance(node, Add):
            out = left + right
        elif isinstance(node, Sub):
            out = left - right
        elif isinstance(node, Mul):
            out = left * right
        else:
            out = left / right
        return _check(out, order)

    return _check(ev(ast), order)


def evaluate(ast: ExprNode, z, params: Mapping[str, complex] | None = None) -> complex:
    return eval_jet(ast, z, params, 0).d0
