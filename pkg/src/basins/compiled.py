"""Compile expression trees to numba scalar functions.

The generated function has signature ``f(z) -> (value, ok)``; ``ok`` is
False when a division by zero occurs or any intermediate magnitude exceeds
the overflow threshold.  Parameters are baked in as literals, so one
compiled function corresponds to one (tree, binding) pair.
"""

from __future__ import annotations

import cmath
import math

import numba

from . import expr as E
from .errors import UnboundParam

_JIT = dict(nogil=True, error_model="numpy")


@numba.njit(**_JIT)
def _ok(t):
    return abs(t) <= 1e150


@numba.njit(**_JIT)
def _coss(u):
    if abs(u) < 0.01:
        # Horner on sum (-1)^k u^k / (2k)!, k <= 11
        acc = 0j
        for k in range(11, -1, -1):
            c = 1.0
            for j in range(1, 2 * k + 1):
                c /= j
            if k % 2:
                c = -c
            acc = acc * u + c
        return acc
    return cmath.cos(cmath.sqrt(u))


_CALLS = {
    "sin": "cmath.sin",
    "cos": "cmath.cos",
    "tan": "cmath.tan",
    "exp": "cmath.exp",
    "sqrt": "cmath.sqrt",
    "sinh": "cmath.sinh",
    "cosh": "cmath.cosh",
    "tanh": "cmath.tanh",
    "coss": "_coss",
}


def _literal(c: complex) -> str:
    c = complex(c)
    return f"complex({c.real!r}, {c.imag!r})"


def generate_source(ast, params=None, name="_f") -> str:
    """Python source of the scalar evaluator for ``ast`` under ``params``."""
    params = params or {}
    lines = [f"def {name}(z):"]
    counter = [0]
    fail = "return 0j, False"

    def tmp():
        counter[0] += 1
        return f"t{counter[0]}"

    def emit(line):
        lines.append("    " + line)

    def checked(expr_src):
        t = tmp()
        emit(f"{t} = {expr_src}")
        emit(f"if not _ok({t}): {fail}")
        return t

    def gen(node):
        if isinstance(node, E.Var):
            return "z"
        if isinstance(node, E.Const):
            return _literal(node.value)
        if isinstance(node, E.Param):
            if node.name not in params:
                raise UnboundParam(node.name)
            return _literal(params[node.name])
        if isinstance(node, E.Neg):
            return checked(f"-{gen(node.child)}")
        if isinstance(node, E.Call):
            return checked(f"{_CALLS[node.fn]}({gen(node.child)})")
        if isinstance(node, E.Pow):
            base = gen(node.base)
            n = node.exponent
            if n == 0:
                return _literal(1)
            acc = base
            for _ in range(abs(n) - 1):
                acc = checked(f"{acc} * {base}")
            if n < 0:
                emit(f"if {acc} == 0: {fail}")
                acc = checked(f"1.0 / {acc}")
            return acc
        left, right = gen(node.left), gen(node.right)
        if isinstance(node, E.Div):
            emit(f"if {right} == 0: {fail}")
            return checked(f"{left} / {right}")
        op = E._BINARY[type(node)]
        return checked(f"{left} {op} {right}")

    out = gen(ast)
    emit(f"if not _ok({out}): {fail}")
    emit(f"return {out}, True")
    return "\n".join(lines) + "\n"


def compile_value(ast, params=None):
    """numba-compiled ``f(z) -> (complex, bool)`` for ``ast`` bound to ``params``."""
    src = generate_source(ast, params)
    namespace = {"cmath": cmath, "math": math, "_ok": _ok, "_coss": _coss}
    exec(compile(src, "<basins-generated>", "exec"), namespace)
    return numba.njit(**_JIT)(namespace["_f"])
