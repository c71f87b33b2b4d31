"""Explicit example families with two completely invariant basins.

Each builder returns a ``CatalogEntry``: the map, its relevant fixed points,
a certified trap set (one basin index per completely invariant domain), and
the singular values where they are known in closed form.

Basin indices are fixed per family:

======== =================================== ===================================
entry    basin 0                             basin 1
======== =================================== ===================================
ex1      U, contains the negative axis       V, contains the positive axis
ex2      basin of xi_- < 0                   basin of xi_+ > 0
ex3      upper half-plane                    lower half-plane
ex4      petal at a                          petal at -a
ex5      parabolic basin of i                attracting basin of -3.1864i
tan      upper half-plane                    lower half-plane
======== =================================== ===================================
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import expr as E
from .dynamics import (
    FixedPointRecord,
    MeroMap,
    TrapSet,
    disk_trap,
    find_fixed_point,
    find_real_root,
    fixed_point_record,
    petal_traps,
)
from .errors import NoSignChange, NoZeroFound, OutOfRange, TooClosePole

# Printed constants, kept as test expectations only.
PRINTED = {
    "ex1_a": 0.16763487,
    "ex1_g_at_b": 0.764166,
    "ex1_inv_gprime_b": 16.083479,
    "ex2_beta": 26.712615,
    "ex4_a": complex(-3.7488381, -1.3843391),
    "ex5_a": 2.3810978,
    "ex5_attracting": complex(0, -3.1864112),
}

G_AST = E.parse("1/(1 + a*coss(z))")
_COSS = E.parse("coss(z)")
EX1_SOURCE = "inv_gpb*(1/(1 + a*coss(z + b)) - gb)"


@dataclass(frozen=True)
class Example1Params:
    a: float
    b: float
    g_at_b: float
    inv_gprime_b: float
    crit_vals: tuple[float, float]  # (d_plus, d_minus)
    asym_val: float

    @property
    def gprime_b(self) -> float:
        return 1 / self.inv_gprime_b

    @property
    def d_plus(self) -> float:
        return self.crit_vals[0]

    @property
    def d_minus(self) -> float:
        return self.crit_vals[1]


@dataclass(frozen=True)
class Example3Params:
    ratio: float
    c: float
    truncation: int
    tail_bound: float

    @property
    def poles(self) -> np.ndarray:
        return self.ratio ** np.arange(self.truncation + 1)


@dataclass
class CatalogEntry:
    id: str
    f: MeroMap
    fixed_points: list[FixedPointRecord]
    traps: TrapSet
    singular_values: list[complex]
    basin_names: dict[int, str]
    params: Any = None
    constants: dict[str, Any] = field(default_factory=dict)
    julia_ground_truth: str | None = None
    palette: dict[int, tuple[int, int, int]] = field(default_factory=dict)


BLACK, WHITE = (0, 0, 0), (255, 255, 255)


# ---------------------------------------------------------------------------
# Example 1


def g_jet(x, a: float, order: int = 3) -> E.Jet3:
    """Jet of g(z) = 1/(1 + a cos(sqrt z))."""
    return E.eval_jet(G_AST, x, {"a": a}, order)


def gpp(x: float, a: float) -> float:
    return g_jet(x, a, 2).d2.real


def g_second_derivative_at_zero_printed(a: float) -> float:
    """The quoted closed form for g''(0) in the first example.

    The exact value is a(5a - 1)/(12 (1 + a)^3); the printed form is six
    times larger.  Both are negative on (0, 1/5), which is all that is used.
    """
    return a * (5 * a - 1) / (2 * (a + 1) ** 3)


def g_second_derivative_at_zero(a: float) -> float:
    return a * (5 * a - 1) / (12 * (a + 1) ** 3)


def negative_zeros_of_gpp(a: float, bound: float = 100.0, step: float = 0.25) -> list[float]:
    """All sign changes of g'' on [-bound, -1e-3], refined by Brent."""
    xs = np.arange(-bound, -1e-3, step)
    xs = np.append(xs, -1e-3)
    vals = [gpp(x, a) for x in xs]
    zeros = []
    for x0, x1, v0, v1 in zip(xs, xs[1:], vals, vals[1:]):
        if v0 == 0:
            zeros.append(float(x0))
        elif v0 * v1 < 0:
            zeros.append(find_real_root(lambda x: gpp(x, a), x0, x1, tol=1e-13))
    return zeros


def solve_b(a: float) -> float:
    """Smallest negative zero of g'' for the given ``a``."""
    if not 0 < a < 0.2:
        raise OutOfRange(f"a={a} outside (0, 1/5)")
    zeros = negative_zeros_of_gpp(a)
    if not zeros:
        raise NoZeroFound(f"g'' has no sign change on [-100, -1e-3] for a={a}")
    b = zeros[0]
    left = np.linspace(max(-100.0, b - 50.0), b, 21)[:-1]
    if not all(gpp(x, a) > 0 for x in left):
        raise NoZeroFound(f"g'' is not positive left of b={b}")
    return b


def solve_a(b: float) -> float:
    """The a in (0, 1/5) with g''(b) = 0.

    Writing C = cos(sqrt b), g''(b) = 0 reduces to a (2 C'^2 - C C'') = C'',
    linear in a; the coefficients come from the jet of cos(sqrt z) at b.
    """
    if not b < 0:
        raise OutOfRange(f"b={b} must be negative")
    C0, C1, C2, _ = E.eval_jet(_COSS, b, {}, 2).slots()
    a = (C2 / (2 * C1 * C1 - C0 * C2)).real
    if not 0 < a < 0.2:
        raise OutOfRange(f"solution a={a} outside (0, 1/5) for b={b}")
    return a


def printed_a_of_b(b: float) -> float:
    """The printed a-b relation, evaluated literally with the principal sqrt.

    Its numerator has the opposite sign of the relation implied by
    g''(b) = 0, so it returns -a; see ``solve_a``.
    """
    s = cmath.sqrt(b)
    sn, cs = cmath.sin(s), cmath.cos(s)
    return ((s * cs - sn) / (s + s * sn * sn - sn * cs)).real


def example1_params(b: float = -1.0, a: float | None = None) -> Example1Params:
    if a is None:
        a = solve_a(b)
    j = g_jet(b, a, 1)
    gb, gpb = j.d0.real, j.d1.real
    d_plus = (1 / (1 + a) - gb) / gpb
    d_minus = (1 / (1 - a) - gb) / gpb
    return Example1Params(a, b, gb, 1 / gpb, (d_plus, d_minus), -gb / gpb)


def _ex1_map(p: Example1Params, alpha: float = 1.0) -> MeroMap:
    params = {"a": p.a, "b": p.b, "gb": p.g_at_b, "inv_gpb": p.inv_gprime_b}
    if alpha == 1.0:
        return MeroMap(E.parse(EX1_SOURCE), params, EX1_SOURCE)
    src = "alpha*" + EX1_SOURCE
    return MeroMap(E.parse(src), {**params, "alpha": alpha}, src)


def _ex1_constants(p: Example1Params) -> dict:
    return {
        "a": p.a,
        "b": p.b,
        "g(b)": p.g_at_b,
        "g'(b)": p.gprime_b,
        "1/g'(b)": p.inv_gprime_b,
        "d_plus": p.d_plus,
        "d_minus": p.d_minus,
        "c (asymptotic value)": p.asym_val,
        "g''(b)": gpp(p.b, p.a),
    }


def build_example1(b: float = -1.0, a: float | None = None) -> CatalogEntry:
    p = example1_params(b, a)
    f = _ex1_map(p)
    # petal directions sorted by phase: +1 (V, basin 1), then -1 (U, basin 0)
    traps = TrapSet(petal_traps(f, 0j, basins=[1, 0]))
    return CatalogEntry(
        id="ex1",
        f=f,
        fixed_points=[fixed_point_record(f, 0j)],
        traps=traps,
        singular_values=[complex(p.asym_val), complex(p.d_plus), complex(p.d_minus)],
        basin_names={0: "U", 1: "V"},
        params=p,
        constants=_ex1_constants(p),
        palette={0: WHITE, 1: BLACK},
    )


# ---------------------------------------------------------------------------
# Example 2


def superattracting_beta(p: Example1Params) -> float:
    """beta with beta (g(pi^2) - g(b)) = pi^2 - b, making pi^2 - b a superattracting fixed point."""
    xi = math.pi**2 - p.b
    return xi / (1 / (1 - p.a) - p.g_at_b)


def _first_axis_fixed_point(f: MeroMap, sign: int, bound: float = 100.0, step: float = 0.25):
    h = lambda x: (f(sign * x) - sign * x).real  # noqa: E731
    xs = np.append(1e-3, np.arange(step, bound, step))
    vals = [h(x) for x in xs]
    for x0, x1, v0, v1 in zip(xs, xs[1:], vals, vals[1:]):
        if v0 * v1 < 0:
            x = find_real_root(h, x0, x1, tol=1e-14)
            return find_fixed_point(f, sign * x)
    raise NoSignChange(f"no fixed point found on the {'positive' if sign > 0 else 'negative'} axis")


def build_example2(b: float = -1.0, alpha: float | None = None, superattracting: bool = False) -> CatalogEntry:
    """f_alpha = alpha f with Example 1's f.

    With ``superattracting=True`` alpha is chosen so that the positive
    fixed point is the critical point pi^2 - b; ``beta = alpha / g'(b)``.
    """
    p = example1_params(b)
    if superattracting:
        beta = superattracting_beta(p)
        alpha = beta * p.gprime_b
    elif alpha is None:
        raise ValueError("alpha is required unless superattracting=True")
    if alpha == 1.0:
        entry = build_example1(b)
        entry.id = "ex2-alpha"
        entry.constants["alpha"] = 1.0
        return entry
    if alpha < 1.0:
        raise OutOfRange(f"alpha={alpha} must be > 1")
    f = _ex1_map(p, alpha)
    if superattracting:
        fp_plus = find_fixed_point(f, math.pi**2 - b)
    else:
        fp_plus = _first_axis_fixed_point(f, +1)
    fp_minus = _first_axis_fixed_point(f, -1)
    traps = TrapSet([disk_trap(f, fp_minus.location, 0), disk_trap(f, fp_plus.location, 1)])
    constants = _ex1_constants(p)
    constants.update({"alpha": alpha, "beta": alpha * p.inv_gprime_b})
    return CatalogEntry(
        id="ex2-super" if superattracting else "ex2-alpha",
        f=f,
        fixed_points=[fp_minus, fp_plus, fixed_point_record(f, 0j)],
        traps=traps,
        singular_values=[complex(alpha * v) for v in (p.asym_val, p.d_plus, p.d_minus)],
        basin_names={0: "xi_minus", 1: "xi_plus"},
        params=p,
        constants=constants,
        palette={0: WHITE, 1: BLACK},
    )


# ---------------------------------------------------------------------------
# Example 3


def example3_truncation(ratio: float, target: float = 1e-13) -> tuple[int, float]:
    """Smallest N with sum_{k>N} ratio^-k < target, and that tail."""
    n = 0
    while True:
        tail = ratio ** (-n) / (ratio - 1)  # sum_{k>n} ratio^-k
        if tail < target:
            return n, tail
        n += 1


def eval_g3(z, params: Example3Params, order: int = 3) -> E.Jet3:
    """Truncated jet of g(z) = sum_k 1/(a_k - z), a_k = ratio^k.

    ``err`` bounds the omitted tail of the value: |1/(a_k - z)| <= 2/a_k
    whenever |z| <= a_N / 2.
    """
    z = complex(z)
    poles = params.poles
    if np.min(np.abs(poles - z)) < 1e-9:
        raise TooClosePole(f"z={z} within 1e-9 of a pole")
    d = [0j, 0j, 0j, 0j]
    for ak in poles:
        inv = 1 / (ak - z)
        p = inv
        for m in range(order + 1):
            d[m] += math.factorial(m) * p
            p *= inv
    err = 2 * params.tail_bound if abs(z) <= poles[-1] / 2 else math.inf
    return E.Jet3(*d, err=err)


def example3_params(ratio: float = 2.0) -> Example3Params:
    if ratio < 1.5:
        raise OutOfRange(f"ratio={ratio} must be >= 1.5")
    n, tail = example3_truncation(ratio)
    proto = Example3Params(ratio, 0.0, n, tail)
    a0, a1 = 1.0, ratio
    lo, hi = a0 + 0.05 * (a1 - a0), a1 - 0.05 * (a1 - a0)
    c = find_real_root(lambda x: eval_g3(x, proto, 2).d2.real, lo, hi, tol=1e-14)
    return Example3Params(ratio, c, n, tail)


def example3_ast(params: Example3Params) -> E.ExprNode:
    w = E.Add(E.Var(), E.Param("c"))
    total = None
    for ak in params.poles:
        term = E.Div(E.Const(1.0), E.Sub(E.Const(float(ak)), w))
        total = term if total is None else E.Add(total, term)
    return E.Mul(E.Param("inv_gpc"), E.Sub(total, E.Param("gc")))


def build_example3(ratio: float = 2.0) -> CatalogEntry:
    p = example3_params(ratio)
    j = eval_g3(p.c, p, 1)
    gc, gpc = float(j.d0.real), float(j.d1.real)
    ast = example3_ast(p)
    f = MeroMap(ast, {"c": p.c, "gc": gc, "inv_gpc": 1 / gpc}, f"(g(z + c) - g(c))/g'(c), a_k={ratio}^k, N={p.truncation}")
    # directions -i (lower, basin 1) then +i (upper, basin 0)
    traps = TrapSet(petal_traps(f, 0j, basins=[1, 0]))
    return CatalogEntry(
        id="ex3",
        f=f,
        fixed_points=[fixed_point_record(f, 0j)],
        traps=traps,
        singular_values=[],
        basin_names={0: "upper", 1: "lower"},
        params=p,
        constants={"ratio": ratio, "c": p.c, "N": p.truncation, "tail_bound": p.tail_bound, "g(c)": gc, "g'(c)": gpc},
        julia_ground_truth="real-line",
        palette={0: WHITE, 1: BLACK},
    )


# ---------------------------------------------------------------------------
# Examples 4 and 5, and the lambda tan z comparison family


def refine_example4_a(a: complex = PRINTED["ex4_a"], steps: int = 20) -> complex:
    """Newton on sin(2a) = 2a, the condition for multiplier 1 at a."""
    for _ in range(steps):
        F = cmath.sin(2 * a) - 2 * a
        if F == 0:
            break
        a -= F / (2 * cmath.cos(2 * a) - 2)
    return a


def build_example4(refine: bool = True) -> CatalogEntry:
    a = refine_example4_a() if refine else PRINTED["ex4_a"]
    f = MeroMap("a*tan(z)/tan(a)", {"a": a})
    traps = TrapSet(petal_traps(f, a, basins=[0]) + petal_traps(f, -a, basins=[1]))
    t = cmath.tan(a)
    return CatalogEntry(
        id="ex4",
        f=f,
        fixed_points=[fixed_point_record(f, a), fixed_point_record(f, -a), fixed_point_record(f, 0j)],
        traps=traps,
        singular_values=[1j * a / t, -1j * a / t],
        basin_names={0: "petal(a)", 1: "petal(-a)"},
        params={"a": a, "a_printed": PRINTED["ex4_a"], "refined": refine},
        constants={"a": a, "a_printed": PRINTED["ex4_a"]},
        palette={0: BLACK, 1: WHITE},
    )


def build_example5() -> CatalogEntry:
    a = 1 / (1 - math.tanh(1.0) ** 2)
    f = MeroMap("a*tan(z) - a*tan(i) + i", {"a": a})
    attracting = find_fixed_point(f, -3j)
    traps = TrapSet(petal_traps(f, 1j, basins=[0]) + [disk_trap(f, attracting.location, 1)])
    shift = 1j - a * cmath.tan(1j)
    return CatalogEntry(
        id="ex5",
        f=f,
        fixed_points=[fixed_point_record(f, 1j), attracting],
        traps=traps,
        singular_values=[1j * a + shift, -1j * a + shift],
        basin_names={0: "parabolic", 1: "attracting"},
        params={"a": a},
        constants={"a": a},
        palette={0: WHITE, 1: BLACK},
    )


def build_tan(lam: float = 2.0) -> CatalogEntry:
    """lambda tan z, lambda > 1: attracting fixed points on the imaginary axis, J = R."""
    if not lam > 1:
        raise OutOfRange(f"lambda={lam} must be > 1")
    f = MeroMap("lam*tan(z)", {"lam": lam})
    y = find_real_root(lambda t: lam * math.tanh(t) - t, 1e-3, lam + 1.0)
    up, down = find_fixed_point(f, 1j * y), find_fixed_point(f, -1j * y)
    traps = TrapSet([disk_trap(f, up.location, 0), disk_trap(f, down.location, 1)])
    return CatalogEntry(
        id="tan",
        f=f,
        fixed_points=[up, down, fixed_point_record(f, 0j)],
        traps=traps,
        singular_values=[1j * lam, -1j * lam],
        basin_names={0: "upper", 1: "lower"},
        params={"lam": lam},
        constants={"lambda": lam},
        julia_ground_truth="real-line",
        palette={0: WHITE, 1: BLACK},
    )


ENTRY_IDS = ("ex1", "ex2-alpha", "ex2-super", "ex3", "ex4", "ex5", "tan")


def build_entry(entry_id: str, **kw) -> CatalogEntry:
    """Build a catalog entry by string id; unknown keyword arguments are ignored."""
    kw = {k: v for k, v in kw.items() if v is not None}
    if entry_id == "ex1":
        return build_example1(b=kw.get("b", -1.0))
    if entry_id == "ex2-alpha":
        return build_example2(b=kw.get("b", -1.0), alpha=kw.get("alpha", 1.01))
    if entry_id == "ex2-super":
        return build_example2(b=kw.get("b", -1.0), superattracting=True)
    if entry_id == "ex3":
        return build_example3(ratio=kw.get("ratio", 2.0))
    if entry_id == "ex4":
        return build_example4(refine=kw.get("refine", True))
    if entry_id == "ex5":
        return build_example5()
    if entry_id == "tan":
        return build_tan(kw.get("lam", 2.0))
    raise KeyError(f"unknown catalog entry {entry_id!r}; choose from {', '.join(ENTRY_IDS)}")
