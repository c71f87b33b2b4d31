"""Plain-text verification report for a catalog entry.

Sections and keys appear in a fixed order so that reports diff cleanly.
Printed constants are compared with recomputed ones; a comparison is
``consistent`` when they agree to 1e-6 relative, otherwise it is flagged.
"""

from __future__ import annotations

import cmath
import math

from . import __version__
from . import catalog as C
from .dynamics import FixedPointClass, iterate, petal_data
from .errors import BasinsError

REL_TOL = 1e-6


def _fmt(v) -> str:
    if isinstance(v, complex):
        if v.imag == 0:
            return repr(v.real)
        sign = "+" if v.imag >= 0 else "-"
        return f"{v.real!r}{sign}{abs(v.imag)!r}i"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _compare(name: str, printed, derived, note: str = "") -> str:
    diff = abs(complex(derived) - complex(printed))
    ok = diff <= REL_TOL * max(1.0, abs(printed))
    status = "consistent" if ok else "INCONSISTENT"
    line = f"{name}: printed={_fmt(printed)} derived={_fmt(derived)} abs_diff={diff:.3e} status={status}"
    if note and not ok:
        line += f" ({note})"
    return line


def _printed_section(entry) -> list[str]:
    out = []
    if entry.id in ("ex1", "ex2-alpha", "ex2-super") and entry.params.b == -1.0:
        p = entry.params
        out.append(_compare("a", C.PRINTED["ex1_a"], p.a))
        f0_printed = p.inv_gprime_b * (p.g_at_b - C.PRINTED["ex1_g_at_b"])
        out.append(
            _compare(
                "g(b)",
                C.PRINTED["ex1_g_at_b"],
                p.g_at_b,
                f"with the printed g(b) the map gives f(0)={f0_printed:.6f}, not 0",
            )
        )
        out.append(_compare("1/g'(b)", C.PRINTED["ex1_inv_gprime_b"], p.inv_gprime_b))
        out.append(
            _compare(
                "a from the printed a-b relation",
                C.printed_a_of_b(p.b),
                p.a,
                "the printed relation has the opposite sign in its numerator",
            )
        )
        g2 = C.g_jet(0.0, p.a, 2).d2.real
        out.append(
            _compare(
                "g''(0) closed form",
                C.g_second_derivative_at_zero_printed(p.a),
                g2,
                f"the printed closed form is {C.g_second_derivative_at_zero_printed(p.a) / g2:.6g} times the jet value",
            )
        )
    if entry.id == "ex2-super" and entry.params.b == -1.0:
        out.append(_compare("beta", C.PRINTED["ex2_beta"], entry.constants["beta"]))
    if entry.id == "ex4":
        a = entry.constants["a"]
        out.append(_compare("a", C.PRINTED["ex4_a"], a))
        for label, val in (("printed", C.PRINTED["ex4_a"]), ("refined", C.refine_example4_a())):
            lam = 2 * val / cmath.sin(2 * val)
            out.append(f"|multiplier-1| at {label} a: {abs(lam - 1):.3e}")
    if entry.id == "ex5":
        out.append(_compare("a", C.PRINTED["ex5_a"], entry.constants["a"]))
        attracting = [r for r in entry.fixed_points if r.cls is FixedPointClass.ATTRACTING]
        out.append(_compare("attracting fixed point", C.PRINTED["ex5_attracting"], attracting[0].location))
    return out or ["(no printed constants for this entry)"]


def _parabolic_identity(entry) -> list[str]:
    if entry.id not in ("ex1", "ex3"):
        return []
    j = entry.f.jet(0.0, 3)
    return [
        "[parabolic identity at 0]",
        f"|f(0)|: {abs(j.d0):.3e}",
        f"|f'(0)-1|: {abs(j.d1 - 1):.3e}",
        f"|f''(0)|: {abs(j.d2):.3e}",
        f"f'''(0)/6: {_fmt(j.d3 / 6)}",
    ]


def verify_report(entry_id: str, params: dict | None = None, max_iter: int = 5000) -> str:
    """Report text (newline-terminated) for ``entry_id`` built with ``params``."""
    entry = C.build_entry(entry_id, **(params or {}))
    lines = [
        f"== verify {entry.id} ==",
        f"library_version: {__version__}",
        f"map: {entry.f.source}",
        "params: " + ", ".join(f"{k}={_fmt(v)}" for k, v in sorted((params or {}).items())),
        "[constants]",
    ]
    lines += [f"{k}: {_fmt(v)}" for k, v in entry.constants.items()]
    lines.append("[printed vs derived]")
    lines += _printed_section(entry)
    lines += _parabolic_identity(entry)

    lines.append("[fixed points]")
    for r in entry.fixed_points:
        lines.append(
            f"{_fmt(r.location)}: multiplier={_fmt(r.multiplier)} |multiplier|={abs(r.multiplier):.6g} "
            f"|multiplier-1|={abs(r.multiplier - 1):.3e} class={r.cls.value} residual={r.residual:.3e}"
        )

    lines.append("[singular values]")
    if not entry.singular_values:
        lines.append("(none in closed form)")
    for v in entry.singular_values:
        fate = iterate(entry.f, v, entry.traps, max_iter)
        name = entry.basin_names.get(fate.basin, "unresolved")
        lines.append(f"{_fmt(v)}: fate={fate} basin={name}")

    lines.append("[petals]")
    parabolic = [r for r in entry.fixed_points if r.cls is FixedPointClass.PARABOLIC]
    if not parabolic:
        lines.append("(no parabolic fixed points)")
    for r in parabolic:
        try:
            p, dirs = petal_data(entry.f, r.location)
            lines.append(f"{_fmt(r.location)}: petals={p} directions=" + ", ".join(_fmt(d) for d in dirs))
        except (BasinsError, ValueError) as exc:
            lines.append(f"{_fmt(r.location)}: petal data unavailable ({exc})")

    lines.append("[traps]")
    for t in entry.traps:
        basin = entry.basin_names.get(t.basin, t.basin)
        if hasattr(t, "direction"):
            deg = math.degrees(t.half_angle)
            lines.append(
                f"sector basin={basin} vertex={_fmt(t.vertex)} direction={_fmt(t.direction)} "
                f"half_angle_deg={deg:.6g} radius={t.radius!r}"
            )
        else:
            lines.append(f"disk basin={basin} center={_fmt(t.center)} radius={t.radius!r}")
    return "\n".join(lines) + "\n"
