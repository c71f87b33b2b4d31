import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from basins import catalog as C
from basins.dynamics import FixedPointClass, iterate, orbit
from basins.errors import NoZeroFound, OutOfRange, TooClosePole
from basins.render import resolve_entry

A_PRINTED = 0.16763487


# ---------------------------------------------------------------------------
# a-b pairing


def test_solve_b_printed_pair():
    assert C.solve_b(A_PRINTED) == pytest.approx(-1.0, abs=1e-4)


def test_solve_a_printed_pair():
    assert C.solve_a(-1.0) == pytest.approx(A_PRINTED, abs=1e-7)


def test_solve_b_other_a():
    b = C.solve_b(0.19)
    assert b < 0
    assert abs(C.gpp(b, 0.19)) < 1e-9
    # sign change across b, positive to the left
    assert C.gpp(b - 1e-3, 0.19) > 0 > C.gpp(b + 1e-3, 0.19)


def test_solve_round_trip():
    assert C.solve_a(C.solve_b(A_PRINTED)) == pytest.approx(A_PRINTED, abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-20.0, max_value=-0.05))
def test_solve_a_defining_property(b):
    a = C.solve_a(b)
    assert 0 < a < 0.2
    assert abs(C.gpp(b, a)) < 1e-9


def test_printed_relation_has_opposite_sign():
    assert C.printed_a_of_b(-1.0) == pytest.approx(-A_PRINTED, abs=1e-7)
    for b in (-0.5, -2.0, -4.0):
        assert C.printed_a_of_b(b) == pytest.approx(-C.solve_a(b), rel=1e-10)


def test_solver_errors():
    with pytest.raises(OutOfRange):
        C.solve_b(0.25)
    with pytest.raises(OutOfRange):
        C.solve_a(1.0)
    with pytest.raises(NoZeroFound):
        C.solve_b(1e-5)  # the zero lies left of the scan window


def test_g_second_derivative_closed_forms():
    for a in (0.05, A_PRINTED, 0.19):
        jet = C.g_jet(0.0, a, 2).d2.real
        assert jet == pytest.approx(C.g_second_derivative_at_zero(a), rel=1e-12)
        assert C.g_second_derivative_at_zero_printed(a) == pytest.approx(6 * jet, rel=1e-12)
        assert jet < 0


# ---------------------------------------------------------------------------
# Example 1


def test_example1_constants(ex1):
    p = ex1.params
    assert p.inv_gprime_b == pytest.approx(16.083479, abs=1e-4)
    assert p.g_at_b == pytest.approx(0.794485, abs=1e-5)
    assert p.g_at_b == pytest.approx(1 / (1 + p.a * math.cosh(1.0)), abs=1e-15)
    assert p.d_minus == pytest.approx(6.5446, abs=1e-3)
    assert p.d_plus == pytest.approx(0.9963, abs=1e-3)
    assert p.asym_val == pytest.approx(-12.7784, abs=1e-3)


def test_example1_params_identities(ex1):
    p = ex1.params
    assert 0 < p.a < 0.2
    assert abs(C.gpp(p.b, p.a)) < 1e-9
    assert p.d_plus == pytest.approx((1 / (1 + p.a) - p.g_at_b) / p.gprime_b, rel=1e-15)
    assert p.d_minus == pytest.approx((1 / (1 - p.a) - p.g_at_b) / p.gprime_b, rel=1e-15)
    assert p.asym_val == pytest.approx(-p.g_at_b / p.gprime_b, rel=1e-15)


def test_printed_g_of_b_breaks_identity(ex1):
    p = ex1.params
    f0 = p.inv_gprime_b * (p.g_at_b - C.PRINTED["ex1_g_at_b"])
    assert abs(f0) > 0.4


@pytest.mark.parametrize("b", [-0.3, -1.0, -2.0, -5.0])
def test_identity_chain(b):
    f = C.build_example1(b).f
    j = f.jet(0.0, 3)
    assert abs(j.d0) < 1e-7 and abs(j.d1 - 1) < 1e-7 and abs(j.d2) < 1e-7


def test_example1_axis_facts(ex1):
    f = ex1.f
    for x in np.linspace(-50, 0, 202)[1:-1]:
        y = f(x).real
        assert x < y < 0
    for x in np.linspace(0, 50, 202)[1:-1]:
        y = f(x).real
        assert 0 < y <= ex1.params.d_minus * (1 + 1e-12)


def test_example1_critical_points(ex1):
    b = ex1.params.b
    for k in range(1, 6):
        z = (k * math.pi) ** 2 - b
        assert abs(ex1.f.jet(z, 1).d1) < 1e-7
        # critical values alternate between d_minus (odd k) and d_plus (even k)
        expected = ex1.params.d_minus if k % 2 else ex1.params.d_plus
        assert ex1.f(z).real == pytest.approx(expected, rel=1e-9)


def test_example1_asymptotic_value(ex1):
    # g -> 0 along the negative axis (cos sqrt z grows), so f -> c
    assert ex1.f(-4000.0).real == pytest.approx(ex1.params.asym_val, abs=1e-9)


def test_example1_fixed_point_and_petals(ex1):
    rec = ex1.fixed_points[0]
    assert rec.location == 0 and rec.cls is FixedPointClass.PARABOLIC
    dirs = sorted(t.direction.real for t in ex1.traps)
    assert dirs == pytest.approx([-1.0, 1.0])
    # basin 0 = U on the negative direction, basin 1 = V on the positive one
    by_basin = {t.basin: t.direction.real for t in ex1.traps}
    assert by_basin == {0: pytest.approx(-1.0), 1: pytest.approx(1.0)}


# ---------------------------------------------------------------------------
# Example 2


def test_superattracting_beta(ex2s):
    assert ex2s.constants["beta"] == pytest.approx(26.712615, abs=1e-4)
    xi_plus = [r for r in ex2s.fixed_points if r.cls is FixedPointClass.SUPERATTRACTING]
    assert xi_plus[0].location == pytest.approx(1 + math.pi**2, abs=1e-9)
    # beta (g(pi^2) - g(-1)) = 1 + pi^2 with g(pi^2) = 1/(1 - a)
    p = ex2s.params
    assert ex2s.constants["beta"] * (1 / (1 - p.a) - p.g_at_b) == pytest.approx(1 + math.pi**2, rel=1e-14)


def test_example2_alpha():
    e = C.build_example2(-1.0, alpha=1.01)
    xi_minus, xi_plus = e.fixed_points[0], e.fixed_points[1]
    assert xi_minus.location.real < 0 < xi_plus.location.real
    assert abs(xi_minus.location.imag) < 1e-12 and abs(xi_plus.location.imag) < 1e-12
    assert abs(xi_minus.multiplier) < 1 and abs(xi_plus.multiplier) < 1
    # xi_pm -> 0 as alpha -> 1
    e2 = C.build_example2(-1.0, alpha=1.001)
    assert abs(e2.fixed_points[0].location) < abs(xi_minus.location)
    assert abs(e2.fixed_points[1].location) < abs(xi_plus.location)


def test_example2_alpha_one_degenerates():
    e = C.build_example2(-1.0, alpha=1.0)
    assert e.fixed_points[0].cls is FixedPointClass.PARABOLIC
    with pytest.raises(OutOfRange):
        C.build_example2(-1.0, alpha=0.9)


def test_singular_orbits_reach_traps(ex2s):
    for v in ex2s.singular_values:
        fate = iterate(ex2s.f, v, ex2s.traps, 2000)
        assert fate.resolved and fate.steps <= 2000


# ---------------------------------------------------------------------------
# Example 3


def test_eval_g3_basics(ex3):
    p = ex3.params
    assert C.eval_g3(0, p, 0).d0.real == pytest.approx(2.0, abs=1e-12)
    assert C.eval_g3(1j, p, 0).d0.imag > 0
    assert C.eval_g3(-1j, p, 0).d0.imag < 0
    with pytest.raises(TooClosePole):
        C.eval_g3(4.0, p, 0)


def test_eval_g3_tail_bound(ex3):
    p = ex3.params
    tail = sum(2.0**-k for k in range(p.truncation + 1, p.truncation + 200))
    assert tail <= p.tail_bound <= 1e-12
    # the error contract: truncation error of the value stays within err
    z = 0.37 + 0.2j
    j = C.eval_g3(z, p, 0)
    longer = C.Example3Params(2.0, p.c, p.truncation + 40, 0.0)
    assert abs(C.eval_g3(z, longer, 0).d0 - j.d0) <= j.err


def test_example3_inflection(ex3):
    p = ex3.params
    assert 1 < p.c < 2
    assert abs(C.eval_g3(p.c, p, 2).d2) < 1e-9


def test_example3_parabolic_identity(ex3):
    j = ex3.f.jet(0.0, 3)
    assert abs(j.d0) < 1e-7 and abs(j.d1 - 1) < 1e-7 and abs(j.d2) < 1e-7


def test_example3_half_plane_invariance(ex3):
    pts = orbit(ex3.f, 0.3j, 1000)
    assert np.all(np.isfinite(pts)) and np.all(pts.imag > 0)
    up = iterate(ex3.f, 0.3j, ex3.traps)
    down = iterate(ex3.f, -0.3j, ex3.traps)
    assert up.basin == 0 and down.basin == 1 and up.steps == down.steps


# ---------------------------------------------------------------------------
# Examples 4, 5 and lambda tan z


def test_example4(ex4):
    a = ex4.constants["a"]
    assert abs(ex4.f(-a) + a) < 1e-9
    assert abs(ex4.f(a) - a) < 1e-9
    assert abs(a - C.PRINTED["ex4_a"]) < 1e-7
    for r in ex4.fixed_points[:2]:
        assert r.cls is FixedPointClass.PARABOLIC


def test_example4_printed_a():
    e = C.build_example4(refine=False)
    a = C.PRINTED["ex4_a"]
    assert abs(e.f(a) - a) < 1e-6 and abs(e.f(-a) + a) < 1e-6
    lam = e.f.jet(a, 1).d1
    assert 1e-9 < abs(lam - 1) < 1e-3


def test_example4_refined_multiplier(ex4):
    a = ex4.constants["a"]
    assert abs(cmath.sin(2 * a) - 2 * a) < 1e-12
    assert abs(ex4.f.jet(a, 1).d1 - 1) < 1e-9
    assert abs(ex4.f.jet(-a, 1).d1 - 1) < 1e-9


def test_example5(ex5):
    a = ex5.constants["a"]
    assert a == pytest.approx(math.cosh(1.0) ** 2, abs=1e-12)
    assert a == pytest.approx(2.3810978, abs=1e-7)
    assert abs(ex5.f(1j) - 1j) < 1e-12
    attracting = ex5.fixed_points[1]
    assert abs(attracting.location + 3.1864112j) < 1e-5
    assert abs(attracting.multiplier) < 0.02
    assert ex5.fixed_points[0].cls is FixedPointClass.PARABOLIC


def test_tan_family(tan2):
    up, down = tan2.fixed_points[:2]
    assert up.location.imag > 0 > down.location.imag
    assert abs(up.location - 2j * cmath.tanh(up.location.imag)) < 1e-12
    assert abs(up.multiplier) < 1 and abs(down.multiplier) < 1
    with pytest.raises(OutOfRange):
        C.build_tan(0.5)


@pytest.mark.parametrize("eid", C.ENTRY_IDS)
def test_entries_evaluate_at_probe_points(eid):
    entry = resolve_entry(eid, {})
    rng = np.random.default_rng(11)
    probes = rng.uniform(-3, 3, 64) + 1j * rng.uniform(0.5, 2, 64) * rng.choice([-1, 1], 64)
    for z in probes:
        v = entry.f(z)
        assert cmath.isfinite(v)
    for r in entry.fixed_points:
        assert r.residual <= 1e-9 * (1 + abs(r.location))


def test_unknown_entry():
    with pytest.raises(KeyError):
        C.build_entry("ex9")
