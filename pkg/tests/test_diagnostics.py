import numpy as np
import pytest

from basins.catalog import CatalogEntry
from basins.diagnostics import (
    chordal,
    containment_check,
    containment_violations,
    read_boundary,
    smallest_containment_T,
    trace_boundary,
    turning_constant,
    write_boundary,
)
from basins.dynamics import MeroMap, TrapSet, disk_trap, find_fixed_point, iterate_many
from basins.errors import NoInterface, TooFewPoints
from basins.render import RenderJob, render
from conftest import preset_image, traced


@pytest.fixture(scope="module")
def vertical_split():
    """1 + 2 tanh(z - 1): conjugate to 2 tan w, so J is exactly the line Re z = 1."""
    f = MeroMap("1 + 2*tanh(z - 1)")
    right, left = find_fixed_point(f, 3.0), find_fixed_point(f, -1.0)
    traps = TrapSet([disk_trap(f, left.location, 0), disk_trap(f, right.location, 1)])
    entry = CatalogEntry("split", f, [left, right], traps, [], {0: "left", 1: "right"})
    img = render(RenderJob("split", {}, (-1.3, 3.1, -2.0, 2.0), 44, 40), entry=entry)
    return entry, img


def test_synthetic_line_split(vertical_split):
    entry, img = vertical_split
    tol = 1e-6
    curve = trace_boundary(img, tol, entry=entry)
    pts = curve.all_points
    assert len(pts) == img.height
    assert np.max(np.abs(pts.real - 1.0)) <= tol
    assert curve.n_coarse == 0 and curve.ambiguous_cells == 0
    assert len(curve.chains) == 1


def test_chain_adjacency(vertical_split, fig2_curve):
    for curve in (trace_boundary(vertical_split[1], 1e-4, entry=vertical_split[0]), fig2_curve):
        for chain in curve.chains:
            assert np.all(np.abs(np.diff(chain)) <= 2 * curve.pixel_size)


def test_straight_line_turning_constant():
    line = np.linspace(-40, 40, 300) * np.exp(0.3j) + (1 + 2j)
    for metric in ("euclidean", "chordal"):
        rep = turning_constant(line, 30.0, metric)
        assert 1.0 <= rep.constant <= 1 + 1e-6


def test_turning_constant_detects_hairpin():
    # a narrow U: the two legs are close but the arc joining them is long
    t = np.linspace(0, 1, 400)
    leg = 20 * t
    hairpin = np.concatenate([leg[::-1] + 0.5j, -0.5j + leg])
    rep = turning_constant(hairpin, 25.0)
    assert rep.constant > 15


def test_turning_constant_needs_points():
    with pytest.raises(TooFewPoints):
        turning_constant(np.linspace(0, 1, 20) + 0j, 10.0)


def test_chordal_metric():
    assert chordal(0, np.inf) == pytest.approx(2.0)
    assert chordal(1, -1) == pytest.approx(2.0)
    assert chordal(1j, 1j) == 0
    assert chordal(np.inf, np.inf) == 0
    z, w = 3 + 4j, -1 + 0.5j
    assert chordal(z, w) == pytest.approx(chordal(1 / z, 1 / w))  # inversion is an isometry


def test_containment_examples():
    pts = np.array([0j, 1 + 3j, -3 + 0j])
    # with T=1 the domain is 4 Re z > (Im z)^2 - 4
    assert containment_violations(pts, 1.0) == 2  # 1+3i: 4 < 5; -3: -12 < -4
    assert containment_check(pts, 2.0) == (True, 0)
    assert smallest_containment_T(pts) == 2.0


def test_fig2_containment(fig2_curve):
    assert containment_check(fig2_curve, 20.0)[0]
    T = smallest_containment_T(fig2_curve)
    assert T is not None and T <= 40


def test_reversal_and_relabel_invariance(fig2_curve):
    base = turning_constant(fig2_curve, 100.0)
    for other in (fig2_curve.reversed(), fig2_curve.swapped(), fig2_curve.reversed().swapped()):
        rep = turning_constant(other, 100.0)
        assert rep.constant == pytest.approx(base.constant, rel=1e-12)
    line = trace_boundary(preset_image("fig4"), 1e-3)
    for metric in ("euclidean", "chordal"):
        a = turning_constant(line, 4.0, metric).constant
        b = turning_constant(line.reversed().swapped(), 4.0, metric).constant
        assert a == pytest.approx(b, rel=1e-12)


def test_witness_invariant_fig4():
    img = preset_image("fig4")
    curve = traced("fig4", img, 1e-3)
    _check_witnesses(curve, img)


def test_witness_invariant_fig2(fig2, fig2_curve):
    _check_witnesses(fig2_curve, fig2)


def _check_witnesses(curve, img):
    from basins.render import resolve_entry

    entry = resolve_entry(img.metadata["entry"], img.metadata["params"])
    budget = curve.metadata["witness_max_iter"]
    i, j = curve.basin_pair
    for (zi, zj), pts, coarse in zip(curve.witnesses, curve.chains, curve.coarse):
        li, _ = iterate_many(entry.f, zi, entry.traps, budget)
        lj, _ = iterate_many(entry.f, zj, entry.traps, budget)
        assert np.all(li == i) and np.all(lj == j)
        width = np.abs(zi - zj)
        assert np.all(width[~coarse] <= curve.refinement_tol)
        # stalled crossings still bracket the curve to within a pixel
        assert np.all(width <= curve.pixel_size * np.sqrt(2))
        assert np.allclose(pts, (zi + zj) / 2)


def test_refinement_convergence():
    img = preset_image("fig4")
    tol = 1e-2
    coarse = trace_boundary(img, tol)
    fine = trace_boundary(img, tol / 2)
    assert [len(c) for c in coarse.chains] == [len(c) for c in fine.chains]
    for a, b in zip(coarse.chains, fine.chains):
        assert np.all(np.abs(a - b) <= tol)


def test_tol_must_be_below_pixel_size():
    with pytest.raises(ValueError):
        trace_boundary(preset_image("fig4"), 0.5)


def test_no_interface(ex2s):
    xi = 1 + np.pi**2
    img = render(RenderJob("ex2-super", {"b": -1.0}, (xi - 0.1, xi + 0.1, -0.1, 0.1), 8, 8), entry=ex2s)
    with pytest.raises(NoInterface):
        trace_boundary(img, 1e-4, entry=ex2s)


def test_boundary_file_round_trip(tmp_path):
    curve = traced("fig4", preset_image("fig4"), 1e-3)
    path = tmp_path / "b.txt"
    write_boundary(curve, path)
    assert np.array_equal(read_boundary(path), curve.all_points)
    text = path.read_text(encoding="utf-8")
    assert text.startswith("# basin_pair 0 1\n")
    assert "np.float64" not in text
