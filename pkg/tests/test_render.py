import hashlib
import json

import numpy as np
import pytest

from basins.dynamics import iterate
from basins.render import (
    PRESETS,
    RenderJob,
    job_from_meta,
    pixel_grid,
    ppm_bytes,
    read_image,
    read_meta,
    render,
    write_image,
)
from conftest import job_image, preset_image


def sha(img):
    return hashlib.sha256(ppm_bytes(img)).hexdigest()


def test_pixel_grid_orientation():
    z = pixel_grid((-1.0, 3.0, -2.0, 2.0), 4, 8)
    assert z.shape == (8, 4)
    assert z[0, 0] == complex(-0.5, 1.75)  # top-left, half-pixel offsets
    assert z[-1, -1] == complex(2.5, -1.75)
    assert np.all(np.diff(z.real, axis=1) > 0) and np.all(np.diff(z.imag, axis=0) < 0)


def test_symmetric_viewport_gives_mirrored_centres():
    z = pixel_grid((-5.0, 5.0, -2.0, 2.0), 500, 200)
    assert np.array_equal(z, -z[::-1, ::-1])
    z = pixel_grid((-100.0, 300.0, -100.0, 100.0), 400, 200)
    assert np.array_equal(z, z[::-1, :].conj())


@pytest.mark.parametrize(
    "kw",
    [
        dict(viewport=(1.0, 1.0, -1.0, 1.0)),
        dict(viewport=(0.0, 1.0, 2.0, 1.0)),
        dict(width=7),
        dict(height=4),
        dict(max_iter=0),
        dict(tile_size=0),
    ],
)
def test_job_validation(kw):
    with pytest.raises(ValueError):
        RenderJob("ex4", **kw)


def test_all_pixels_inside_one_trap(ex2s):
    xi = 1 + np.pi**2
    job = RenderJob("ex2-super", {"b": -1.0}, (xi - 0.1, xi + 0.1, -0.1, 0.1), 8, 8)
    img = render(job, entry=ex2s)
    assert np.all(img.labels == 1) and np.all(img.steps == 0)


def test_ppm_format_8x8(tmp_path, ex2s):
    xi = 1 + np.pi**2
    img = render(RenderJob("ex2-super", {"b": -1.0}, (xi - 0.1, xi + 0.1, -0.1, 0.1), 8, 8), entry=ex2s)
    data = ppm_bytes(img)
    header = b"P6\n8 8\n255\n"
    assert data.startswith(header) and len(data) == len(header) + 192
    assert set(data[len(header):]) == {0}  # basin 1 is black


def test_labels_match_iterate(ex5):
    job = RenderJob("ex5", {}, (-5.0, 5.0, -2.0, 2.0), 20, 10, max_iter=2000)
    img = render(job, entry=ex5)
    assert img.labels.shape == (10, 20) and img.steps.shape == (10, 20)
    for r in range(10):
        for c in range(20):
            fate = iterate(ex5.f, img.centers()[r, c], ex5.traps, 2000)
            assert (fate.label, fate.steps) == (img.labels[r, c], img.steps[r, c])
            assert img.fate(r, c) == fate


def test_example5_pixels():
    img = preset_image("fig5")
    z = img.centers()

    def label_at(w):
        r, c = np.unravel_index(np.argmin(np.abs(z - w)), z.shape)
        return img.labels[r, c]

    assert label_at(1j) == 0  # parabolic basin of i
    assert label_at(-1.5j) == 1  # attracted to -3.1864i


def test_fig2_real_axis_split(fig2):
    z = fig2.centers()
    for r in (99, 100):  # the two rows adjacent to Im z = 0
        row = fig2.labels[r]
        re = z[r].real
        wrong = np.sum((re < 0) & (row != 0)) + np.sum((re > 0) & (row != 1))
        assert wrong <= 2


def test_write_and_read_round_trip(tmp_path):
    img = preset_image("fig4")
    path = tmp_path / "fig4.ppm"
    write_image(img, path)
    meta = read_meta(path)
    for key in ("entry", "params", "viewport", "width", "height", "max_iter", "tile_size", "palette", "library_version"):
        assert key in meta
    assert job_from_meta(meta) == RenderJob.preset("fig4", palette=meta["palette"])
    back = read_image(path)
    assert np.array_equal(back.labels, img.labels)
    # identical images give identical files
    path2 = tmp_path / "again.ppm"
    write_image(img, path2)
    assert path.read_bytes() == path2.read_bytes()
    assert (tmp_path / "fig4.ppm.meta.json").read_bytes() == (tmp_path / "again.ppm.meta.json").read_bytes()
    assert json.loads((tmp_path / "fig4.ppm.meta.json").read_text(encoding="utf-8"))["entry"] == "ex4"


def test_write_error_has_path_context(tmp_path):
    img = preset_image("fig4")
    target = tmp_path / "missing" / "x.ppm"
    with pytest.raises(OSError, match="missing"):
        write_image(img, target)


def test_presets_match_captions():
    assert PRESETS["fig2"]["viewport"] == (-100.0, 300.0, -100.0, 100.0)
    assert PRESETS["fig4"]["viewport"] == (-5.0, 5.0, -2.0, 2.0)
    assert (PRESETS["fig2"]["width"], PRESETS["fig2"]["height"]) == (400, 200)
    assert (PRESETS["fig5"]["width"], PRESETS["fig5"]["height"]) == (500, 200)


def test_parabolic_basins_both_present_fig4():
    img = preset_image("fig4")
    assert set(np.unique(img.labels)) == {0, 1}
    assert img.unresolved_fraction() == 0


# ---------------------------------------------------------------------------
# property suites: determinism and mirror symmetry


SMALL_JOBS = [
    RenderJob("ex1", {"b": -1.0}, (-100.0, 300.0, -100.0, 100.0), 60, 30, max_iter=2000),
    RenderJob("ex4", {}, (-5.0, 5.0, -2.0, 2.0), 100, 40),
    RenderJob("ex5", {}, (-5.0, 5.0, -2.0, 2.0), 100, 40),
]


@pytest.mark.parametrize("job", SMALL_JOBS, ids=lambda j: j.entry)
def test_determinism_across_tiles_and_workers(job):
    ref = sha(job_image(job, workers=1))
    for tile in (16, 64, 256):
        for workers in (1, 4, 8):
            img = render(RenderJob(**{**job.__dict__, "tile_size": tile}), workers=workers)
            assert sha(img) == ref, (tile, workers)


MIRRORS = {
    # entry, params, viewport, (mirror of the label grid, basin permutation)
    "ex1": ({"b": -1.0}, (-100.0, 300.0, -100.0, 100.0), "conj", None),
    "ex2-super": ({"b": -1.0}, (-100.0, 300.0, -100.0, 100.0), "conj", None),
    "ex3": ({}, (-4.0, 4.0, -2.0, 2.0), "conj", {0: 1, 1: 0}),
    "ex4": ({}, (-5.0, 5.0, -2.0, 2.0), "neg", {0: 1, 1: 0}),
    "ex5": ({}, (-5.0, 5.0, -2.0, 2.0), "negconj", None),
    "tan": ({}, (-6.0, 6.0, -3.0, 3.0), "conj", {0: 1, 1: 0}),
}


@pytest.mark.parametrize("eid", list(MIRRORS))
def test_mirror_symmetry(eid):
    params, vp, kind, swap = MIRRORS[eid]
    img = job_image(RenderJob(eid, params, vp, 60, 30, max_iter=3000), workers=4)
    L = img.labels
    M = {"conj": L[::-1, :], "neg": L[::-1, ::-1], "negconj": L[:, ::-1]}[kind]
    if swap:
        M = np.vectorize(lambda v: swap.get(v, v))(M)
    assert np.array_equal(L, M)
