"""Pixel-by-pixel basin classification and PPM output."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import CatalogEntry, build_entry
from .dynamics import MAXITER, OVERFLOW, OrbitFate, iterate_many

UNRESOLVED_RGB = (128, 128, 128)

PRESETS = {
    "fig2": dict(entry="ex1", params={"b": -1.0}, viewport=(-100.0, 300.0, -100.0, 100.0), width=400, height=200),
    "fig3": dict(entry="ex2-super", params={"b": -1.0}, viewport=(-100.0, 300.0, -100.0, 100.0), width=400, height=200),
    "fig4": dict(entry="ex4", params={}, viewport=(-5.0, 5.0, -2.0, 2.0), width=500, height=200),
    "fig5": dict(entry="ex5", params={}, viewport=(-5.0, 5.0, -2.0, 2.0), width=500, height=200),
}


@dataclass(frozen=True)
class RenderJob:
    entry: str
    params: dict = field(default_factory=dict)
    viewport: tuple[float, float, float, float] = (-5.0, 5.0, -2.0, 2.0)
    width: int = 500
    height: int = 200
    max_iter: int = 5000
    palette: dict | None = None
    tile_size: int = 64

    def __post_init__(self):
        re_min, re_max, im_min, im_max = self.viewport
        if not (re_min < re_max and im_min < im_max):
            raise ValueError(f"degenerate viewport {self.viewport}")
        if self.width < 8 or self.height < 8:
            raise ValueError("width and height must be at least 8")
        if self.max_iter < 1 or self.tile_size < 1:
            raise ValueError("max_iter and tile_size must be positive")
        object.__setattr__(self, "viewport", tuple(float(v) for v in self.viewport))

    @classmethod
    def preset(cls, name: str, **overrides) -> "RenderJob":
        return cls(**{**PRESETS[name], **overrides})

    def echo(self) -> dict:
        d = asdict(self)
        d["viewport"] = list(self.viewport)
        return d


_entry_cache: dict = {}


def resolve_entry(entry_id: str, params: dict) -> CatalogEntry:
    """Build (once per process) the catalog entry for a job."""
    key = (entry_id, tuple(sorted(params.items())))
    if key not in _entry_cache:
        _entry_cache[key] = build_entry(entry_id, **params)
    return _entry_cache[key]


def pixel_grid(viewport, width: int, height: int) -> np.ndarray:
    """Pixel-centre coordinates; row 0 is the top (im_max) edge.

    Centres are computed as weighted sums of the two edges, so a viewport
    symmetric about an axis yields exactly mirrored coordinates.
    """
    re_min, re_max, im_min, im_max = viewport
    c = np.arange(width)
    r = np.arange(height)
    x = (re_min * (2 * width - 2 * c - 1) + re_max * (2 * c + 1)) / (2 * width)
    y = (im_max * (2 * height - 2 * r - 1) + im_min * (2 * r + 1)) / (2 * height)
    return x[None, :] + 1j * y[:, None]


def tiles(width: int, height: int, size: int):
    return [(r0, min(r0 + size, height), c0, min(c0 + size, width))
            for r0 in range(0, height, size) for c0 in range(0, width, size)]


@dataclass
class BasinImage:
    width: int
    height: int
    labels: np.ndarray
    steps: np.ndarray
    metadata: dict

    def fate(self, row: int, col: int) -> OrbitFate:
        return OrbitFate(int(self.labels[row, col]), int(self.steps[row, col]))

    @property
    def viewport(self):
        return tuple(self.metadata["viewport"])

    @property
    def pixel_size(self) -> tuple[float, float]:
        re_min, re_max, im_min, im_max = self.viewport
        return (re_max - re_min) / self.width, (im_max - im_min) / self.height

    def centers(self) -> np.ndarray:
        return pixel_grid(self.viewport, self.width, self.height)

    def unresolved_fraction(self) -> float:
        return float(np.mean(self.labels < 0))


def default_palette(entry: CatalogEntry) -> dict:
    pal = {str(k): list(v) for k, v in entry.palette.items()}
    pal.setdefault("unresolved", list(UNRESOLVED_RGB))
    return pal


def _jsonable(v):
    if isinstance(v, complex):
        return v.real if v.imag == 0 else [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render(job: RenderJob, workers: int | None = None, entry: CatalogEntry | None = None) -> BasinImage:
    """Classify every pixel centre of ``job`` by its orbit fate.

    Tiles are independent and write disjoint slices of preallocated grids,
    so the result does not depend on ``tile_size`` or ``workers``.
    """
    if workers is None:
        workers = int(os.environ.get("BASINS_WORKERS", "1"))
    entry = entry or resolve_entry(job.entry, job.params)
    f, traps = entry.f, entry.traps
    z = pixel_grid(job.viewport, job.width, job.height)
    labels = np.empty((job.height, job.width), dtype=np.int64)
    steps = np.empty((job.height, job.width), dtype=np.int64)
    f.compiled  # compile once before spawning workers

    def run(tile):
        r0, r1, c0, c1 = tile
        lab, st = iterate_many(f, z[r0:r1, c0:c1], traps, job.max_iter)
        labels[r0:r1, c0:c1] = lab
        steps[r0:r1, c0:c1] = st

    todo = tiles(job.width, job.height, job.tile_size)
    if workers <= 1:
        for t in todo:
            run(t)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, todo))

    meta = job.echo()
    meta["palette"] = job.palette or default_palette(entry)
    meta["params"] = _jsonable(job.params)
    meta["constants"] = _jsonable(entry.constants)
    meta["basin_names"] = {str(k): v for k, v in entry.basin_names.items()}
    meta["library_version"] = __version__
    return BasinImage(job.width, job.height, labels, steps, meta)


def to_rgb(img: BasinImage, palette: dict | None = None) -> np.ndarray:
    palette = palette or img.metadata["palette"]
    rgb = np.empty((img.height, img.width, 3), dtype=np.uint8)
    rgb[:] = palette.get("unresolved", UNRESOLVED_RGB)
    for key, color in palette.items():
        if key != "unresolved":
            rgb[img.labels == int(key)] = color
    return rgb


def ppm_bytes(img: BasinImage, palette: dict | None = None) -> bytes:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + to_rgb(img, palette).tobytes()


def write_image(img: BasinImage, path) -> None:
    """Write ``path`` (binary PPM) and ``path + '.meta.json'``."""
    path = Path(path)
    meta = json.dumps(img.metadata, sort_keys=True, indent=2) + "\n"
    try:
        path.write_bytes(ppm_bytes(img))
        Path(str(path) + ".meta.json").write_text(meta, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_meta(path) -> dict:
    return json.loads(Path(str(path) + ".meta.json").read_text(encoding="utf-8"))


def job_from_meta(meta: dict) -> RenderJob:
    return RenderJob(
        entry=meta["entry"],
        params=dict(meta["params"]),
        viewport=tuple(meta["viewport"]),
        width=meta["width"],
        height=meta["height"],
        max_iter=meta["max_iter"],
        palette=meta.get("palette"),
        tile_size=meta["tile_size"],
    )


def read_image(path) -> BasinImage:
    """Load a PPM written by ``write_image``; labels are recovered from the palette.

    Per-pixel step counts are not stored in the PPM and come back as -1.
    """
    path = Path(path)
    meta = read_meta(path)
    data = path.read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError(f"{path}: not a binary PPM")
    w, h = map(int, parts[1].split())
    rgb = np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)
    labels = np.full((h, w), MAXITER, dtype=np.int64)
    for key, color in meta["palette"].items():
        if key == "unresolved":
            continue
        labels[np.all(rgb == np.array(color, dtype=np.uint8), axis=2)] = int(key)
    return BasinImage(w, h, labels, np.full((h, w), -1, dtype=np.int64), meta)


__all__ = [
    "BasinImage",
    "OVERFLOW",
    "PRESETS",
    "RenderJob",
    "pixel_grid",
    "ppm_bytes",
    "read_image",
    "read_meta",
    "render",
    "write_image",
]
