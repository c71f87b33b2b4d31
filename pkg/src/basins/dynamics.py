"""Orbits, traps, fixed points and multipliers."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Mapping, Sequence

import numba
import numpy as np
from scipy import optimize

from . import expr as E
from .compiled import compile_value
from .errors import (
    DegenerateBeyondOrder3,
    DerivativeSingular,
    NoConvergence,
    NoSignChange,
    PoleOrOverflow,
    TooManyIterations,
    TrapError,
)

MAXITER = -1
OVERFLOW = -2
MEMBERSHIP_RTOL = 1e-12
DEFAULT_PETAL_RADIUS = 0.3
DEFAULT_DISK_RADIUS = 0.3
MIN_TRAP_RADIUS = 1e-6


class MeroMap:
    """An expression tree bound to parameter values: the map being iterated."""

    def __init__(self, ast, params: Mapping[str, complex] | None = None, source: str | None = None):
        if isinstance(ast, str):
            source, ast = ast, E.parse(ast)
        self.ast = ast
        self.params = {k: complex(v) for k, v in (params or {}).items()}
        self.source = source or E.format(ast)

    def __call__(self, z) -> complex:
        return E.evaluate(self.ast, z, self.params)

    def jet(self, z, order: int = 3) -> E.Jet3:
        return E.eval_jet(self.ast, z, self.params, order)

    @cached_property
    def compiled(self):
        return compile_value(self.ast, self.params)

    def scaled(self, factor: complex) -> "MeroMap":
        return MeroMap(E.Mul(E.Param("_scale"), self.ast), {**self.params, "_scale": factor})

    def __repr__(self):
        return f"MeroMap({self.source!r}, params={self.params})"


# ---------------------------------------------------------------------------
# Multipliers and fixed points


class FixedPointClass(str, Enum):
    SUPERATTRACTING = "superattracting"
    ATTRACTING = "attracting"
    PARABOLIC = "parabolic"
    REPELLING = "repelling"
    INDIFFERENT_OTHER = "indifferent-other"


def classify_multiplier(lam: complex) -> FixedPointClass:
    r = abs(lam)
    if r < 1e-6:
        return FixedPointClass.SUPERATTRACTING
    if r < 1 - 1e-9:
        return FixedPointClass.ATTRACTING
    if abs(lam - 1) < 1e-6:
        return FixedPointClass.PARABOLIC
    if r > 1 + 1e-9:
        return FixedPointClass.REPELLING
    return FixedPointClass.INDIFFERENT_OTHER


@dataclass(frozen=True)
class FixedPointRecord:
    location: complex
    multiplier: complex
    cls: FixedPointClass
    residual: float

    def as_dict(self):
        return {
            "location": [self.location.real, self.location.imag],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "abs_multiplier": abs(self.multiplier),
            "class": self.cls.value,
            "residual": self.residual,
        }


def fixed_point_record(f: MeroMap, z: complex) -> FixedPointRecord:
    j = f.jet(z, 1)
    return FixedPointRecord(complex(z), j.d1, classify_multiplier(j.d1), abs(j.d0 - z))


def find_fixed_point(f: MeroMap, guess: complex, tol: float = 1e-12, max_steps: int = 200) -> FixedPointRecord:
    """Damped Newton iteration on f(z) - z starting from ``guess``."""
    z = complex(guess)
    j = f.jet(z, 1)
    F, dF = j.d0 - z, j.d1 - 1
    for _ in range(max_steps):
        if abs(F) <= tol:
            return FixedPointRecord(z, j.d1, classify_multiplier(j.d1), abs(F))
        if abs(dF) < 1e-14:
            raise DerivativeSingular(f"|f'(z) - 1| < 1e-14 at z={z}")
        step = -F / dF
        for _ in range(60):
            cand = z + step
            try:
                jc = f.jet(cand, 1)
            except PoleOrOverflow:
                step /= 2
                continue
            Fc = jc.d0 - cand
            if abs(Fc) <= abs(F) or abs(step) < 1e-15 * (1 + abs(z)):
                break
            step /= 2
        else:
            raise NoConvergence(f"damped Newton stalled at z={z}")
        z, j, F, dF = cand, jc, Fc, jc.d1 - 1
        if abs(z) > 1e6:
            raise NoConvergence(f"Newton iterate left |z| <= 1e6 (z={z})")
    if abs(F) <= tol:
        return FixedPointRecord(z, j.d1, classify_multiplier(j.d1), abs(F))
    raise NoConvergence(f"no convergence after {max_steps} steps (residual {abs(F):.3g})")


def petal_data(f: MeroMap, vertex: complex, threshold: float = 1e-8):
    """Number of attracting petals and their unit directions at a multiplier-1 point.

    Writes f(v + w) = v + w + c_k w^k + ... and picks the first k >= 2 with
    |c_k| > threshold; the attracting directions solve c_k w^(k-1) < 0.
    """
    j = f.jet(vertex, 3)
    if abs(j.d1 - 1) > 1e-6:
        raise ValueError(f"multiplier {j.d1} at {vertex} is not 1")
    coeffs = {2: j.d2 / 2, 3: j.d3 / 6}
    for k in (2, 3):
        c = coeffs[k]
        if abs(c) > threshold:
            p = k - 1
            # w^p = -|c|/c, unit modulus
            target = -abs(c) / c
            base = cmath.phase(target) / p
            dirs = [cmath.exp(1j * (base + 2 * math.pi * m / p)) for m in range(p)]
            dirs = [_clean(d) for d in dirs]
            return p, sorted(dirs, key=lambda d: cmath.phase(d))
    raise DegenerateBeyondOrder3(f"c_2 and c_3 vanish at {vertex}")


def _clean(d: complex) -> complex:
    re_ = 0.0 if abs(d.real) < 1e-15 else d.real
    im = 0.0 if abs(d.imag) < 1e-15 else d.imag
    return complex(re_, im) / abs(complex(re_, im))


# ---------------------------------------------------------------------------
# Traps


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float
    basin: int

    def boundary_samples(self, n: int = 400) -> np.ndarray:
        t = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * t)


@dataclass(frozen=True)
class PetalSector:
    vertex: complex
    direction: complex
    half_angle: float
    radius: float
    basin: int

    def boundary_samples(self, n: int = 400) -> np.ndarray:
        """Arc then both rays; the vertex itself is excluded (it is not in the trap)."""
        n_arc = n // 2
        n_ray = (n - n_arc) // 2
        n_ray2 = n - n_arc - n_ray
        th = np.linspace(-self.half_angle, self.half_angle, n_arc)
        arc = self.radius * np.exp(1j * th)
        r1 = self.radius * np.arange(1, n_ray + 1) / n_ray * np.exp(1j * self.half_angle)
        r2 = self.radius * np.arange(1, n_ray2 + 1) / n_ray2 * np.exp(-1j * self.half_angle)
        return self.vertex + self.direction * np.concatenate([arc, r1, r2])


@numba.njit(nogil=True)
def _trap_index(z, kind, center, radius, direction, cos_half):
    for k in range(kind.shape[0]):
        w = z - center[k]
        r = abs(w)
        if not r <= radius[k] * (1.0 + 1e-12):
            continue
        if kind[k] == 0:
            return k
        if r == 0.0:
            continue
        proj = (w * direction[k].conjugate()).real
        if proj >= r * (cos_half[k] - 1e-12):
            return k
    return -1


@numba.njit(nogil=True)
def _orbit(f, z0, kind, center, radius, direction, cos_half, basin, max_iter):
    z = z0
    for n in range(max_iter + 1):
        k = _trap_index(z, kind, center, radius, direction, cos_half)
        if k >= 0:
            return basin[k], n
        if n == max_iter:
            break
        z, ok = f(z)
        if not ok:
            return -2, n + 1
    return -1, max_iter


@numba.njit(nogil=True)
def _orbit_many(f, zs, kind, center, radius, direction, cos_half, basin, max_iter, labels, steps):
    for i in range(zs.shape[0]):
        labels[i], steps[i] = _orbit(f, zs[i], kind, center, radius, direction, cos_half, basin, max_iter)


class TrapSet:
    """Disjoint absorbing regions, one or more per basin index."""

    def __init__(self, traps: Sequence[Disk | PetalSector]):
        self.traps = tuple(traps)
        n = len(self.traps)
        self.kind = np.array([0 if isinstance(t, Disk) else 1 for t in self.traps], dtype=np.int64)
        self.center = np.array([t.center if isinstance(t, Disk) else t.vertex for t in self.traps], dtype=np.complex128)
        self.radius = np.array([t.radius for t in self.traps], dtype=np.float64)
        self.direction = np.array([getattr(t, "direction", 1.0) for t in self.traps], dtype=np.complex128)
        self.cos_half = np.array([math.cos(getattr(t, "half_angle", 0.0)) for t in self.traps], dtype=np.float64)
        self.basin = np.array([t.basin for t in self.traps], dtype=np.int64)
        if n == 0:
            raise TrapError("empty trap set")
        for i in range(n):
            for j in range(i + 1, n):
                if _overlap(self.traps[i], self.traps[j]):
                    raise TrapError(f"traps {i} and {j} overlap")

    @property
    def arrays(self):
        return self.kind, self.center, self.radius, self.direction, self.cos_half

    @property
    def basins(self) -> list[int]:
        return sorted(set(int(b) for b in self.basin))

    def index(self, z) -> int:
        """Index of the trap containing ``z`` (closed, up to 1e-12 relative), or -1."""
        return int(_trap_index(complex(z), *self.arrays))

    def certify(self, f: MeroMap, n: int = 400) -> None:
        """Raise TrapError unless every trap's boundary samples map into its closure."""
        for k, trap in enumerate(self.traps):
            bad = certificate_failures(f, trap, n)
            if bad:
                raise TrapError(f"trap {k} ({trap}) is not forward invariant: {bad}/{n} samples escape")

    def __iter__(self):
        return iter(self.traps)

    def __len__(self):
        return len(self.traps)

    def __repr__(self):
        return f"TrapSet({list(self.traps)!r})"


def _overlap(a, b) -> bool:
    if isinstance(a, PetalSector) and isinstance(b, PetalSector) and a.vertex == b.vertex:
        gap = abs(cmath.phase(a.direction / b.direction))
        return gap <= a.half_angle + b.half_angle
    ca = a.center if isinstance(a, Disk) else a.vertex
    cb = b.center if isinstance(b, Disk) else b.vertex
    return abs(ca - cb) <= a.radius + b.radius


def certificate_failures(f: MeroMap, trap, n: int = 400) -> int:
    single = TrapSet([trap])
    fn = f.compiled
    bad = 0
    for z in trap.boundary_samples(n):
        w, ok = fn(complex(z))
        if not ok or single.index(w) != 0:
            bad += 1
    return bad


def _shrink_until_certified(f, make, radius):
    while radius >= MIN_TRAP_RADIUS:
        trap = make(radius)
        if certificate_failures(f, trap) == 0:
            return trap
        radius /= 2
    raise TrapError(f"no forward-invariant trap found down to radius {MIN_TRAP_RADIUS}")


def disk_trap(f: MeroMap, center: complex, basin: int, radius: float = DEFAULT_DISK_RADIUS) -> Disk:
    """Disk around an attracting point, halved until forward invariant."""
    return _shrink_until_certified(f, lambda r: Disk(complex(center), r, basin), radius)


def petal_traps(f: MeroMap, vertex: complex, basins: Sequence[int], radius: float = DEFAULT_PETAL_RADIUS):
    """One certified sector per attracting direction at a parabolic point.

    Sectors are ordered by direction angle, matching ``basins``.  The
    half-angle is pi/(4p) for p petals: at pi/(2p) the arc corners of the
    local model w -> w + c w^(p+1) are not mapped inside for any radius.
    """
    p, dirs = petal_data(f, vertex)
    if len(basins) != p:
        raise ValueError(f"{p} petals at {vertex} but {len(basins)} basin indices given")
    half = math.pi / (4 * p)
    return [
        _shrink_until_certified(f, lambda r, d=d, b=b: PetalSector(complex(vertex), d, half, r, b), radius)
        for d, b in zip(dirs, basins)
    ]


# ---------------------------------------------------------------------------
# Orbits


@dataclass(frozen=True)
class OrbitFate:
    label: int
    steps: int

    @property
    def basin(self) -> int | None:
        return self.label if self.label >= 0 else None

    @property
    def resolved(self) -> bool:
        return self.label >= 0

    def __str__(self):
        if self.label >= 0:
            return f"Basin({self.label})@{self.steps}"
        return ("Unresolved(MaxIter)" if self.label == MAXITER else "Unresolved(Overflow)") + f"@{self.steps}"


def iterate(f: MeroMap, z0: complex, traps: TrapSet, max_iter: int = 5000) -> OrbitFate:
    """Iterate ``f`` from ``z0`` until the orbit enters a trap.

    Step 0 is ``z0`` itself.  Evaluation failures (poles, overflow) end the
    orbit as Unresolved(Overflow) rather than raising.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    label, steps = _orbit(f.compiled, complex(z0), *traps.arrays, traps.basin, max_iter)
    return OrbitFate(int(label), int(steps))


def iterate_many(f: MeroMap, zs, traps: TrapSet, max_iter: int = 5000, out=None):
    """Vectorised ``iterate``; returns (labels, steps) int arrays shaped like ``zs``."""
    zs = np.ascontiguousarray(zs, dtype=np.complex128)
    flat = zs.reshape(-1)
    if out is None:
        labels = np.empty(flat.shape, dtype=np.int64)
        steps = np.empty(flat.shape, dtype=np.int64)
    else:
        labels, steps = out
    _orbit_many(f.compiled, flat, *traps.arrays, traps.basin, max_iter, labels, steps)
    return labels.reshape(zs.shape), steps.reshape(zs.shape)


def orbit(f: MeroMap, z0: complex, n: int) -> np.ndarray:
    """First ``n + 1`` orbit points (NaN after an evaluation failure)."""
    fn = f.compiled
    out = np.full(n + 1, np.nan + 0j)
    z = complex(z0)
    out[0] = z
    for k in range(1, n + 1):
        z, ok = fn(z)
        if not ok:
            break
        out[k] = z
    return out


# ---------------------------------------------------------------------------
# Real roots


def find_real_root(h, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Bracketed root of a real function by Brent's method."""
    flo, fhi = h(lo), h(hi)
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if not (flo * fhi < 0):
        raise NoSignChange(f"h({lo})={flo:.3g} and h({hi})={fhi:.3g} have the same sign")
    try:
        root = optimize.brentq(h, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
    except RuntimeError as exc:
        raise TooManyIterations(str(exc)) from None
    return float(root)
