"""Julia boundary extraction and arc-chord geometry.

The Julia set is the common boundary of the two basins, so it is located
as the interface between two basin labels of a rendered image.  Each
interface crossing between two differently labelled pixel centres is
refined by bisection on the orbit fate.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import MAXITER, iterate_many
from .errors import NoInterface, TooFewPoints
from .render import BasinImage, resolve_entry


@dataclass
class BoundaryCurve:
    """Refined interface points between basins ``basin_pair``.

    ``chains`` are maximal runs of consecutive crossings (each ordered by the
    march); ``points`` is the longest chain.  ``witnesses[k]`` holds, for
    chain k, the points labelled basin_pair[0] and basin_pair[1] that
    bracket each curve point to within ``refinement_tol``.  Points flagged
    in ``coarse`` stalled at a split point that no escalated budget could
    resolve (orbits passing very close to a parabolic point); their
    witnesses are valid but bracket them only to the width reached.
    """

    chains: list[np.ndarray]
    witnesses: list[tuple[np.ndarray, np.ndarray]]
    basin_pair: tuple[int, int]
    refinement_tol: float
    pixel_size: float
    coarse: list[np.ndarray] = field(default_factory=list)
    ambiguous_cells: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def n_coarse(self) -> int:
        return int(sum(c.sum() for c in self.coarse))

    @property
    def points(self) -> np.ndarray:
        return max(self.chains, key=len) if self.chains else np.empty(0, complex)

    @property
    def all_points(self) -> np.ndarray:
        return np.concatenate(self.chains) if self.chains else np.empty(0, complex)

    def reversed(self) -> "BoundaryCurve":
        return BoundaryCurve(
            [c[::-1] for c in self.chains],
            [(a[::-1], b[::-1]) for a, b in self.witnesses],
            self.basin_pair,
            self.refinement_tol,
            self.pixel_size,
            [c[::-1] for c in self.coarse],
            self.ambiguous_cells,
            dict(self.metadata),
        )

    def swapped(self) -> "BoundaryCurve":
        """Same curve with the basin pair relabelled (j, i)."""
        return BoundaryCurve(
            list(self.chains),
            [(b, a) for a, b in self.witnesses],
            self.basin_pair[::-1],
            self.refinement_tol,
            self.pixel_size,
            list(self.coarse),
            self.ambiguous_cells,
            dict(self.metadata),
        )


def _dominant_pair(labels: np.ndarray) -> tuple[int, int]:
    counts = Counter(int(v) for v in labels.ravel() if v >= 0)
    if len(counts) < 2:
        raise NoInterface("image contains fewer than two basin labels")
    (i, _), (j, _) = counts.most_common(2)
    return tuple(sorted((i, j)))


def _interface_graph(labels, pair, center_label):
    """Crossing edges and their pairing inside 2x2 cells.

    Crossings are keyed ('h', r, c) for pixels (r, c)-(r, c+1) and
    ('v', r, c) for (r, c)-(r+1, c).  Returns (links, ambiguous) where
    links maps each crossing to its (at most two) neighbours.
    """
    H, W = labels.shape
    i, j = pair
    is_i, is_j = labels == i, labels == j
    h_cross = (is_i[:, :-1] & is_j[:, 1:]) | (is_j[:, :-1] & is_i[:, 1:])
    v_cross = (is_i[:-1, :] & is_j[1:, :]) | (is_j[:-1, :] & is_i[1:, :])
    links: dict = {}
    for r in range(H):
        for c in range(W - 1):
            if h_cross[r, c]:
                links[("h", r, c)] = []
    for r in range(H - 1):
        for c in range(W):
            if v_cross[r, c]:
                links[("v", r, c)] = []
    ambiguous = 0
    cells = set()
    for kind, r, c in links:
        if kind == "h":
            cells.update({(r - 1, c), (r, c)})
        else:
            cells.update({(r, c - 1), (r, c)})
    for r, c in sorted(cells):
        if not (0 <= r < H - 1 and 0 <= c < W - 1):
            continue
        top, bottom = ("h", r, c), ("h", r + 1, c)
        left, right = ("v", r, c), ("v", r, c + 1)
        present = [e for e in (top, right, bottom, left) if e in links]
        if not present:
            continue
        corners = labels[r : r + 2, c : c + 2]
        if not np.all(is_i[r : r + 2, c : c + 2] | is_j[r : r + 2, c : c + 2]):
            ambiguous += 1
            continue
        if len(present) == 2:
            pairs = [tuple(present)]
        else:
            # saddle: the centre sample decides which diagonal is connected
            lab = center_label(r, c)
            tl = corners[0, 0]
            if lab == tl:
                pairs = [(top, right), (bottom, left)]
            elif lab in pair:
                pairs = [(top, left), (right, bottom)]
            else:
                ambiguous += 1
                continue
        for a, b in pairs:
            links[a].append(b)
            links[b].append(a)
    return links, ambiguous


def _chains(links):
    seen = set()
    out = []

    def walk(start):
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [n for n in links[cur] if n != prev and n not in seen]
            if not nxt:
                return chain
            prev, cur = cur, nxt[0]
            seen.add(cur)
            chain.append(cur)

    for key in sorted(links):
        if key not in seen and len(links[key]) <= 1:
            out.append(walk(key))
    for key in sorted(links):
        if key not in seen:
            out.append(walk(key))
    return out


ESCALATION = (4, 16, 64)


def _escalate(f, traps, z, labels, max_iter):
    """Re-run unresolved entries of ``labels`` with larger iteration budgets."""
    labels = labels.copy()
    for factor in ESCALATION:
        todo = labels < 0
        if not todo.any():
            break
        labels[todo], _ = iterate_many(f, z[todo], traps, factor * max_iter)
    return labels


SPLITS = (0.5, 0.4, 0.6, 0.3, 0.7)


def refine_crossings(f, traps, zi, zj, pair, tol, max_iter):
    """Bisect each segment [zi, zj] (labelled pair[0], pair[1]) down to ``tol``.

    A split point that stays unresolved is replaced by an off-centre one
    (brackets remain nested); budgets escalate only once every split in
    ``SPLITS`` has failed, so midpoints landing exactly on J stay cheap.  A
    crossing that no split resolves at any budget stops refining.  Returns
    bracket midpoints, the final witnesses, and the mask of crossings
    refined down to ``tol``.
    """
    zi = np.array(zi, dtype=complex)
    zj = np.array(zj, dtype=complex)
    ok = np.ones(zi.shape, dtype=bool)
    while True:
        active = ok & (np.abs(zi - zj) > tol)
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        pending = np.ones(idx.shape, dtype=bool)
        for factor in (1,) + ESCALATION:
            for t in SPLITS:
                sub = idx[pending]
                mid = zi[sub] + t * (zj[sub] - zi[sub])
                lab, _ = iterate_many(f, mid, traps, factor * max_iter)
                to_i, to_j = lab == pair[0], lab == pair[1]
                zi[sub[to_i]] = mid[to_i]
                zj[sub[to_j]] = mid[to_j]
                pending[np.nonzero(pending)[0][to_i | to_j]] = False
                if not pending.any():
                    break
            if not pending.any():
                break
        ok[idx[pending]] = False
    return (zi + zj) / 2, zi, zj, ok


def trace_boundary(img: BasinImage, tol: float, pair=None, entry=None) -> BoundaryCurve:
    """March the label interface of ``img`` and refine each crossing to ``tol``."""
    dx, dy = img.pixel_size
    if tol >= min(dx, dy):
        raise ValueError(f"tol={tol} must be smaller than the pixel size {min(dx, dy)}")
    entry = entry or resolve_entry(img.metadata["entry"], img.metadata.get("params", {}))
    f, traps = entry.f, entry.traps
    max_iter = img.metadata["max_iter"]
    centers = img.centers()
    labels = _escalate(f, traps, centers, img.labels, max_iter)
    pair = tuple(pair) if pair is not None else _dominant_pair(labels)

    def center_label(r, c):
        z = np.array([centers[r : r + 2, c : c + 2].mean()])
        lab, _ = iterate_many(f, z, traps, max_iter)
        return int(_escalate(f, traps, z, lab, max_iter)[0])

    links, ambiguous = _interface_graph(labels, pair, center_label)
    if not links:
        raise NoInterface(f"no interface between basins {pair}")
    raw = _chains(links)

    def ends(key):
        kind, r, c = key
        p, q = (r, c), (r, c + 1) if kind == "h" else (r + 1, c)
        return (p, q) if labels[p] == pair[0] else (q, p)

    flat = [k for ch in raw for k in ch]
    ij = [ends(k) for k in flat]
    zi0 = np.array([centers[p] for p, _ in ij])
    zj0 = np.array([centers[q] for _, q in ij])
    pts, wi, wj, ok = refine_crossings(f, traps, zi0, zj0, pair, tol, max_iter)

    chains, witnesses, coarse = [], [], []
    pos = 0
    for ch in raw:
        sl = slice(pos, pos + len(ch))
        pos += len(ch)
        chains.append(pts[sl])
        witnesses.append((wi[sl], wj[sl]))
        coarse.append(~ok[sl])
    return BoundaryCurve(
        chains,
        witnesses,
        pair,
        tol,
        max(dx, dy),
        coarse=coarse,
        ambiguous_cells=ambiguous,
        metadata={
            "entry": img.metadata.get("entry"),
            "viewport": list(img.viewport),
            "max_iter": max_iter,
            # every witness label is final at this budget
            "witness_max_iter": ESCALATION[-1] * max_iter,
        },
    )


# ---------------------------------------------------------------------------
# Geometry


@dataclass(frozen=True)
class TurningReport:
    window_radius: float
    constant: float
    metric: str
    n_points: int
    pair_indices: tuple[int, int]


def chordal(z, w):
    """Chordal distance on the Riemann sphere; ``np.inf`` stands for infinity."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    zi, wi = np.isinf(z), np.isinf(w)
    with np.errstate(invalid="ignore"):
        d = 2 * np.abs(z - w) / np.sqrt((1 + np.abs(z) ** 2) * (1 + np.abs(w) ** 2))
    d = np.where(zi & ~wi, 2 / np.sqrt(1 + np.abs(w) ** 2), d)
    d = np.where(wi & ~zi, 2 / np.sqrt(1 + np.abs(z) ** 2), d)
    return np.where(zi & wi, 0.0, d)


def _window_arc(points: np.ndarray, R: float) -> np.ndarray:
    inside = np.abs(points) <= R
    best, start = (0, 0), None
    for k, v in enumerate(np.append(inside, False)):
        if v and start is None:
            start = k
        elif not v and start is not None:
            if k - start > best[1] - best[0]:
                best = (start, k)
            start = None
    return points[best[0] : best[1]]


def resample(points: np.ndarray, n: int) -> np.ndarray:
    """``n`` points equally spaced in arc length along the polyline."""
    seg = np.abs(np.diff(points))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    t = np.linspace(0.0, s[-1], n)
    return np.interp(t, s, points.real) + 1j * np.interp(t, s, points.imag)


def _arc_diameters(D: np.ndarray) -> np.ndarray:
    """A[i, j] = max D[a, b] over i <= a, b <= j (upper triangle)."""
    n = D.shape[0]
    A = np.zeros_like(D)
    prev = np.zeros(n)
    for L in range(1, n):
        i = np.arange(n - L)
        cur = np.maximum(np.maximum(prev[1 : n - L + 1], prev[: n - L]), D[i, i + L])
        A[i, i + L] = cur
        prev = cur
    return A


def turning_constant(curve, R: float, metric: str = "euclidean", n: int = 512, min_points: int = 50) -> TurningReport:
    """Arc-chord statistic of the in-window part of ``curve``.

    For sample pairs (z1, z2) the ratio is the smaller diameter of the two
    arcs of the closed curve J u {inf} between them, over their distance.
    In the euclidean metric the arc through infinity is unbounded, so this
    is the diameter of the arc between z1 and z2.
    """
    pts = curve.points if isinstance(curve, BoundaryCurve) else np.asarray(curve, dtype=complex)
    arc = _window_arc(pts, R)
    if len(arc) < min_points:
        raise TooFewPoints(f"{len(arc)} curve points inside |z| <= {R}, need {min_points}")
    p = resample(arc, n)
    if metric == "euclidean":
        D = np.abs(p[:, None] - p[None, :])
    elif metric == "chordal":
        D = chordal(p[:, None], p[None, :])
    else:
        raise ValueError(f"unknown metric {metric!r}")
    A = _arc_diameters(D)
    if metric == "chordal":
        to_inf = chordal(p, np.inf)
        prefix = A[0, :]  # diam of p[0..i]
        suffix = A[:, n - 1]  # diam of p[j..n-1]
        # cross[i, j] = max D[a, b], a <= i, b >= j
        cross = np.maximum.accumulate(np.maximum.accumulate(D, axis=0)[:, ::-1], axis=1)[:, ::-1]
        inf_pre = np.maximum.accumulate(to_inf)
        inf_suf = np.maximum.accumulate(to_inf[::-1])[::-1]
        other = np.maximum(np.maximum(prefix[:, None], suffix[None, :]), cross)
        other = np.maximum(other, np.maximum(inf_pre[:, None], inf_suf[None, :]))
        A = np.minimum(A, other)
    iu, ju = np.triu_indices(n, 1)
    d = D[iu, ju]
    keep = d > 0
    ratio = A[iu, ju][keep] / d[keep]
    k = int(np.argmax(ratio))
    return TurningReport(float(R), float(ratio[k]), metric, n, (int(iu[keep][k]), int(ju[keep][k])))


def containment_violations(points, T: float) -> int:
    """Points violating 4 T^2 Re z > (Im z)^2 - 4 T^4."""
    z = np.asarray(points, dtype=complex)
    return int(np.sum(~(4 * T**2 * z.real > z.imag**2 - 4 * T**4)))


def containment_check(curve, T: float) -> tuple[bool, int]:
    pts = curve.all_points if isinstance(curve, BoundaryCurve) else curve
    v = containment_violations(pts, T)
    return v == 0, v


def smallest_containment_T(curve, T0: float = 1.0, T_max: float = 2.0**20) -> float | None:
    """Smallest T in the doubling sequence T0, 2 T0, ... that passes, or None."""
    T = T0
    while T <= T_max:
        if containment_check(curve, T)[0]:
            return T
        T *= 2
    return None


def write_boundary(curve: BoundaryCurve, path, which: str = "all") -> None:
    """One 're im' pair per line; '#' header lines carry metadata."""
    pts = curve.all_points if which == "all" else curve.points
    lines = [
        f"# basin_pair {curve.basin_pair[0]} {curve.basin_pair[1]}",
        f"# refinement_tol {curve.refinement_tol!r}",
        f"# chains {len(curve.chains)}",
        f"# points {len(pts)}",
        f"# ambiguous_cells {curve.ambiguous_cells}",
        f"# coarse {curve.n_coarse}",
    ]
    for k, v in sorted(curve.metadata.items()):
        lines.append(f"# {k} {v}")
    lines += [f"{float(z.real)!r} {float(z.imag)!r}" for z in pts]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_boundary(path) -> np.ndarray:
    rows = [line.split() for line in Path(path).read_text(encoding="utf-8").splitlines()
            if line and not line.startswith("#")]
    return np.array([complex(float(a), float(b)) for a, b in rows])


__all__ = [
    "BoundaryCurve",
    "MAXITER",
    "TurningReport",
    "chordal",
    "containment_check",
    "smallest_containment_T",
    "trace_boundary",
    "turning_constant",
    "write_boundary",
]
