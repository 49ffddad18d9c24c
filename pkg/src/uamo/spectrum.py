"""Spectra of the finite realisations: eigensolver, Floquet band arcs,
measure estimates, distance queries and the butterfly raster.

Angles on the unit circle are measured in turns, ``z = exp(2 pi i a)``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .operators import OperatorSpec, floquet_matrices

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
DEFAULT_THETA = 64
DEFAULT_K = 64


def angle_of(z) -> np.ndarray:
    """Argument of ``z`` in turns, in ``[0, 1)``."""
    a = np.mod(np.angle(z) / (2 * np.pi), 1.0)
    return np.where(a >= 1.0, 0.0, a)


def wrap(d):
    """Signed circular difference in ``[-1/2, 1/2)``."""
    return np.mod(np.asarray(d) + 0.5, 1.0) - 0.5


# ---------------------------------------------------------------------------
# eigensolver
# ---------------------------------------------------------------------------


class EigenError(ArithmeticError):
    pass


def diagonalize(op: OperatorSpec | np.ndarray, vectors: bool = False):
    """Eigenvalues (and optionally orthonormal eigenvectors) of a unitary matrix.

    Uses the complex Schur form; for a normal matrix the triangular factor is
    diagonal and the Schur vectors are eigenvectors. Every pair is checked
    against ``||(U - z) v|| < 1e-8``.
    """
    U = op.matrix if isinstance(op, OperatorSpec) else np.asarray(op, complex)
    T, Z = scipy.linalg.schur(U, output="complex")
    vals = np.diag(T).copy()
    res = np.linalg.norm(U @ Z - Z * vals[None, :], axis=0)
    worst = float(res.max()) if len(res) else 0.0
    if worst > RESIDUAL_TOL:
        offdiag = float(np.linalg.norm(np.triu(T, 1)))
        raise EigenError(f"eigen-residual {worst:.3e} exceeds {RESIDUAL_TOL} (Schur off-diagonal mass {offdiag:.3e})")
    if vectors:
        return vals, Z
    return vals


# ---------------------------------------------------------------------------
# arc sets
# ---------------------------------------------------------------------------


def merge_intervals(iv, gap: float = 0.0) -> list[tuple[float, float]]:
    """Union of intervals on the circle given as ``(start, end)`` turns with ``start <= end``
    inside ``[0, 1]``; gaps up to ``gap`` (including across angle 0) are closed."""
    iv = sorted((float(s), float(e)) for s, e in iv if e >= s)
    out: list[list[float]] = []
    for s, e in iv:
        if out and s <= out[-1][1] + gap:
            out[-1][1] = max(out[-1][1], e)
        else:
            out.append([s, e])
    if len(out) > 1 and out[0][0] + (1.0 - out[-1][1]) <= gap:
        out[0][0] = 0.0
        out[-1][1] = 1.0
    if len(out) == 1 and out[0][0] <= gap and out[0][1] >= 1.0 - gap:
        out = [[0.0, 1.0]]
    return [(s, e) for s, e in out if e > s]


def split_arc(s: float, length: float) -> list[tuple[float, float]]:
    """Arc starting at angle ``s`` of the given length, split at angle 0 if needed."""
    if length >= 1.0:
        return [(0.0, 1.0)]
    s = s % 1.0
    e = s + length
    if e <= 1.0:
        return [(s, e)]
    return [(s, 1.0), (0.0, e - 1.0)]


@dataclass
class SpectrumEstimate:
    """Sorted disjoint arcs ``(start, end)`` in turns plus an angular resolution."""

    arcs: list
    resolution: float
    source: dict = field(default_factory=dict)
    coarse: bool = False

    def __post_init__(self):
        self.arcs = [(float(s), float(e)) for s, e in self.arcs]
        for (s, e), nxt in zip(self.arcs, self.arcs[1:] + [None]):
            if not 0.0 <= s < e <= 1.0:
                raise ValueError(f"bad arc {(s, e)}")
            if nxt is not None and nxt[0] <= e:
                raise ValueError("arcs must be sorted and disjoint")

    @property
    def measure(self) -> float:
        return float(sum(e - s for s, e in self.arcs))

    def contains(self, angle, tol: float = 0.0) -> np.ndarray:
        return distance_to_spectrum(self, np.exp(2j * np.pi * np.asarray(angle)), angle_input=False) <= tol

    def image(self, how: str) -> "SpectrumEstimate":
        """Image under ``z -> conj(z)`` (``"conj"``) or ``z -> -z`` (``"neg"``)."""
        pieces = []
        for s, e in self.arcs:
            if how == "conj":
                pieces += split_arc(1.0 - e, e - s)
            elif how == "neg":
                pieces += split_arc(s + 0.5, e - s)
            else:
                raise ValueError(how)
        return SpectrumEstimate(merge_intervals(pieces), self.resolution, dict(self.source), self.coarse)

    def to_json(self) -> dict:
        return {"arcs": [[s, e] for s, e in self.arcs], "resolution": self.resolution,
                "source": self.source, "coarse": self.coarse, "measure": self.measure}

    @classmethod
    def from_json(cls, d: dict) -> "SpectrumEstimate":
        return cls([tuple(a) for a in d["arcs"]], d["resolution"], d.get("source", {}), d.get("coarse", False))


def _arc_distance(arcs, a):
    """Angular distance (turns) from angles ``a`` to a union of arcs."""
    a = np.atleast_1d(np.asarray(a, float))
    if not arcs:
        raise ValueError("empty spectrum estimate")
    best = np.full(a.shape, np.inf)
    for s, e in arcs:
        inside = ((a >= s) & (a <= e)) | ((e >= 1.0) & (a == 0.0))
        d = np.minimum(np.abs(wrap(a - s)), np.abs(wrap(a - e)))
        best = np.minimum(best, np.where(inside, 0.0, d))
    return best


def distance_to_spectrum(est: SpectrumEstimate, z, angle_input: bool = False):
    """Angular distance in turns from ``z`` (or an angle) to the nearest arc; 0 inside."""
    a = np.asarray(z, float) if angle_input else angle_of(np.asarray(z, complex))
    d = _arc_distance(est.arcs, a)
    return float(d[0]) if np.ndim(z) == 0 else d


def set_distance(a: SpectrumEstimate, b: SpectrumEstimate) -> float:
    """Directed distance ``sup_{x in a} dist(x, b)``.

    The distance to a union of arcs is piecewise linear, so the supremum is
    attained at an endpoint of ``a`` or at the midpoint of a gap of ``b``.
    """
    pts = [p for arc in a.arcs for p in arc]
    gaps = _gaps(b.arcs)
    for gs, ge in gaps:
        mid = (gs + (ge - gs) / 2.0) % 1.0
        if _arc_distance(a.arcs, mid)[0] == 0.0:
            pts.append(mid)
    if not pts:
        return 0.0
    return float(np.max(_arc_distance(b.arcs, np.array(pts))))


def _gaps(arcs):
    if not arcs:
        return [(0.0, 1.0)]
    if len(arcs) == 1 and arcs[0] == (0.0, 1.0):
        return []
    out = [(arcs[i][1], arcs[i + 1][0]) for i in range(len(arcs) - 1)]
    last, first = arcs[-1][1], arcs[0][0] + 1.0
    if first - last > 0:
        out.append((last, first))
    return out


def symmetry_defects(est: SpectrumEstimate) -> dict:
    """Two-sided set distances between ``est`` and its conjugate / negated images."""
    out = {}
    for how in ("conj", "neg"):
        img = est.image(how)
        out[how] = max(set_distance(img, est), set_distance(est, img))
    return out


def is_symmetric(est: SpectrumEstimate, slack: float = 1e-12) -> bool:
    d = symmetry_defects(est)
    return all(v <= est.resolution + slack for v in d.values())


def measure_estimate(est: SpectrumEstimate) -> tuple[float, float]:
    """Total arc length and uncertainty ``(number of arcs) * resolution``."""
    if est.arcs == [(0.0, 1.0)]:
        return 1.0, 0.0
    return est.measure, len(est.arcs) * est.resolution


# ---------------------------------------------------------------------------
# Floquet sweeps
# ---------------------------------------------------------------------------


def _match_shift(a, b):
    """Cyclic shift ``s`` minimising the total displacement ``|a_i - b_{i+s}|``."""
    n = len(a)
    best, best_s = np.inf, 0
    for s in range(n):
        d = np.abs(wrap(a - np.roll(b, -s))).sum()
        if d < best:
            best, best_s = d, s
    return best_s


def _band_pieces(angles_k):
    """Short arcs joining matched eigenvalues at consecutive Bloch phases.

    ``angles_k`` has shape ``(K, n)`` with rows sorted; the Bloch grid is
    treated as periodic (``k = 1`` wraps to ``k = 0``).
    """
    K = angles_k.shape[0]
    pieces, steps = [], []
    for j in range(K):
        a, b = angles_k[j], angles_k[(j + 1) % K]
        s = _match_shift(a, b)
        bb = np.roll(b, -s)
        d = wrap(bb - a)
        steps.append(np.abs(d))
        for x, dx in zip(a, d):
            start = x if dx >= 0 else x + dx
            pieces += split_arc(start, abs(dx))
    return pieces, np.concatenate(steps)


def rational_spectrum(p: int, q: int, theta_grid: int = DEFAULT_THETA, k_grid: int = DEFAULT_K) -> SpectrumEstimate:
    """Union of Floquet-block eigenvalues over ``theta`` and the Bloch phase.

    The spectrum of the period-``q`` family is invariant under
    ``theta -> theta + 1/q``, so phases are sampled on ``[0, 1/q)`` only.
    For each phase, eigenvalues at neighbouring Bloch phases are joined by
    short arcs, which traces the bands without thickening. Gaps narrower
    than three times the median eigenvalue displacement between neighbouring
    grid points are closed. ``resolution`` is the largest displacement of a
    band edge (Bloch phase 0 or 1/2) between neighbouring phases.
    """
    if q <= 0 or math.gcd(p, q) != 1:
        raise ValueError("need q > 0 and gcd(p, q) = 1")
    if k_grid % 2:
        k_grid += 1  # keep k = 1/2 on the grid
    thetas = np.arange(theta_grid) / (theta_grid * q)
    ks = np.arange(k_grid) / k_grid
    # chunk over theta to bound memory for larger q
    pieces, steps, edges = [], [], []
    chunk = max(1, int(4e6 // (k_grid * (2 * q) ** 2)))
    for i0 in range(0, theta_grid, chunk):
        U = floquet_matrices(p, q, thetas[i0 : i0 + chunk], ks)
        ev = np.linalg.eigvals(U)
        ang = np.sort(angle_of(ev), axis=-1)
        for t in range(ang.shape[0]):
            pc, st = _band_pieces(ang[t])
            pieces += pc
            steps.append(st)
            edges.append(np.concatenate([ang[t, 0], ang[t, k_grid // 2]]))
    steps = np.concatenate(steps)
    nz = steps[steps > 1e-12]
    median_gap = float(np.median(nz)) if len(nz) else 0.0
    merge_gap = 3.0 * median_gap
    edges = np.array(edges)
    # edges of theta and theta + 1/q coincide (shifted family); close the loop
    edges_next = np.roll(edges, -1, axis=0)
    edge_moves = []
    for e0, e1 in zip(edges, edges_next):
        s = _match_shift(np.sort(e0), np.sort(e1))
        edge_moves.append(np.abs(wrap(np.roll(np.sort(e1), -s) - np.sort(e0))).max())
    resolution = float(max(edge_moves)) if edge_moves else 0.0
    arcs = merge_intervals(pieces, merge_gap)
    coarse = resolution > merge_gap
    source = {"kind": "floquet_block", "p": p, "q": q, "theta_grid": theta_grid, "k_grid": k_grid,
              "median_gap": median_gap, "merge_gap": merge_gap}
    if coarse:
        log.info("p/q=%d/%d: edge displacement %.3g exceeds merge threshold %.3g", p, q, resolution, merge_gap)
    return SpectrumEstimate(arcs, resolution, source, coarse)


def convergent_spectrum(beta, q_max: int, **kw) -> SpectrumEstimate:
    """Floquet spectrum of the largest continued-fraction convergent with ``q <= q_max``."""
    from .torus import as_frequency

    beta = as_frequency(beta)
    p, q = beta.convergent_below(q_max)
    est = rational_spectrum(p, q, **kw)
    est.source["convergent"] = f"{p}/{q}"
    return est


def farey(q_max: int) -> list[tuple[int, int]]:
    """Reduced fractions ``p/q`` in ``[0, 1]`` with ``q <= q_max``, ascending."""
    fr = sorted({Fraction(p, q) for q in range(1, q_max + 1) for p in range(0, q + 1)})
    return [(f.numerator, f.denominator) for f in fr]


@dataclass
class ButterflyRaster:
    beta_axis: list
    bins: int
    bitmap: np.ndarray
    estimates: list = field(default_factory=list, repr=False)

    @property
    def angle_axis(self) -> np.ndarray:
        return (np.arange(self.bins) + 0.5) / self.bins

    def write_pgm(self, path: str, sidecar: dict | None = None) -> None:
        """Binary graymap, one row per frequency (ascending), spectrum black."""
        img = np.where(self.bitmap, 0, 255).astype(np.uint8)
        h, w = img.shape
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(img.tobytes())
        meta = {
            "format": "P5",
            "rows": [{"p": p, "q": q, "measure": e.measure, "resolution": e.resolution, "coarse": e.coarse}
                     for (p, q), e in zip(self.beta_axis, self.estimates)],
            "angle_bins": self.bins,
            "angle_axis": "bin i covers turns [i/bins, (i+1)/bins); z = exp(2 pi i angle)",
            "pixel": "0 = spectrum, 255 = gap",
        }
        if sidecar:
            meta.update(sidecar)
        with open(path + ".json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)

    @staticmethod
    def read_pgm(path: str) -> np.ndarray:
        with open(path, "rb") as fh:
            data = fh.read()
        parts = data.split(maxsplit=4)
        if parts[0] != b"P5":
            raise ValueError("not a binary graymap")
        w, h = int(parts[1]), int(parts[2])
        raw = np.frombuffer(parts[4][: w * h], dtype=np.uint8)
        return raw.reshape(h, w) == 0


def raster_row(est: SpectrumEstimate, bins: int) -> np.ndarray:
    """Bins ``[i/bins, (i+1)/bins)`` that meet an arc."""
    row = np.zeros(bins, bool)
    for s, e in est.arcs:
        i0 = int(math.floor(s * bins))
        i1 = int(math.ceil(e * bins)) - 1
        row[max(i0, 0) : min(i1, bins - 1) + 1] = True
    return row


def arcs_from_row(row: np.ndarray) -> SpectrumEstimate:
    bins = len(row)
    arcs = merge_intervals([(i / bins, (i + 1) / bins) for i in np.flatnonzero(row)])
    return SpectrumEstimate(arcs, 1.0 / bins, {"kind": "raster"})


def butterfly(q_max: int, theta_grid: int = 16, k_grid: int = 16, angle_bins: int = 512) -> ButterflyRaster:
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    axis = farey(q_max)
    rows, ests = [], []
    for p, q in axis:
        est = rational_spectrum(p, q, theta_grid, k_grid)
        ests.append(est)
        rows.append(raster_row(est, angle_bins))
    return ButterflyRaster(axis, angle_bins, np.array(rows), ests)


def write_measure_csv(path: str, rows) -> None:
    """Rows of ``(p, q, measure, uncertainty)``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["p", "q", "measure", "uncertainty"])
        for p, q, m, u in rows:
            w.writerow([p, q, f"{m:.12g}", f"{u:.12g}"])


def intersect_arcs(a, b) -> list[tuple[float, float]]:
    out = []
    for s, e in a:
        for t, f in b:
            lo, hi = max(s, t), min(e, f)
            if hi > lo:
                out.append((lo, hi))
    return sorted(out)


def nested_spectrum_points(beta, q_base: int, q_refine: int, count: int = 8, grids=None) -> np.ndarray:
    """Angles inside the convergent spectrum at ``q_base`` that survive refinement.

    The Floquet spectrum of the convergent with denominator ``q_base`` is
    intersected with the spectra of all later convergents up to ``q_refine``
    (smaller grids as ``q`` grows). Returns the centres of the ``count``
    longest surviving arcs, sorted. These points lie in the ``q_base``
    spectrum and much closer to the limiting set than a typical band point.
    """
    from .torus import as_frequency

    beta = as_frequency(beta)
    convs = [(p, q) for p, q in beta.convergents if q_base <= q <= q_refine]
    if not convs or convs[0][1] != q_base:
        raise ValueError(f"{q_base} is not a convergent denominator")
    grids = grids or {}
    arcs = None
    for p, q in convs:
        g = grids.get(q, DEFAULT_THETA if q <= 34 else max(6, int(512 // q) * 2))
        est = rational_spectrum(p, q, g, g)
        arcs = est.arcs if arcs is None else intersect_arcs(arcs, est.arcs)
    if len(arcs) < count:
        raise ValueError("refined spectrum has fewer arcs than requested points")
    order = sorted(arcs, key=lambda a: a[0] - a[1])[:count]
    return np.sort([(s + e) / 2 for s, e in order])


def gap_midpoints(est: SpectrumEstimate, count: int = 8) -> np.ndarray:
    """Midpoints of the ``count`` widest gaps, i.e. points at maximal arc distance."""
    gaps = sorted(_gaps(est.arcs), key=lambda g: g[0] - g[1])[:count]
    return np.sort([((s + e) / 2) % 1.0 for s, e in gaps])
