"""Fourier-side check of the duality for walk eigenvectors.

For a finitely supported state the transforms
``psi_s(x) = sum_n psi_{s,n} e^{2 pi i n x}`` are trigonometric polynomials, so
shifts ``x -> x +- beta`` are exact by modulating the coefficients; no
interpolation error enters the residuals.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .operators import WalkState, build_decoupled_truncation
from .spectrum import diagonalize
from .torus import as_frequency

log = logging.getLogger(__name__)

POLE_WARN = 1e-6


@dataclass
class DualPair:
    """``w_up = psi_up + i psi_down`` and ``w_down = i psi_up + psi_down`` on a grid.

    ``coeffs`` (shape ``(S, 2)``, first site ``n_min``) is kept when the pair
    comes from a walk state, which makes every shift exact. Pairs built from
    grid samples alone can only be shifted by multiples of the grid step.
    """

    x: np.ndarray
    w_up: np.ndarray
    w_down: np.ndarray
    grid_size: int
    n_min: int | None = None
    coeffs: np.ndarray | None = field(default=None, repr=False)

    def l2_norm(self) -> float:
        """Grid approximation of the L^2(T) norm of ``(w_up, w_down)``."""
        return float(math.sqrt((np.sum(np.abs(self.w_up) ** 2) + np.sum(np.abs(self.w_down) ** 2)) / self.grid_size))

    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.w_up)), np.max(np.abs(self.w_down))))

    def shifted(self, delta: float, offset: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """``w(x + delta)`` at the grid points (``offset`` moves the grid by a fraction of a step)."""
        if self.coeffs is not None:
            off = self.offset if offset is None else offset
            pu, pd = _synth(self.coeffs, self.n_min, self.grid_size, off, delta)
            return pu + 1j * pd, 1j * pu + pd
        if offset is not None and offset != self.offset:
            raise ValueError("grid-sampled pair cannot be re-gridded")
        steps = delta * self.grid_size
        k = int(round(steps))
        if abs(steps - k) > 1e-9:
            raise ValueError("shift is not a multiple of the grid step and no coefficients are stored")
        return np.roll(self.w_up, -k), np.roll(self.w_down, -k)

    @property
    def offset(self) -> float:
        return float(self.x[0] * self.grid_size)

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["x", "re_w_up", "im_w_up", "re_w_down", "im_w_down"])
            for x, a, b in zip(self.x, self.w_up, self.w_down):
                w.writerow([f"{x:.12g}", f"{a.real:.12g}", f"{a.imag:.12g}", f"{b.real:.12g}", f"{b.imag:.12g}"])


def _synth(coeffs, n_min, G, offset, delta):
    """``sum_n c_n e^{2 pi i n (x + delta)}`` at ``x_j = (j + offset)/G`` for both spins."""
    S = coeffs.shape[0]
    n = n_min + np.arange(S)
    mod = np.exp(2j * np.pi * n * (delta + offset / G))[:, None] * coeffs
    buf = np.zeros((G, 2), complex)
    buf[:S] = mod
    vals = np.fft.ifft(buf, axis=0) * G  # sum_m c_m e^{+2 pi i m j/G}
    j = np.arange(G)
    phase = np.exp(2j * np.pi * n_min * j / G)[:, None]
    out = vals * phase
    return out[:, 0], out[:, 1]


def transform(psi: WalkState, grid_size: int, offset: float = 0.0) -> DualPair:
    """Evaluate the dual fields of ``psi`` on ``x_j = (j + offset)/grid_size``."""
    G = int(grid_size)
    if G <= 0 or G & (G - 1):
        raise ValueError("grid size must be a power of two")
    S = len(psi.amplitudes)
    if G < 2 * S:
        raise ValueError(f"grid size {G} is smaller than twice the support length {S}")
    pu, pd = _synth(psi.amplitudes, psi.n_min, G, offset, 0.0)
    x = (np.arange(G) + offset) / G
    return DualPair(x, pu + 1j * pd, 1j * pu + pd, G, psi.n_min, psi.amplitudes.copy())


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def residual_fields(pair: DualPair, beta, theta: float, z: complex, offset: float | None = None):
    """Pointwise defects of the two dual equations on the pair's grid (or an offset grid)."""
    beta = as_frequency(beta)
    b = beta.value
    off = pair.offset if offset is None else offset
    x = (np.arange(pair.grid_size) + off) / pair.grid_size
    w_up, w_dn = pair.shifted(0.0, offset)
    up_p, _ = pair.shifted(b, offset)
    _, dn_m = pair.shifted(-b, offset)
    c, s = np.cos(2 * np.pi * x), np.sin(2 * np.pi * x)
    et = np.exp(2j * np.pi * theta)
    r_up = z * w_up - c * et * up_p - s / et * dn_m
    r_dn = z * w_dn + s * et * up_p - c / et * dn_m
    return x, r_up, r_dn, (w_up, w_dn, up_p, dn_m)


@dataclass
class DualityReport:
    residual_up: float
    residual_down: float
    truncation_size: int
    grid_size: int
    shift_error: float = 0.0
    boundary_shift: float | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def dual_residual(pair: DualPair, beta, theta: float, z: complex, truncation_size: int = 0) -> DualityReport:
    """Relative L^2 residuals of the two dual equations on the grid."""
    nrm = pair.l2_norm()
    if nrm == 0.0:
        raise ValueError("dual fields vanish identically")
    _, r_up, r_dn, _ = residual_fields(pair, beta, theta, z)
    G = pair.grid_size
    ru = float(np.linalg.norm(r_up) / math.sqrt(G) / nrm)
    rd = float(np.linalg.norm(r_dn) / math.sqrt(G) / nrm)
    return DualityReport(ru, rd, truncation_size, G, _shift_check(pair, as_frequency(beta).value))


def _shift_check(pair: DualPair, b: float, samples: int = 8) -> float:
    """Compare the modulated shift with direct summation at a few grid points."""
    if pair.coeffs is None:
        return 0.0
    up, _ = pair.shifted(b)
    idx = np.linspace(0, pair.grid_size - 1, samples).astype(int)
    n = pair.n_min + np.arange(len(pair.coeffs))
    xs = pair.x[idx] + b
    E = np.exp(2j * np.pi * np.outer(xs, n))
    direct = E @ pair.coeffs[:, 0] + 1j * (E @ pair.coeffs[:, 1])
    return float(np.max(np.abs(direct - up[idx])) / max(pair.sup_norm(), 1e-300))


@dataclass
class SemiConjugacy:
    defect: float
    bound: float
    min_cos: float
    points: int

    @property
    def within_bound(self) -> bool:
        return self.defect <= self.bound * (1 + 1e-9) + 1e-14


def semi_conjugacy_check(pair: DualPair, beta, theta: float, z: complex, offset: float | None = None) -> SemiConjugacy:
    """Defect of ``M(x) (e^{-2 pi i theta} w_down(x-beta), w_up(x)) = (w_down(x), e^{2 pi i theta} w_up(x+beta))``.

    Evaluated on the grid offset by half a step (pairs with stored
    coefficients) and normalised by the sup norm of ``w``. Rearranging the
    two dual equations gives the pointwise bound
    ``|defect| <= |sec 2 pi x| (|r_up| + |r_down|)`` in the max norm, which is
    returned alongside.
    """
    if pair.sup_norm() == 0.0:
        raise ValueError("dual fields vanish identically")
    if offset is None:
        offset = 0.5 if pair.coeffs is not None else None
    x, r_up, r_dn, (w_up, w_dn, up_p, dn_m) = residual_fields(pair, beta, theta, z, offset)
    c, s = np.cos(2 * np.pi * x), np.sin(2 * np.pi * x)
    keep = np.abs(c) > 0
    if np.min(np.abs(c[keep])) < POLE_WARN:
        log.warning("grid point within %.1e of a pole of M", POLE_WARN)
    c, s = c[keep], s[keep]
    et = np.exp(2j * np.pi * theta)
    a_in, b_in = dn_m[keep] / et, w_up[keep]
    first = (a_in / z - s * b_in) / c - w_dn[keep]
    second = (-s * a_in + z * b_in) / c - et * up_p[keep]
    scale = max(float(np.max(np.abs(w_up))), float(np.max(np.abs(w_dn))))
    defect = np.maximum(np.abs(first), np.abs(second))
    bound = np.abs(1.0 / c) * (np.abs(r_up[keep]) + np.abs(r_dn[keep]))
    return SemiConjugacy(float(defect.max() / scale), float(bound.max() / scale), float(np.min(np.abs(c))), int(keep.sum()))


# ---------------------------------------------------------------------------
# truncation pipeline
# ---------------------------------------------------------------------------


def bulk_index(vecs: np.ndarray, layer: int) -> int:
    """Eigenvector with the least mass in the outer ``layer`` entries on either side."""
    mass = np.linalg.norm(vecs[:layer], axis=0) ** 2 + np.linalg.norm(vecs[-layer:], axis=0) ** 2
    return int(np.argmin(mass))


def truncation_duality(beta, theta: float, L: int, first_site: int | None = None, grid_size: int | None = None) -> dict:
    """Duality residuals for every eigenvector of the decoupled truncation of size ``2L``.

    Returns per-eigenvector residual arrays, the semi-conjugacy defects and
    bounds, their medians, and the values for the bulk eigenvector (least
    boundary mass).
    """
    beta = as_frequency(beta)
    a = -L // 2 if first_site is None else first_site
    op = build_decoupled_truncation(beta, theta, (a, a + L))
    vals, vecs = diagonalize(op, vectors=True)
    S = op.size // 2 + 1
    G = grid_size or next_pow2(2 * S)
    ru, rd, dfs, bds = [], [], [], []
    for k in range(len(vals)):
        st = WalkState.from_vector(vecs[:, k], op.first_index)
        pair = transform(st, G)
        rep = dual_residual(pair, beta, theta, vals[k], op.size)
        sc = semi_conjugacy_check(pair, beta, theta, vals[k])
        ru.append(rep.residual_up)
        rd.append(rep.residual_down)
        dfs.append(sc.defect)
        bds.append(sc.bound)
    ru, rd, dfs, bds = map(np.array, (ru, rd, dfs, bds))
    kb = bulk_index(vecs, max(2, op.size // 10))
    return {
        "L": L, "size": op.size, "grid_size": G, "cut_sites": op.meta["cut_sites"],
        "residual_up": ru, "residual_down": rd, "defect": dfs, "bound": bds,
        "median_up": float(np.median(ru)), "median_down": float(np.median(rd)),
        "bulk_up": float(ru[kb]), "bulk_down": float(rd[kb]), "bulk_eigenvalue": complex(vals[kb]),
        "all_within_bound": bool(np.all(dfs <= bds * (1 + 1e-9) + 1e-14)),
    }


def duality_report(beta, theta: float, L: int, first_site: int | None = None) -> DualityReport:
    """Median residuals at size ``2L`` plus a boundary estimate from shifting both cuts by one site."""
    a = -L // 2 if first_site is None else first_site
    base = truncation_duality(beta, theta, L, a)
    moved = truncation_duality(beta, theta, L, a + 1)
    bshift = max(abs(base["median_up"] - moved["median_up"]), abs(base["median_down"] - moved["median_down"]))
    extra = {k: base[k] for k in ("cut_sites", "bulk_up", "bulk_down", "all_within_bound")}
    extra["bulk_eigenvalue"] = [base["bulk_eigenvalue"].real, base["bulk_eigenvalue"].imag]
    extra["max_defect"] = float(base["defect"].max())
    extra["max_bound_ratio"] = float(np.max(base["defect"] / np.maximum(base["bound"], 1e-300)))
    return DualityReport(base["median_up"], base["median_down"], base["size"], base["grid_size"], 0.0, bshift, extra)


def write_report(path: str, report: DualityReport, provenance: dict | None = None) -> None:
    d = report.to_json()
    if provenance:
        d["provenance"] = provenance
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(d, fh, indent=2)
