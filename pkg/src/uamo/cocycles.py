"""Transfer cocycles of the walk, Lyapunov exponents, accelerations and a
numerical dominated-splitting test.

Batched iteration keeps the four entries of every 2x2 product in separate
complex arrays; this is much faster than stacks of tiny matmuls.
"""
from __future__ import annotations

import csv
import enum
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .operators import CoinFieldPair
from .torus import Frequency, as_frequency

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
RENORM_EVERY = 16


class PoleError(ZeroDivisionError):
    """The sec factor of ``M`` is evaluated at a zero of cosine."""


class CocycleKind(enum.Enum):
    M = "M"
    N = "N"
    GZ_f = "GZ_f"
    GZ_g = "GZ_g"
    GZ_product = "GZ_product"

    @classmethod
    def parse(cls, v) -> "CocycleKind":
        return v if isinstance(v, cls) else cls(str(v))


@dataclass(frozen=True)
class SpectralParameter:
    z: complex
    eps: float = 0.0

    def __post_init__(self):
        if self.z == 0:
            raise ValueError("spectral parameter z must be nonzero")
        if not math.isfinite(self.eps):
            raise ValueError("eps must be finite")

    @property
    def unimodular(self) -> bool:
        return abs(abs(self.z) - 1.0) < 1e-12

    @classmethod
    def on_circle(cls, angle: float, eps: float = 0.0) -> "SpectralParameter":
        """``z = exp(2 pi i angle)``."""
        return cls(complex(np.exp(2j * np.pi * angle)), eps)


def _as_param(z) -> SpectralParameter:
    return z if isinstance(z, SpectralParameter) else SpectralParameter(complex(z))


# ---------------------------------------------------------------------------
# single-point evaluation
# ---------------------------------------------------------------------------


def _trig(x, eps):
    """``sin`` and ``cos`` of ``2 pi (x + i eps)`` from real-argument pieces."""
    a = TWO_PI * np.asarray(x, float)
    b = TWO_PI * np.asarray(eps, float)
    sa, ca = np.sin(a), np.cos(a)
    ch, sh = np.cosh(b), np.sinh(b)
    return sa * ch + 1j * ca * sh, ca * ch - 1j * sa * sh


def _is_pole(x) -> bool:
    r = float(x) % 1.0
    return r == 0.25 or r == 0.75


def eval_M(z, x: float) -> np.ndarray:
    """``sec(2 pi (x + i eps)) [[1/z, -sin], [-sin, z]]``."""
    p = _as_param(z)
    if p.eps == 0.0 and _is_pole(x):
        raise PoleError(f"M has a pole at x = {x}")
    s, c = _trig(x, p.eps)
    return np.array([[1 / p.z, -s], [-s, p.z]], dtype=complex) / c


def eval_N(z, x: float) -> np.ndarray:
    """``[[-2i/z, 2i sin], [2i sin, -2iz]]`` at ``2 pi (x + i eps)``; entire in ``x``."""
    p = _as_param(z)
    s, _ = _trig(x, p.eps)
    return np.array([[-2j / p.z, 2j * s], [2j * s, -2j * p.z]], dtype=complex)


def gz_matrices(pair: CoinFieldPair, z: complex, x) -> tuple[np.ndarray, np.ndarray]:
    """Normalised GZ factors ``A_f``, ``A_g`` built from the entries of ``f``, ``g``.

    With ``f = [[conj(a), r], [conj(r), -a]]`` we have
    ``A_f = [[-a, 1], [1, -conj(a)]]`` and similarly
    ``A_g = [[-conj(a), z], [1/z, -a]]``. Reading ``a`` and ``conj(a)`` off
    the matrix entries keeps the construction analytic under ``x -> x + i eps``.
    """
    fm, gm = pair.f(x), pair.g(x)
    af = np.empty(fm.shape, complex)
    af[..., 0, 0] = fm[..., 1, 1]
    af[..., 0, 1] = 1.0
    af[..., 1, 0] = 1.0
    af[..., 1, 1] = -fm[..., 0, 0]
    ag = np.empty(gm.shape, complex)
    ag[..., 0, 0] = -gm[..., 0, 0]
    ag[..., 0, 1] = z
    ag[..., 1, 0] = 1.0 / z
    ag[..., 1, 1] = gm[..., 1, 1]
    return af, ag


def eval_GZ(z, x: float, which: str = "product", pair: CoinFieldPair | None = None) -> np.ndarray:
    """``A_f``, ``A_g`` or ``A_f A_g`` for the walk fields (or a given pair)."""
    from .operators import walk_fields

    p = _as_param(z)
    pair = pair or walk_fields()
    xc = complex(x) + 1j * p.eps if p.eps else float(x)
    af, ag = gz_matrices(pair, p.z, np.asarray(xc))
    if which == "f":
        return af
    if which == "g":
        return ag
    if which == "product":
        return af @ ag
    raise ValueError(f"which must be f, g or product, got {which!r}")


def gz_propagate(pair: CoinFieldPair, x: float, beta, z: complex, init, k_start: int, count: int):
    """Run the GZ recursion from index ``k_start`` for ``count`` steps.

    ``init = (u(k_start), v(k_start))``. Returns arrays ``u, v`` indexed by
    ``k_start .. k_start + count``. Odd ``k`` uses ``A_g(T^{(k+1)/2} x)/rho_g``,
    even ``k`` uses ``A_f(T^{k/2} x)/rho_f``.
    """
    beta = as_frequency(beta)
    b = beta.value
    out = np.zeros((count + 1, 2), dtype=complex)
    out[0] = init
    for i in range(1, count + 1):
        k = k_start + i
        if k % 2:
            y = x + ((k + 1) // 2) * b
            _, ag = gz_matrices(pair, z, np.asarray(y))
            rho = pair.g(np.asarray(y))[0, 1]
            step = ag / rho
        else:
            y = x + (k // 2) * b
            af, _ = gz_matrices(pair, z, np.asarray(y))
            rho = pair.f(np.asarray(y))[0, 1]
            step = af / rho
        out[i] = step @ out[i - 1]
    return out[:, 0], out[:, 1]


# ---------------------------------------------------------------------------
# batched iteration
# ---------------------------------------------------------------------------


def orbit_angle(beta: Frequency, x0, j: int):
    """``x0 + j beta`` reduced mod 1, exact in the integer part for rational ``beta``."""
    if beta.rational and beta.convergents:
        p, q = beta.convergents[-1]
        return np.mod(np.asarray(x0) + (j * p % q) / q, 1.0)
    return np.mod(np.asarray(x0) + math.fmod(j * beta.value, 1.0), 1.0)


def _step_entries(kind: CocycleKind, z, s, c):
    if kind is CocycleKind.N:
        return -2j / z, 2j * s, 2j * s, -2j * z
    if kind is CocycleKind.M:
        sec = 1.0 / c
        return sec / z, -s * sec, -s * sec, z * sec
    if kind is CocycleKind.GZ_product:
        return 1.0 / z + 0 * s, -s, -s, z + 0 * s
    if kind is CocycleKind.GZ_f:
        zero = 0 * s
        return zero, zero + 1, zero + 1, zero
    if kind is CocycleKind.GZ_g:
        return -s, z + 0 * s, 1.0 / z + 0 * s, -s
    raise ValueError(kind)


def iterate_batch(kind, beta, z, eps, x0, n: int, checkpoints=None):
    """Ordered products ``A(x0 + (n-1) beta) ... A(x0)`` for broadcast batches.

    ``z`` and ``eps`` broadcast against ``x0``. Returns ``(P, logscale)`` with
    the true product equal to ``exp(logscale) * P``; ``P`` has trailing shape
    ``(2, 2)``. If ``checkpoints`` is given, a list of such pairs is returned,
    one per requested step count.
    """
    kind = CocycleKind.parse(kind)
    beta = as_frequency(beta)
    z = np.asarray(z, complex)
    eps = np.asarray(eps, float)
    x0 = np.asarray(x0, float)
    shape = np.broadcast_shapes(z.shape, eps.shape, x0.shape)
    ch, sh = np.cosh(TWO_PI * eps), np.sinh(TWO_PI * eps)
    if kind is CocycleKind.M and np.any(eps == 0):
        _check_poles(beta, x0, n)
    p = np.ones(shape, complex)
    q = np.zeros(shape, complex)
    r = np.zeros(shape, complex)
    t = np.ones(shape, complex)
    logscale = np.zeros(shape)
    # scale the renormalisation interval so entries never overflow
    grow = math.log(2.0 + 2.0 * math.cosh(TWO_PI * float(np.max(np.abs(eps)))) + float(np.max(np.abs(z)) + np.max(1 / np.abs(z))))
    every = max(1, min(RENORM_EVERY, int(300.0 / max(grow, 1e-3))))
    want = sorted(set(checkpoints)) if checkpoints is not None else [n]
    results = {}
    if 0 in want:
        results[0] = (_pack(p, q, r, t), logscale.copy())
    for j in range(max(want)):
        a = TWO_PI * orbit_angle(beta, x0, j)
        sa, ca = np.sin(a), np.cos(a)
        s = sa * ch + 1j * ca * sh
        c = ca * ch - 1j * sa * sh
        e11, e12, e21, e22 = _step_entries(kind, z, s, c)
        p, q, r, t = e11 * p + e12 * r, e11 * q + e12 * t, e21 * p + e22 * r, e21 * q + e22 * t
        if (j + 1) % every == 0 or (j + 1) in want:
            nrm = np.sqrt(np.abs(p) ** 2 + np.abs(q) ** 2 + np.abs(r) ** 2 + np.abs(t) ** 2)
            nrm = np.where(nrm > 0, nrm, 1.0)
            p, q, r, t = p / nrm, q / nrm, r / nrm, t / nrm
            logscale = logscale + np.log(nrm)
        if (j + 1) in want:
            results[j + 1] = (_pack(p, q, r, t), logscale.copy())
    if checkpoints is None:
        return results[n]
    return [results[k] for k in want]


def _pack(p, q, r, t):
    return np.stack([np.stack([p, q], -1), np.stack([r, t], -1)], -2)


def _check_poles(beta, x0, n):
    x0 = np.atleast_1d(x0)
    for j in range(n):
        x = orbit_angle(beta, x0, j)
        if np.any((x == 0.25) | (x == 0.75)):
            raise PoleError(f"orbit hits a pole of M at step {j}")


def iterate(kind, beta, z, x0: float, n: int) -> np.ndarray:
    """Plain product ``A_n(x0)`` (may overflow for very long orbits; see :func:`iterate_log`)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    p = _as_param(z)
    mat, ls = iterate_batch(kind, beta, p.z, p.eps, x0, n)
    return mat * np.exp(ls)


def iterate_log(kind, beta, z, x0: float, n: int) -> tuple[np.ndarray, float]:
    p = _as_param(z)
    mat, ls = iterate_batch(kind, beta, p.z, p.eps, x0, n)
    return mat, float(ls)


def log_singular_values(mat, logscale):
    """``log sigma_1`` and ``log sigma_2`` of ``exp(logscale) * mat`` (2x2 batches)."""
    fro2 = np.sum(np.abs(mat) ** 2, axis=(-2, -1))
    det = np.abs(mat[..., 0, 0] * mat[..., 1, 1] - mat[..., 0, 1] * mat[..., 1, 0])
    disc = np.sqrt(np.maximum(fro2**2 - 4.0 * det**2, 0.0))
    s1 = np.sqrt(0.5 * (fro2 + disc))
    with np.errstate(divide="ignore"):
        s2 = np.where(s1 > 0, det / np.where(s1 > 0, s1, 1.0), 0.0)
        return np.log(s1) + logscale, np.log(s2) + logscale


# ---------------------------------------------------------------------------
# Lyapunov exponents
# ---------------------------------------------------------------------------


def default_iterations(beta) -> int:
    """``10 q_k`` for the largest stored convergent denominator ``q_k <= 1000``."""
    beta = as_frequency(beta)
    qs = [q for q in beta.denominators if q <= 1000]
    return 10 * (max(qs) if qs else 1)


def theta_samples(count: int, seed: int = 0) -> np.ndarray:
    """Randomly shifted uniform grid ``(j + u)/count``; a rank-1 low-discrepancy set."""
    u = np.random.default_rng(seed).random()
    return (np.arange(count) + u) / count


@dataclass
class LyapunovEstimate:
    value: float
    error: float
    n_iters: int
    samples: int
    kind: str


def _bootstrap_error(vals: np.ndarray, seed: int, reps: int = 200) -> np.ndarray:
    """Bootstrap standard error of the mean along the last axis."""
    rng = np.random.default_rng(seed + 7919)
    m = vals.shape[-1]
    idx = rng.integers(0, m, size=(reps, m))
    means = vals[..., idx].mean(axis=-1)
    return means.std(axis=-1)


def lyapunov_grid(kind, beta, zs, epss, n_iters: int | None = None, samples: int = 256, seed: int = 0):
    """Lyapunov exponents on the product grid ``zs x epss``.

    Returns ``(L, err)`` arrays of shape ``(len(zs), len(epss))`` in nats per
    iterate. Phases whose ``M`` orbit hits a pole are redrawn.
    """
    kind = CocycleKind.parse(kind)
    beta = as_frequency(beta)
    zs = np.atleast_1d(np.asarray(zs, complex))
    epss = np.atleast_1d(np.asarray(epss, float))
    n = n_iters or default_iterations(beta)
    th = theta_samples(samples, seed)
    if kind is CocycleKind.M and np.any(epss == 0):
        th = _avoid_poles(beta, th, n, seed)
    mat, ls = iterate_batch(kind, beta, zs[:, None, None], epss[None, :, None], th[None, None, :], n)
    l1, _ = log_singular_values(mat, ls)
    per_theta = l1 / n
    return per_theta.mean(axis=-1), _bootstrap_error(per_theta, seed)


def _avoid_poles(beta, th, n, seed, tries: int = 5):
    rng = np.random.default_rng(seed + 1)
    for _ in range(tries):
        bad = np.zeros(th.shape, bool)
        for j in range(n):
            x = orbit_angle(beta, th, j)
            bad |= (x == 0.25) | (x == 0.75)
        if not bad.any():
            return th
        log.info("redrawing %d phases whose orbit meets a pole", int(bad.sum()))
        th = th.copy()
        th[bad] = rng.random(int(bad.sum()))
    raise PoleError("could not find pole-free phases")


def lyapunov(kind, beta, z, n_iters: int | None = None, samples: int = 256, seed: int = 0) -> LyapunovEstimate:
    """Average of ``(1/n) log ||A_n(theta)||`` over ``samples`` phases with a bootstrap error bar."""
    p = _as_param(z)
    n = n_iters or default_iterations(beta)
    L, err = lyapunov_grid(kind, beta, [p.z], [p.eps], n, samples, seed)
    return LyapunovEstimate(float(L[0, 0]), float(err[0, 0]), n, samples, CocycleKind.parse(kind).value)


@dataclass
class LyapunovProfile:
    eps_grid: np.ndarray
    L_values: np.ndarray
    errors: np.ndarray
    slopes: np.ndarray
    n_iters: int
    theta_samples: int
    z: complex = 1.0

    def to_csv(self, path: str, provenance: dict | None = None) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["eps", "L", "err", "slope"])
            for e, L, er, s in zip(self.eps_grid, self.L_values, self.errors, self.slopes):
                w.writerow([fmt(e), fmt(L), fmt(er), fmt(s)])
        if provenance is not None:
            with open(path + ".json", "w", encoding="utf-8") as fh:
                json.dump(provenance, fh, indent=2)


def fmt(v) -> str:
    v = float(v)
    return "nan" if math.isnan(v) else f"{v:.12g}"


def lyapunov_profile(beta, z, eps_grid, n_iters=None, samples=256, seed=0) -> LyapunovProfile:
    """``L(beta, z; eps)`` of ``N`` over a sorted ``eps`` grid, slopes in units of ``2 pi``."""
    eps_grid = np.sort(np.asarray(eps_grid, float))
    n = n_iters or default_iterations(beta)
    L, err = lyapunov_grid(CocycleKind.N, beta, [complex(z)], eps_grid, n, samples, seed)
    L, err = L[0], err[0]
    slopes = np.full(len(eps_grid), np.nan)
    if len(eps_grid) > 1:
        # forward difference; the last point repeats the previous slope
        d = np.diff(L) / (TWO_PI * np.diff(eps_grid))
        slopes[:-1] = d
        slopes[-1] = d[-1]
    return LyapunovProfile(eps_grid, L, err, slopes, n, samples, complex(z))


# ---------------------------------------------------------------------------
# acceleration
# ---------------------------------------------------------------------------


@dataclass
class Acceleration:
    omega: float
    omega_rounded: int
    resolved: bool
    h: float
    note: str = ""


def acceleration(beta, z, eps0: float = 0.0, h: float = 0.05, h_min: float = 0.05 / 32,
                 n_iters=None, samples=256, seed=0, kink_tol: float = 0.1) -> Acceleration:
    """Slope of ``eps -> L(beta, z; eps) / (2 pi)`` at ``eps0``.

    The profile is piecewise affine, so ``h`` is halved until the two half
    intervals on each side give the same slope (no kink inside). At
    ``eps0 = 0`` the one-sided difference ``[L(h) - L(0)]/(2 pi h)`` is used,
    elsewhere the centred one. A slope more than 0.25 from an integer, or a
    kink that survives down to ``h_min``, leaves the result unresolved.
    """
    z = complex(z.z if isinstance(z, SpectralParameter) else z)
    n = n_iters or default_iterations(beta)
    while True:
        if eps0 == 0.0:
            pts = np.array([0.0, h / 2, h])
        else:
            pts = np.array([eps0 - h, eps0 - h / 2, eps0, eps0 + h / 2, eps0 + h])
        L, _ = lyapunov_grid(CocycleKind.N, beta, [z], pts, n, samples, seed)
        L = L[0]
        half = np.diff(L) / (TWO_PI * np.diff(pts))
        if eps0 == 0.0:
            omega = (L[2] - L[0]) / (TWO_PI * h)
        else:
            omega = (L[4] - L[0]) / (2 * TWO_PI * h)
        kink = float(np.max(half) - np.min(half)) > kink_tol
        if not kink or h / 2 < h_min:
            break
        h /= 2
    r = int(round(omega))
    resolved = bool(not kink and abs(omega - r) <= 0.25)
    note = "kink inside finest stencil" if kink else ("" if resolved else "slope far from an integer")
    return Acceleration(float(omega), r, resolved, h, note)


# ---------------------------------------------------------------------------
# dominated splitting
# ---------------------------------------------------------------------------


class Verdict(str, enum.Enum):
    DS = "DS"
    NOT_DS = "NOT_DS"
    UNDECIDED = "UNDECIDED"


@dataclass
class DSResult:
    verdict: Verdict
    z: complex
    n: int
    min_ratio: float
    grid_step: float
    max_angle: float
    checkpoints: list = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        d["z"] = [self.z.real, self.z.imag]
        d["min_ratio"] = _finite_or_str(self.min_ratio)
        d["max_angle"] = _finite_or_str(self.max_angle)
        return d


def _finite_or_str(v):
    return float(v) if math.isfinite(v) else str(v)


def ds_grid(beta, size: int | None = None) -> np.ndarray:
    """Offset phase grid ``(j + 1/2)/G``; for ``beta = p/q`` ``G`` is a multiple of ``q``."""
    beta = as_frequency(beta)
    if size is None:
        size = 256
        if beta.rational:
            q = beta.convergents[-1][1]
            size = max(256, 64 * q)
    return (np.arange(size) + 0.5) / size


def ds_checkpoints(beta, n_max: int) -> list[int]:
    beta = as_frequency(beta)
    base = beta.convergents[-1][1] if beta.rational else 8
    out, n = [], base
    while n <= n_max:
        out.append(n)
        n *= 2
    return out or [n_max]


def dominated_splitting_check(beta, z, theta_grid=None, n_max: int = 1024, gap_threshold: float = 10.0,
                              angle_tol: float = 0.2, not_ds_ratio: float = 2.0) -> DSResult:
    """Singular-value gap plus direction consistency test for ``(beta, N^z)``.

    For each checkpoint ``n`` the ratio ``sigma_1/sigma_2`` of ``N_n`` is
    evaluated on the phase grid. ``E+`` at ``y`` is the top left singular
    vector of ``N_n(y - n beta)``; the test requires ``N(y) E+(y)`` to point
    along ``E+(y + beta)`` within ``angle_tol`` radians. Grid points where
    ``N_n`` is singular get ratio ``inf`` and are skipped by the angle test.

    DS is declared at the first checkpoint passing both tests. NOT_DS means
    the ratio shows no growth: it is below ``not_ds_ratio`` at the last two
    checkpoints (early transients of elliptic blocks are ignored).
    """
    return dominated_splitting_scan(beta, [z], theta_grid, n_max, gap_threshold, angle_tol, not_ds_ratio)[0]


def dominated_splitting_scan(beta, zs, theta_grid=None, n_max: int = 1024, gap_threshold: float = 10.0,
                             angle_tol: float = 0.2, not_ds_ratio: float = 2.0) -> list[DSResult]:
    beta = as_frequency(beta)
    zs = np.atleast_1d(np.asarray(zs, complex))
    grid = ds_grid(beta) if theta_grid is None else np.asarray(theta_grid, float)
    G = len(grid)
    step = float(1.0 / G) if theta_grid is None else float(np.max(np.diff(np.sort(grid)), initial=1.0))
    cps = ds_checkpoints(beta, n_max)
    starts = np.concatenate([grid, grid + beta.value])
    res = iterate_batch(CocycleKind.N, beta, zs[:, None], 0.0, starts[None, :], max(cps), checkpoints=cps)
    ratios_hist = np.zeros((len(zs), len(cps)))
    angles_hist = np.zeros((len(zs), len(cps)))
    for ci, (n, (mat, ls)) in enumerate(zip(cps, res)):
        l1, l2 = log_singular_values(mat, 0.0)
        ratio = np.exp(np.clip(l1 - l2, None, 700.0))
        ratio = np.where(np.isfinite(l2), ratio, np.inf)
        ratios_hist[:, ci] = ratio[:, :G].min(axis=1)
        u, _, _ = np.linalg.svd(mat)
        e_here = u[:, :G, :, 0]  # E+ at grid + n beta
        e_next = u[:, G:, :, 0]  # E+ at grid + beta + n beta
        y = orbit_angle(beta, grid, n)
        Ny = np.stack([eval_N_batch(zz, y) for zz in zs])
        pushed = np.einsum("zgij,zgj->zgi", Ny, e_here)
        cosang = np.abs(np.einsum("zgi,zgi->zg", pushed.conj(), e_next)) / np.maximum(
            np.linalg.norm(pushed, axis=-1), 1e-300)
        ang = np.arccos(np.clip(cosang, 0.0, 1.0))
        ok = np.isfinite(ratio[:, :G]) & np.isfinite(ratio[:, G:]) & (np.linalg.norm(pushed, axis=-1) > 1e-14)
        ang = np.where(ok, ang, 0.0)
        angles_hist[:, ci] = ang.max(axis=1)
    tail_len = min(2, len(cps))
    out = []
    for i, z in enumerate(zs):
        verdict, n_w, r_w, a_w = Verdict.UNDECIDED, cps[-1], ratios_hist[i, -1], angles_hist[i, -1]
        for ci, n in enumerate(cps):
            if ratios_hist[i, ci] >= gap_threshold and angles_hist[i, ci] < angle_tol:
                verdict, n_w, r_w, a_w = Verdict.DS, n, ratios_hist[i, ci], angles_hist[i, ci]
                break
        else:
            tail = ratios_hist[i, -tail_len:]
            if np.all(tail < not_ds_ratio):
                verdict = Verdict.NOT_DS
                j = len(cps) - tail_len + int(np.argmax(tail))
                n_w, r_w, a_w = cps[j], ratios_hist[i, j], angles_hist[i, j]
        trail = [{"n": n, "min_ratio": _finite_or_str(r), "max_angle": float(a)}
                 for n, r, a in zip(cps, ratios_hist[i], angles_hist[i])]
        out.append(DSResult(verdict, complex(z), int(n_w), float(r_w), step, float(a_w), trail))
    return out


def eval_N_batch(z: complex, x, eps: float = 0.0) -> np.ndarray:
    s, _ = _trig(x, eps)
    m = np.empty(np.shape(x) + (2, 2), complex)
    m[..., 0, 0] = -2j / z
    m[..., 0, 1] = 2j * s
    m[..., 1, 0] = 2j * s
    m[..., 1, 1] = -2j * z
    return m
