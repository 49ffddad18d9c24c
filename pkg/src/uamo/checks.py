"""Acceptance suites. Each returns a :class:`CheckResult` with the numbers it
was judged on; the CLI ``verify`` command and the test-suite share them."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import cocycles as cc
from . import spectrum as sp
from .duality import truncation_duality
from .operators import walk_fields
from .torus import as_frequency, cos_product_log, golden, logcos_closed_form, logcos_integral, rational_frequency


@dataclass
class CheckResult:
    name: str
    passed: bool
    seconds: float = 0.0
    limit: float = math.inf
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.passed and self.seconds <= self.limit

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"[{status}] {self.name} ({self.seconds:.1f}s / limit {self.limit:.0f}s)"

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.ok, "numbers_ok": self.passed, "seconds": self.seconds,
                "limit": self.limit, "details": _plain(self.details)}


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def _timed(name, limit, fn, *a, **kw) -> CheckResult:
    t = time.perf_counter()
    passed, details = fn(*a, **kw)
    return CheckResult(name, bool(passed), time.perf_counter() - t, limit, details)


# --- 1 -------------------------------------------------------------------


def _logcos():
    eps = [0.0, 0.1, 0.5, 2.0]
    errs = {e: abs(logcos_integral(e) - logcos_closed_form(e)) for e in eps}
    return max(errs.values()) < 1e-6, {"abs_errors": errs}


def check_logcos() -> CheckResult:
    return _timed("logcos", 1.0, _logcos)


# --- 2 -------------------------------------------------------------------


def _identities(samples: int, seed: int):
    rng = np.random.default_rng(seed)
    x = rng.random(samples)
    eps = rng.uniform(-1.0, 1.0, samples)
    z = np.exp(2j * np.pi * rng.random(samples)) * rng.uniform(0.5, 2.0, samples)
    s, c = cc._trig(x, eps)
    # M, N and the GZ product, entrywise and batched
    M = np.stack([np.stack([1 / z, -s], -1), np.stack([-s, z], -1)], -2) / c[:, None, None]
    N = np.stack([np.stack([-2j / z, 2j * s], -1), np.stack([2j * s, -2j * z], -1)], -2)
    af, ag = cc.gz_matrices(walk_fields(), z, x + 1j * eps)
    A = af @ ag
    # relative to the size of the products entering each determinant
    def det_err(m, target):
        d = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
        scale = np.maximum(np.abs(m[:, 0, 0] * m[:, 1, 1]) + np.abs(m[:, 0, 1] * m[:, 1, 0]), 1.0)
        return np.abs(d - target) / scale

    dm = det_err(M, 1.0)
    dn = det_err(N, -4.0 * c**2)
    gz = np.max(np.abs(N + 2j * A) / np.maximum(np.abs(N), 1.0), axis=(1, 2))
    # composition law on a smaller random subset (each is a full product)
    beta = golden()
    comp = []
    for i in range(64):
        n, m = rng.integers(1, 65, 2)
        zz = complex(z[i]) / abs(z[i])
        p = cc.SpectralParameter(zz, float(eps[i]) * 0.25)
        lhs = cc.iterate("N", beta, p, x[i], int(n + m))
        rhs = cc.iterate("N", beta, p, (x[i] + m * beta.value) % 1.0, int(n)) @ cc.iterate("N", beta, p, x[i], int(m))
        comp.append(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))
    comp = np.array(comp)
    ok = dm.max() < 1e-12 and dn.max() < 1e-12 and gz.max() < 1e-13 and comp.max() < 1e-10
    return ok, {"det_M": dm.max(), "det_N": dn.max(), "N_vs_GZ": gz.max(), "composition": comp.max(), "samples": samples}


def check_identities(samples: int = 10_000, seed: int = 0) -> CheckResult:
    return _timed("identities", 5.0, _identities, samples, seed)


# --- 3 -------------------------------------------------------------------


def _large_eps(samples, seed):
    zs = np.exp(2j * np.pi * (np.arange(16) + 0.5) / 16)
    L, err = cc.lyapunov_grid("N", golden(), zs, [3.0], samples=samples, seed=seed)
    dev = np.abs(L[:, 0] - 6 * np.pi)
    return dev.max() < 0.02, {"max_abs_dev": dev.max(), "max_err": err.max()}


def check_large_eps(samples: int = 256, seed: int = 0) -> CheckResult:
    return _timed("large_eps", 120.0, _large_eps, samples, seed)


# --- 4 -------------------------------------------------------------------


def _n_to_m(samples, seed):
    zs = np.exp(2j * np.pi * np.array([0.05, 0.3, 0.55, 0.8]))
    eps = np.array([0.25, 0.5])
    LN, eN = cc.lyapunov_grid("N", golden(), zs, eps, samples=samples, seed=seed)
    LM, eM = cc.lyapunov_grid("M", golden(), zs, eps, samples=samples, seed=seed)
    gap = np.abs(LN - LM - 2 * np.pi * eps[None, :])
    tol = 2 * (eN + eM)
    return bool(np.all(gap < tol)), {"max_gap": gap.max(), "min_tolerance": tol.min()}


def check_n_to_m(samples: int = 256, seed: int = 0) -> CheckResult:
    return _timed("n_to_m", 120.0, _n_to_m, samples, seed)


# --- 5 -------------------------------------------------------------------


def criticality_points(beta=None):
    beta = beta or golden()
    on = sp.nested_spectrum_points(beta, 21, 233, 8)
    est = sp.rational_spectrum(13, 21)
    off = sp.gap_midpoints(est, 8)
    return on, off, est


def _criticality(samples, seed):
    beta = golden()
    on, off, est = criticality_points(beta)
    eps = np.round(np.linspace(0.0, 1.0, 11), 12)
    z_on = np.exp(2j * np.pi * on)
    L, err = cc.lyapunov_grid("N", beta, z_on, eps, samples=samples, seed=seed)
    dev = np.abs(L - 2 * np.pi * eps[None, :])
    prof_ok = bool(np.all(dev < 0.05 + err))
    acc_on = [cc.acceleration(beta, z, samples=samples, seed=seed) for z in z_on]
    z_off = np.exp(2j * np.pi * off)
    L0, _ = cc.lyapunov_grid("N", beta, z_off, [0.0], samples=samples, seed=seed)
    acc_off = [cc.acceleration(beta, z, samples=samples, seed=seed) for z in z_off]
    ok = (prof_ok and all(a.omega_rounded == 1 for a in acc_on)
          and bool(np.all(L0[:, 0] > 0.02)) and all(a.omega_rounded == 0 for a in acc_off))
    return ok, {
        "on_angles": on, "on_max_dev": dev.max(axis=1), "on_omega": [a.omega for a in acc_on],
        "off_angles": off, "off_distance": sp.distance_to_spectrum(est, off, angle_input=True),
        "off_L0": L0[:, 0], "off_omega": [a.omega for a in acc_off],
    }


def check_criticality(samples: int = 256, seed: int = 0) -> CheckResult:
    return _timed("criticality", 900.0, _criticality, samples, seed)


# --- 6 -------------------------------------------------------------------


def _quantization(points, samples, seed):
    rng = np.random.default_rng(seed + 6)
    beta = golden()
    ang = rng.random(points)
    eps = rng.uniform(0.0, 1.0, points)
    res = [cc.acceleration(beta, np.exp(2j * np.pi * a), e, samples=samples, seed=seed) for a, e in zip(ang, eps)]
    resolved = [r for r in res if r.resolved]
    dev = [abs(r.omega - r.omega_rounded) for r in resolved]
    vals = sorted({r.omega_rounded for r in resolved})
    ok = (len(resolved) >= points // 2 and max(dev, default=1.0) < 0.1 and set(vals) <= {0, 1})
    return ok, {"points": points, "resolved": len(resolved), "max_dev": max(dev, default=float("nan")),
                "rounded_values": vals, "unresolved_eps": [float(e) for e, r in zip(eps, res) if not r.resolved]}


def check_quantization(points: int = 64, samples: int = 256, seed: int = 0) -> CheckResult:
    return _timed("quantization", 900.0, _quantization, points, samples, seed)


# --- 7 -------------------------------------------------------------------


def _measure_trend():
    beta = golden()
    rows = []
    for q in (5, 8, 13, 21, 34):
        p = dict((qq, pp) for pp, qq in beta.convergents)[q]
        m, u = sp.measure_estimate(sp.rational_spectrum(p, q))
        rows.append((p, q, m, u))
    m = [r[2] for r in rows]
    u = [r[3] for r in rows]
    strict = all(b < a for a, b in zip(m, m[1:]))
    within = all(b - u2 < a + u1 for a, b, u1, u2 in zip(m, m[1:], u, u[1:]))
    ok = within and m[-1] < m[0]
    return ok, {"rows": rows, "strictly_decreasing_nominal": strict, "decreasing_within_uncertainty": within}


def check_measure_trend() -> CheckResult:
    return _timed("measure_trend", 600.0, _measure_trend)


# --- 8 -------------------------------------------------------------------


def ds_agreement(p: int, q: int, points: int = 256):
    est = sp.rational_spectrum(p, q)
    ang = (np.arange(points) + 0.5) / points
    res = cc.dominated_splitting_scan(rational_frequency(p, q), np.exp(2j * np.pi * ang))
    inside = sp.distance_to_spectrum(est, ang, angle_input=True) == 0.0
    v = np.array([r.verdict.value for r in res])
    agree = np.where(inside, v != "DS", v == "DS")
    return float(agree.mean()), float(np.mean(v == "UNDECIDED")), res, inside


def _ds():
    out, ok = {}, True
    for p, q in ((3, 5), (5, 8)):
        agree, und, _, _ = ds_agreement(p, q)
        out[f"{p}/{q}"] = {"agreement": agree, "undecided": und}
        ok = ok and agree >= 0.95 and und <= 0.10
    far = cc.dominated_splitting_check(golden(), 2.0)
    out["z=2"] = far.verdict.value
    return ok and far.verdict is cc.Verdict.DS, out


def check_ds() -> CheckResult:
    return _timed("dominated_splitting", 600.0, _ds)


# --- 9 -------------------------------------------------------------------


def _duality(theta):
    beta = golden()
    runs = [truncation_duality(beta, theta, L) for L in (64, 128, 256)]
    up = [r["median_up"] for r in runs]
    dn = [r["median_down"] for r in runs]
    strict = all(b < a for seq in (up, dn) for a, b in zip(seq, seq[1:]))
    bound_ok = all(r["all_within_bound"] for r in runs)
    return strict and bound_ok, {
        "sizes": [r["size"] for r in runs], "median_up": up, "median_down": dn,
        "bulk_up": [r["bulk_up"] for r in runs], "bound_ok": bound_ok,
        "step_ratios": [b / a for a, b in zip(up, up[1:])],
    }


def check_duality(theta: float = 0.1) -> CheckResult:
    return _timed("duality", 300.0, _duality, theta)


# --- 10 ------------------------------------------------------------------


def _symmetry(q_max, bins):
    bf = sp.butterfly(q_max, angle_bins=bins)
    sym = [sp.is_symmetric(e) for e in bf.estimates]
    index = {pq: i for i, pq in enumerate(bf.beta_axis)}
    mirror_ok = True
    for (p, q), i in index.items():
        j = index[(q - p, q)]
        a, b = bf.bitmap[i], bf.bitmap[j]
        da = a | np.roll(a, 1) | np.roll(a, -1)
        db = b | np.roll(b, 1) | np.roll(b, -1)
        mirror_ok &= bool(np.all(a <= db) and np.all(b <= da))
    full = bool(bf.bitmap[0].all())
    return all(sym) and mirror_ok and full, {"rows": len(bf.beta_axis), "all_symmetric": all(sym),
                                              "mirror_rows_agree": mirror_ok, "row_0_full": full}


def check_symmetry(q_max: int = 8, bins: int = 512) -> CheckResult:
    return _timed("symmetry", 300.0, _symmetry, q_max, bins)


# --- 11 ------------------------------------------------------------------


def _cos_product(samples):
    beta = golden()
    th = (np.arange(samples) + 0.5) / samples
    qs = [q for q in beta.denominators if q <= 34]
    per_q = {q: float(np.exp(cos_product_log(beta, th, q)).max()) for q in qs}
    C0 = max(per_q.values())
    return all(math.isfinite(v) for v in per_q.values()), {"C0": C0, "max_per_q": per_q}


def check_cos_product(samples: int = 64) -> CheckResult:
    return _timed("cos_product", 1.0, _cos_product, samples)


SUITES = {
    "logcos": check_logcos,
    "identities": check_identities,
    "large_eps": check_large_eps,
    "n_to_m": check_n_to_m,
    "criticality": check_criticality,
    "quantization": check_quantization,
    "measure_trend": check_measure_trend,
    "dominated_splitting": check_ds,
    "duality": check_duality,
    "symmetry": check_symmetry,
    "cos_product": check_cos_product,
}
