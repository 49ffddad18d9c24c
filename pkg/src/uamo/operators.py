"""Finite unitary realisations of the quasi-periodic walk operator.

Basis convention: global index ``2m`` is ``delta_m (x) e_up`` and ``2m+1`` is
``delta_m (x) e_down``. One update step sends

    up_n   -> c11_n up_{n+1} + c21_n down_{n-1}
    down_n -> c12_n up_{n+1} + c22_n down_{n-1}

with ``C_n = R_{2 pi (n beta + theta)}``.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .torus import Frequency, as_frequency, coin_angles, rational_frequency, reduce, reduce_array

log = logging.getLogger(__name__)

UNITARITY_TOL = 1e-10


# ---------------------------------------------------------------------------
# walk states and the update rule
# ---------------------------------------------------------------------------


@dataclass
class WalkState:
    """Finitely supported state; ``amplitudes[j] = (psi_up, psi_down)`` at site ``n_min + j``."""

    n_min: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1, 2)

    @property
    def n_max(self) -> int:
        return self.n_min + len(self.amplitudes) - 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def basis(cls, site: int, spin: int) -> "WalkState":
        amp = np.zeros((1, 2), dtype=complex)
        amp[0, spin] = 1.0
        return cls(site, amp)

    @classmethod
    def from_vector(cls, vec, first_global: int) -> "WalkState":
        """Wrap a vector in global basis indices ``first_global, first_global+1, ...``."""
        vec = np.asarray(vec, dtype=complex)
        lo = first_global - (first_global % 2)
        pad_front = first_global - lo
        full = np.concatenate([np.zeros(pad_front, complex), vec])
        if len(full) % 2:
            full = np.concatenate([full, [0.0]])
        return cls(lo // 2, full.reshape(-1, 2))

    def to_vector(self, first_global: int, size: int) -> np.ndarray:
        out = np.zeros(size, dtype=complex)
        flat = self.amplitudes.reshape(-1)
        g0 = 2 * self.n_min
        for i, val in enumerate(flat):
            j = g0 + i - first_global
            if 0 <= j < size:
                out[j] = val
            elif val != 0:
                raise ValueError("state not supported inside the requested window")
        return out


def coin_entries(beta, theta: float, sites):
    """Return ``(c11, c12, c21, c22)`` arrays of the rotation coins at ``sites``."""
    ang = 2.0 * np.pi * coin_angles(beta, theta, sites)
    c, s = np.cos(ang), np.sin(ang)
    return c, -s, s, c


def apply_update(beta, theta: float, state: WalkState) -> WalkState:
    """One step of the doubly infinite walk on a finitely supported state."""
    beta = as_frequency(beta)
    sites = state.sites
    c11, c12, c21, c22 = coin_entries(beta, theta, sites)
    up, dn = state.amplitudes[:, 0], state.amplitudes[:, 1]
    out = np.zeros((len(sites) + 2, 2), dtype=complex)
    # row j of out is site n_min - 1 + j
    out[2:, 0] = c11 * up + c12 * dn
    out[:-2, 1] = c21 * up + c22 * dn
    return WalkState(state.n_min - 1, out)


# ---------------------------------------------------------------------------
# operator specs
# ---------------------------------------------------------------------------


@dataclass
class OperatorSpec:
    """A finite unitary matrix together with how it was built.

    ``first_index`` is the global basis index of row/column 0, so for
    truncations the matrix acts on global indices
    ``first_index .. first_index + size - 1``.
    """

    kind: str
    beta: Frequency
    theta: float
    matrix: np.ndarray = field(repr=False)
    first_index: int = 0
    bloch_phase: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n) or n % 2:
            raise ValueError(f"operator matrix must be square of even size, got {self.matrix.shape}")
        defect = unitarity_defect(self.matrix)
        if defect > UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary (defect {defect:.3e})")
        self.meta.setdefault("unitarity_defect", defect)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def descriptor(self) -> dict:
        b = self.beta
        if b.rational and b.convergents:
            p, q = b.convergents[-1]
            beta_repr = {"p": p, "q": q}
        else:
            beta_repr = {"decimal": repr(b.value)}
        d = {
            "kind": self.kind,
            "beta": beta_repr,
            "theta": self.theta,
            "size": self.size,
            "first_index": self.first_index,
            "k": self.bloch_phase,
            "dtype": "complex128",
            "byteorder": "little",
            "order": "column-major",
        }
        extra = {k: v for k, v in self.meta.items() if _jsonable(v)}
        if extra:
            d["meta"] = extra
        return d

    def save(self, stem: str) -> tuple[str, str]:
        """Write ``<stem>.json`` and the raw column-major blob ``<stem>.bin``."""
        js, blob = stem + ".json", stem + ".bin"
        with open(js, "w", encoding="utf-8") as fh:
            json.dump(self.descriptor(), fh, indent=2)
        with open(blob, "wb") as fh:
            fh.write(np.asfortranarray(self.matrix).astype("<c16").tobytes(order="F"))
        return js, blob

    @classmethod
    def load(cls, stem: str) -> "OperatorSpec":
        with open(stem + ".json", encoding="utf-8") as fh:
            d = json.load(fh)
        n = d["size"]
        raw = np.fromfile(stem + ".bin", dtype="<c16")
        mat = raw.reshape((n, n), order="F")
        b = d["beta"]
        beta = rational_frequency(b["p"], b["q"]) if "q" in b else as_frequency(float(b["decimal"]))
        return cls(d["kind"], beta, d["theta"], mat, d.get("first_index", 0), d.get("k"), dict(d.get("meta", {})))


def _jsonable(v) -> bool:
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def unitarity_defect(m: np.ndarray) -> float:
    n = m.shape[0]
    return float(np.linalg.norm(m @ m.conj().T - np.eye(n), ord=2))


# ---------------------------------------------------------------------------
# decoupled truncations
# ---------------------------------------------------------------------------


def _sin_sign(beta, theta, n) -> float:
    x = coin_angles(beta, theta, [n])[0]
    if x == 0.0 or x == 0.5:
        return 0.0
    return float(np.sign(np.sin(2.0 * np.pi * x)))


def build_decoupled_truncation(beta, theta: float, site_range: tuple[int, int]) -> OperatorSpec:
    """Unitary block between two decoupling sites ``a < b``.

    The coins at ``a`` and ``b`` are replaced by ``[[0, -s], [s, 0]]`` with
    ``s = sgn(sin 2 pi (n beta + theta))``. The span of
    ``down_a, up_{a+1}, down_{a+1}, ..., up_b`` (global indices ``2a+1..2b``)
    is then invariant and the block has size ``2(b - a)``. A cut whose sine
    vanishes exactly is moved one site outward and reported in ``meta``.
    """
    beta = as_frequency(beta)
    theta = reduce(theta)
    a, b = int(site_range[0]), int(site_range[1])
    if b - a < 1:
        raise ValueError("site_range must cover at least two sites")
    shifted = []
    while _sin_sign(beta, theta, a) == 0.0:
        shifted.append(("left", a))
        a -= 1
    while _sin_sign(beta, theta, b) == 0.0:
        shifted.append(("right", b))
        b += 1
    for side, n in shifted:
        log.info("decoupling site %d (%s) has sin = 0; cut moved outward", n, side)

    size = 2 * (b - a)
    first = 2 * a + 1
    sites = np.arange(a, b + 1)
    c11, c12, c21, c22 = coin_entries(beta, theta, sites)
    sa, sb = _sin_sign(beta, theta, a), _sin_sign(beta, theta, b)
    c11[0], c12[0], c21[0], c22[0] = 0.0, -sa, sa, 0.0
    c11[-1], c12[-1], c21[-1], c22[-1] = 0.0, -sb, sb, 0.0
    U = _walk_matrix(sites, c11, c12, c21, c22, first, size)
    meta = {"cut_sites": [a, b], "shifted_cuts": [list(s) for s in shifted], "sign_coins": [sa, sb]}
    return OperatorSpec("decoupled_truncation", beta, theta, U, first, None, meta)


def _walk_matrix(sites, c11, c12, c21, c22, first, size):
    U = np.zeros((size, size), dtype=complex)
    for n, e11, e12, e21, e22 in zip(sites, c11, c12, c21, c22):
        for spin, (to_up, to_dn) in ((0, (e11, e21)), (1, (e12, e22))):
            col = 2 * n + spin - first
            if not 0 <= col < size:
                continue
            r_up, r_dn = 2 * (n + 1) - first, 2 * (n - 1) + 1 - first
            if to_up != 0:
                U[r_up, col] += to_up
            if to_dn != 0:
                U[r_dn, col] += to_dn
    return U


def interior_columns(op: OperatorSpec) -> list[int]:
    """Local column indices whose sites carry unmodified coins."""
    a, b = op.meta["cut_sites"]
    return [2 * n + s - op.first_index for n in range(a + 1, b) for s in (0, 1)]


# ---------------------------------------------------------------------------
# Floquet blocks
# ---------------------------------------------------------------------------


def build_floquet_block(p: int, q: int, theta: float, k: float) -> OperatorSpec:
    """Restriction of the period-``q`` walk to Bloch waves ``psi_{n+q} = e^{2 pi i k} psi_n``."""
    if q <= 0 or math.gcd(p, q) != 1:
        raise ValueError("need q > 0 and gcd(p, q) = 1")
    beta = rational_frequency(p, q)
    U = floquet_matrices(p, q, np.array([theta]), np.array([k]))[0, 0]
    return OperatorSpec("floquet_block", beta, reduce(theta), U, 0, reduce(k), {"p": p, "q": q})


def floquet_matrices(p: int, q: int, thetas, ks) -> np.ndarray:
    """Stack of Floquet blocks with shape ``(len(thetas), len(ks), 2q, 2q)``."""
    thetas = np.atleast_1d(np.asarray(thetas, float))
    ks = np.atleast_1d(np.asarray(ks, float))
    n = np.arange(q)
    ang = 2.0 * np.pi * reduce_array((np.mod(n * p, q) / q)[None, :] + thetas[:, None])  # (T, q)
    c, s = np.cos(ang), np.sin(ang)
    c11, c12, c21, c22 = c, -s, s, c
    T, K = len(thetas), len(ks)
    U = np.zeros((T, K, 2 * q, 2 * q), dtype=complex)
    fwd = np.exp(-2j * np.pi * ks)  # crossing q-1 -> 0 to the right
    bwd = np.exp(2j * np.pi * ks)  # crossing 0 -> q-1 to the left
    one = np.ones(K, complex)
    for m in range(q):
        right = (m + 1) % q
        left = (m - 1) % q
        ph_r = fwd if m + 1 == q else one
        ph_l = bwd if m == 0 else one
        for spin, (e_up, e_dn) in ((0, (c11, c21)), (1, (c12, c22))):
            col = 2 * m + spin
            U[:, :, 2 * right, col] += e_up[:, m, None] * ph_r[None, :]
            U[:, :, 2 * left + 1, col] += e_dn[:, m, None] * ph_l[None, :]
    return U


# ---------------------------------------------------------------------------
# generalised CMV operators from coin-field pairs
# ---------------------------------------------------------------------------


@dataclass
class CoinFieldPair:
    """Two maps ``T -> iSU(2)``, ``[[conj(alpha), rho], [conj(rho), -alpha]]``.

    The callables take an array of (possibly complex) torus points and return
    an array of 2x2 matrices. For complex arguments they should return the
    analytic continuation of the real-axis entries.
    """

    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    def check(self, xs, tol: float = 1e-12) -> dict:
        xs = np.atleast_1d(np.asarray(xs, float))
        worst = {"norm": 0.0, "det": 0.0, "rho_zero": False}
        for fn in (self.f, self.g):
            m = fn(xs)
            alpha = -m[..., 1, 1]
            rho = m[..., 0, 1]
            worst["norm"] = max(worst["norm"], float(np.max(np.abs(np.abs(alpha) ** 2 + np.abs(rho) ** 2 - 1))))
            worst["det"] = max(worst["det"], float(np.max(np.abs(np.linalg.det(m) + 1))))
            worst["rho_zero"] = worst["rho_zero"] or bool(np.any(np.abs(rho) == 0))
        if worst["norm"] > tol or worst["det"] > 1e-10:
            raise ValueError(f"coin fields are not iSU(2)-valued: {worst}")
        return worst


def walk_fields() -> CoinFieldPair:
    """The pair reproducing the rotation-coin walk: ``f = [[0,1],[1,0]]``,
    ``g(x) = [[sin, cos], [cos, -sin]](2 pi x)``."""

    def f(x):
        x = np.asarray(x)
        out = np.zeros(x.shape + (2, 2), dtype=complex)
        out[..., 0, 1] = 1.0
        out[..., 1, 0] = 1.0
        return out

    def g(x):
        a = 2.0 * np.pi * np.asarray(x)
        s, c = np.sin(a), np.cos(a)
        return np.stack([np.stack([s, c], -1), np.stack([c, -s], -1)], -2).astype(complex)

    return CoinFieldPair(f, g, "walk")


def constant_fields(alpha_f: complex = 0.0, alpha_g: complex = 0.0) -> CoinFieldPair:
    def const(alpha):
        rho = math.sqrt(max(0.0, 1.0 - abs(alpha) ** 2))
        m = np.array([[np.conj(alpha), rho], [rho, -alpha]], dtype=complex)

        def fn(x):
            return np.broadcast_to(m, np.shape(x) + (2, 2)).copy()

        return fn

    return CoinFieldPair(const(alpha_f), const(alpha_g), "constant")


def _unit(v: complex) -> complex:
    return v / abs(v) if v != 0 else 1.0 + 0j


def build_generalized_cmv(pair: CoinFieldPair, base_point: float, beta, site_range: tuple[int, int]) -> OperatorSpec:
    """Finite section of ``E_x = L_x M_x`` on global indices ``2a+1 .. 2b``.

    ``L_x`` has blocks ``f(x + k beta)`` on index pairs ``(2k-1, 2k)`` and
    ``M_x`` blocks ``g(x + k beta)`` on ``(2k-2, 2k-1)``. The two ``M``
    blocks cut by the window are replaced by the unimodular diagonal entries
    ``alpha / |alpha|`` (the sign-coin decoupling); with the walk fields and
    ``x = theta - beta`` this is exactly :func:`build_decoupled_truncation`.
    """
    beta = as_frequency(beta)
    a, b = int(site_range[0]), int(site_range[1])
    if b - a < 1:
        raise ValueError("site_range must cover at least two sites")
    first = 2 * a + 1
    size = 2 * (b - a)
    bval = beta.value

    ks = np.arange(a + 1, b + 1)
    fm = pair.f(base_point + ks * bval)  # L blocks for k = a+1..b
    # M block for site n sits on (2n, 2n+1) and equals g(x + (n+1) beta)
    ns = np.arange(a, b + 1)
    gm = pair.g(base_point + (ns + 1) * bval)
    pair.check(np.concatenate([reduce_array(base_point + ks * bval), reduce_array(base_point + (ns + 1) * bval)]))

    L = np.zeros((size, size), dtype=complex)
    for k, blk in zip(ks, fm):
        i = 2 * k - 1 - first
        L[i : i + 2, i : i + 2] = blk
    M = np.zeros((size, size), dtype=complex)
    for n, blk in zip(ns, gm):
        i = 2 * n - first
        if n == a:
            M[0, 0] = _unit(blk[1, 1])
        elif n == b:
            M[size - 1, size - 1] = _unit(blk[0, 0])
        else:
            M[i : i + 2, i : i + 2] = blk
    rho_zero = bool(np.any(np.abs(gm[1:-1, 0, 1]) == 0) or np.any(np.abs(fm[:, 0, 1]) == 0))
    meta = {"cut_sites": [a, b], "base_point": float(base_point), "rho_zero_inside": rho_zero, "fields": pair.name}
    op = OperatorSpec("generalized_cmv", beta, reduce(base_point), L @ M, first, None, meta)
    op.meta_L, op.meta_M = L, M  # kept for factorisation checks
    return op
