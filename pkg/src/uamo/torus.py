"""Arithmetic on the circle T = R/Z, continued fractions, rotation coins and
the elementary log-cos / cosine-product quantities.

Angles on the torus are measured in full turns, so a point ``x`` of T
corresponds to the rotation angle ``2*pi*x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

# Plain floats in [0, 1) play the role of torus points.
TorusPoint = float

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SILVER = math.sqrt(2.0) - 1.0

_CF_RESIDUAL_TOL = 1e-13
_CF_QUOTIENT_MAX = 1e12


def reduce(x: float) -> TorusPoint:
    """Reduce ``x`` modulo 1 into ``[0, 1)``."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot reduce non-finite value {x!r}")
    r = x % 1.0
    # -1e-17 % 1.0 == 1.0 in floating point
    if r >= 1.0:
        r = 0.0
    return r


def reduce_array(x):
    """Vectorised :func:`reduce` for numpy arrays."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot reduce non-finite values")
    r = np.mod(x, 1.0)
    r[r >= 1.0] = 0.0
    return r


@dataclass(frozen=True)
class Frequency:
    """A rotation number together with its continued-fraction data.

    ``cf_terms`` holds the partial quotients ``a_1, a_2, ...`` of
    ``value = [0; a_1, a_2, ...]`` and ``convergents`` the matching
    ``(p_n, q_n)`` starting from ``p_1/q_1 = 1/a_1``.
    """

    value: float
    cf_terms: tuple[int, ...] = ()
    convergents: tuple[tuple[int, int], ...] = ()
    rational: bool = False

    @property
    def denominators(self) -> list[int]:
        return [q for _, q in self.convergents]

    def convergent_below(self, qmax: int) -> tuple[int, int]:
        """Largest stored convergent whose denominator does not exceed ``qmax``."""
        best = None
        for p, q in self.convergents:
            if q <= qmax:
                best = (p, q)
        if best is None:
            raise ValueError(f"no convergent with denominator <= {qmax}")
        return best

    def label(self) -> str:
        if self.rational and self.convergents:
            p, q = self.convergents[-1]
            return f"{p}/{q}"
        return repr(self.value)


def cf_approximants(beta: float, count: int) -> Frequency:
    """Continued-fraction expansion of ``beta`` in (0, 1) via the Gauss map.

    At least ``count`` convergents are returned unless ``beta`` is detected to
    be rational (residual below 1e-13 or a partial quotient above 1e12), in
    which case the expansion stops at the exact value and ``rational`` is set.
    """
    beta = float(beta)
    if not (0.0 < beta < 1.0):
        raise ValueError(f"frequency must lie in (0, 1), got {beta!r}")
    if count < 1:
        raise ValueError("count must be >= 1")

    terms: list[int] = []
    convs: list[tuple[int, int]] = []
    p_prev, q_prev = 1, 0  # p_{-1}, q_{-1}
    p_cur, q_cur = 0, 1  # p_0, q_0 (a_0 = 0)
    x = beta
    rational = False
    while len(convs) < count:
        inv = 1.0 / x
        if inv > _CF_QUOTIENT_MAX:
            if not convs:
                raise ValueError(f"frequency {beta!r} is indistinguishable from 0")
            rational = True
            break
        a = math.floor(inv)
        resid = inv - a
        # float noise can push the residual to just below 1
        if 1.0 - resid < _CF_RESIDUAL_TOL:
            a += 1
            resid = 0.0
        terms.append(int(a))
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        convs.append((int(p_cur), int(q_cur)))
        # second clause: p/q is already the double nearest to beta
        if resid < _CF_RESIDUAL_TOL or p_cur / q_cur == beta:
            rational = True
            break
        x = resid
    return Frequency(beta, tuple(terms), tuple(convs), rational)


def rational_frequency(p: int, q: int) -> Frequency:
    """Exact continued fraction of ``p/q`` computed with integer arithmetic."""
    if q <= 0:
        raise ValueError("denominator must be positive")
    g = math.gcd(p, q)
    p, q = p // g, q // g
    if p == 0:
        return Frequency(0.0, (), ((0, 1),), True)
    if p == q:
        return Frequency(1.0, (1,), ((1, 1),), True)
    if not 0 < p < q:
        raise ValueError("p/q must lie in [0, 1]")
    terms = []
    num, den = q, p  # 1/(p/q)
    pp, qp, pc, qc = 1, 0, 0, 1
    convs = []
    while den:
        a, r = divmod(num, den)
        terms.append(a)
        pp, pc = pc, a * pc + pp
        qp, qc = qc, a * qc + qp
        convs.append((pc, qc))
        num, den = den, r
    return Frequency(p / q, tuple(terms), tuple(convs), True)


def golden(count: int = 30) -> Frequency:
    """Golden-mean frequency (sqrt(5)-1)/2 = [0; 1, 1, 1, ...]."""
    return _periodic_cf(GOLDEN, 1, count)


def silver(count: int = 25) -> Frequency:
    """Silver-mean frequency sqrt(2)-1 = [0; 2, 2, 2, ...]."""
    return _periodic_cf(SILVER, 2, count)


def _periodic_cf(value: float, a: int, count: int) -> Frequency:
    # exact expansion; the Gauss map loses the tail of these after ~35 terms
    pp, qp, pc, qc = 1, 0, 0, 1
    convs = []
    for _ in range(count):
        pp, pc = pc, a * pc + pp
        qp, qc = qc, a * qc + qp
        convs.append((pc, qc))
    return Frequency(value, (a,) * count, tuple(convs), False)


def as_frequency(beta) -> Frequency:
    """Accept a :class:`Frequency`, a float or a ``(p, q)`` pair."""
    if isinstance(beta, Frequency):
        return beta
    if isinstance(beta, tuple):
        return rational_frequency(*beta)
    beta = float(beta)
    if beta == 0.0:
        return rational_frequency(0, 1)
    return cf_approximants(beta, 20)


@dataclass(frozen=True)
class Coin:
    angle: TorusPoint
    matrix: np.ndarray = field(repr=False)


def rotation(angle):
    """Counterclockwise rotation matrix through ``2*pi*angle``; broadcasts."""
    a = 2.0 * np.pi * np.asarray(angle, dtype=float)
    c, s = np.cos(a), np.sin(a)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def coin(beta, theta: float, n: int) -> Coin:
    """The coin ``R_{2 pi (n beta + theta)}`` at site ``n``."""
    b = beta.value if isinstance(beta, Frequency) else float(beta)
    angle = reduce(n * b + theta)
    return Coin(angle, rotation(angle))


def coin_angles(beta, theta: float, sites) -> np.ndarray:
    """Coin angles ``n*beta + theta`` (mod 1) for an array of sites.

    For a rational :class:`Frequency` the product ``n*p`` is reduced exactly
    in integers before dividing, so periodic coin fields are bit-periodic.
    """
    sites = np.asarray(sites, dtype=np.int64)
    if isinstance(beta, Frequency) and beta.rational and beta.convergents:
        p, q = beta.convergents[-1]
        return reduce_array(np.mod(sites * p, q) / q + theta)
    b = beta.value if isinstance(beta, Frequency) else float(beta)
    return reduce_array(sites * b + theta)


def logcos_integral(eps: float, order: int = 48) -> float:
    """Integral over T of ``log|cos 2 pi (theta + i eps)|``.

    The logarithmic (near-)singularities at theta = 1/4, 3/4 are removed
    analytically: on each half-period ``[a, b]`` the integrand minus
    ``1/2 log((t-a)^2 + eps^2) + 1/2 log((t-b)^2 + eps^2)`` is analytic and
    handled by Gauss-Legendre; the subtracted terms are integrated in closed
    form. Raises ``ArithmeticError`` if two rule orders disagree.
    """
    eps = float(eps)
    if not math.isfinite(eps):
        raise ValueError("eps must be finite")
    lo = _logcos_gl(eps, order)
    hi = _logcos_gl(eps, 2 * order)
    if abs(lo - hi) > 1e-10 * max(1.0, abs(hi)):
        raise ArithmeticError(f"log-cos quadrature did not converge (eps={eps})")
    return hi


def _log_abs_cos(t, eps):
    a = 2.0 * np.pi * t
    b = 2.0 * np.pi * eps
    # |cos(a + ib)|^2 = cos^2 a + sinh^2 b
    return 0.5 * np.log(np.cos(a) ** 2 + np.sinh(b) ** 2)


def _half_log_quad_antideriv(u, e):
    # antiderivative of 1/2 log(u^2 + e^2)
    if e == 0.0:
        return u * np.log(np.abs(u)) - u if u != 0 else 0.0
    return 0.5 * (u * np.log(u * u + e * e) - 2.0 * u + 2.0 * e * np.arctan(u / e))


def _logcos_gl(eps, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0
    # the two half-periods between consecutive zeros of cos(2 pi t)
    for a, b in ((-0.25, 0.25), (0.25, 0.75)):
        t = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        g = _log_abs_cos(t, eps) - 0.5 * np.log((t - a) ** 2 + eps**2) - 0.5 * np.log((t - b) ** 2 + eps**2)
        total += 0.5 * (b - a) * np.dot(weights, g)
        L = b - a
        # int_a^b 1/2 log((t-a)^2+e^2) dt == int_0^L, same for the b-term
        total += 2.0 * (_half_log_quad_antideriv(L, abs(eps)) - _half_log_quad_antideriv(0.0, abs(eps)))
    return float(total)


def logcos_closed_form(eps: float) -> float:
    return 2.0 * math.pi * abs(eps) - math.log(2.0)


class CosProduct(NamedTuple):
    value: float
    degenerate: bool


def cos_product(beta, theta: float, k: int) -> CosProduct:
    """``2^k prod_{j<k} |cos 2 pi (theta + j beta)|`` accumulated in log space.

    A factor that vanishes exactly (``theta + j beta`` reducing to 1/4 or
    3/4) gives ``CosProduct(0.0, True)``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    x = coin_angles(beta, theta, np.arange(k))
    if np.any((x == 0.25) | (x == 0.75)):
        return CosProduct(0.0, True)
    logs = np.log(2.0 * np.abs(np.cos(2.0 * np.pi * x)))
    return CosProduct(float(np.exp(np.sum(logs))), False)


def cos_product_log(beta, thetas, k: int) -> np.ndarray:
    """Vectorised ``log`` of :func:`cos_product` over many phases."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    b = beta.value if isinstance(beta, Frequency) else float(beta)
    j = np.arange(k)
    x = thetas[:, None] + j[None, :] * b
    with np.errstate(divide="ignore"):
        return np.sum(np.log(2.0 * np.abs(np.cos(2.0 * np.pi * x))), axis=1)
