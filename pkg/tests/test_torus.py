import math
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from uamo.torus import (
    GOLDEN, CosProduct, cf_approximants, coin, cos_product, cos_product_log, golden,
    logcos_closed_form, logcos_integral, rational_frequency, reduce, reduce_array, rotation, silver,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def circ(a, b):
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


@pytest.mark.parametrize("x, expected", [(1.25, 0.25), (-0.25, 0.75), (0.0, 0.0)])
def test_reduce_examples(x, expected):
    assert reduce(x) == expected


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_reduce_rejects_nonfinite(bad):
    with pytest.raises(ValueError):
        reduce(bad)


def test_reduce_tiny_negative_stays_below_one():
    assert reduce(-1e-18) == 0.0
    assert np.all(reduce_array([-1e-18, 2.5]) < 1.0)


@given(finite, finite)
def test_reduce_additive(a, b):
    assert 0.0 <= reduce(a + b) < 1.0
    assert circ(reduce(a + b), reduce(reduce(a) + reduce(b))) < 1e-9 * max(1.0, abs(a) + abs(b))


def test_golden_denominators_fibonacci():
    f = cf_approximants(GOLDEN, 6)
    assert f.denominators[:6] == [1, 2, 3, 5, 8, 13]


def test_one_third_terminates():
    f = cf_approximants(1 / 3, 3)
    assert f.rational and f.convergents[-1] == (1, 3)


def _decimal_cf(value: Decimal, count: int):
    # independent oracle: exact CF of a high-precision decimal
    fr = Fraction(value)
    out = []
    p0, q0, p1, q1 = 1, 0, 0, 1
    x = fr
    for _ in range(count):
        x = 1 / x
        a = math.floor(x)
        x -= a
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        out.append((p1, q1))
    return out


def test_silver_against_decimal_oracle():
    getcontext().prec = 60
    oracle = _decimal_cf(Decimal(2).sqrt() - 1, 4)
    f = cf_approximants(math.sqrt(2) - 1, 4)
    assert f.convergents[:4] == tuple(oracle)
    assert f.denominators[:4] == [2, 5, 12, 29]
    assert silver(6).convergents == tuple(_decimal_cf(Decimal(2).sqrt() - 1, 6))


def test_golden_exact_expansion_matches_decimal_oracle():
    getcontext().prec = 80
    oracle = _decimal_cf((Decimal(5).sqrt() - 1) / 2, 25)
    assert golden(25).convergents == tuple(oracle)


@pytest.mark.parametrize("beta", [0.0, 1.0, -0.2, 1.5])
def test_cf_rejects_out_of_range(beta):
    with pytest.raises(ValueError):
        cf_approximants(beta, 3)


@settings(max_examples=60)
@given(st.floats(0.001, 0.999))
def test_cf_invariants(beta):
    f = cf_approximants(beta, 8)
    convs = list(f.convergents)
    pp, qp, pc, qc = 1, 0, 0, 1
    for a, (p, q) in zip(f.cf_terms, convs):
        pp, pc = pc, a * pc + pp
        qp, qc = qc, a * qc + qp
        assert (p, q) == (pc, qc)
        assert math.gcd(p, q) == 1
    for (p, q), (_, q2) in zip(convs, convs[1:]):
        assert abs(beta - p / q) < 1.0 / (q * q2) + 1e-15
    signs = [np.sign(p / q - beta) for p, q in convs if p / q != beta]
    assert all(s1 != s2 for s1, s2 in zip(signs, signs[1:]))


def test_rational_frequency_exact():
    f = rational_frequency(8, 13)
    assert f.rational and f.convergents[-1] == (8, 13)
    assert rational_frequency(0, 1).convergents == ((0, 1),)


@pytest.mark.parametrize("beta, theta, n, expected", [
    (0.3, 0.0, 0, [[1, 0], [0, 1]]),
    (0.3, 0.25, 0, [[0, -1], [1, 0]]),
    (0.125, 0.0, 2, [[0, -1], [1, 0]]),
])
def test_coin_examples(beta, theta, n, expected):
    assert np.allclose(coin(beta, theta, n).matrix, expected, atol=1e-15)


@given(st.floats(0, 1), st.floats(-10, 10), st.integers(-10**6, 10**6))
def test_coin_is_rotation(beta, theta, n):
    m = coin(beta, theta, n).matrix
    assert abs(np.linalg.det(m) - 1) < 1e-12
    assert np.linalg.norm(m.T @ m - np.eye(2)) < 1e-12


def test_rotation_broadcasts():
    assert rotation(np.zeros((3, 4))).shape == (3, 4, 2, 2)


@pytest.mark.parametrize("eps", [0.0, 0.1, -0.1, 0.5, -0.5, 2.0, -2.0])
def test_logcos_closed_form(eps):
    assert abs(logcos_integral(eps) - logcos_closed_form(eps)) < 1e-6


def test_logcos_examples():
    assert logcos_integral(0.0) == pytest.approx(-0.693147, abs=1e-6)
    assert logcos_integral(0.5) == pytest.approx(2.448445, abs=1e-6)
    assert logcos_integral(-0.5) == pytest.approx(logcos_integral(0.5), abs=1e-12)


@pytest.mark.parametrize("eps", [0.05, 0.3])
def test_logcos_against_adaptive_quadrature(eps):
    f = lambda t: 0.5 * math.log(math.cos(2 * math.pi * t) ** 2 + math.sinh(2 * math.pi * eps) ** 2)
    ref, _ = scipy.integrate.quad(f, 0, 1, points=[0.25, 0.75], limit=200, epsabs=1e-13)
    assert abs(logcos_integral(eps) - ref) < 1e-9


def test_cos_product_examples():
    assert cos_product(golden(), 0.0, 1) == CosProduct(2.0, False)
    assert cos_product(golden(), 0.25, 1) == CosProduct(0.0, True)
    with pytest.raises(ValueError):
        cos_product(golden(), 0.0, 0)


@given(st.floats(0, 1), st.integers(1, 40))
def test_cos_product_half_shift(theta, k):
    b = golden()
    a, c = cos_product(b, theta, k), cos_product(b, theta + 0.5, k)
    assert a.degenerate == c.degenerate
    assert c.value == pytest.approx(a.value, rel=1e-9, abs=1e-300)


def test_cos_product_log_matches_scalar():
    b = golden()
    th = np.array([0.1, 0.37])
    logs = cos_product_log(b, th, 13)
    for t, lv in zip(th, logs):
        assert math.exp(lv) == pytest.approx(cos_product(b, t, 13).value, rel=1e-12)


def test_cos_product_bounded_along_convergents():
    # the bound is empirical; record it and make sure it does not blow up with q
    b = golden()
    vals = [cos_product(b, 0.0, q).value for q in (5, 8, 13, 21, 34)]
    C0 = max(vals)
    assert all(np.isfinite(vals)) and C0 < 2 ** 5


def test_cf_rejects_frequency_below_resolution():
    with pytest.raises(ValueError):
        cf_approximants(1e-300, 3)
