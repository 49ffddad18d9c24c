import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uamo import cocycles as cc
from uamo.operators import build_generalized_cmv, walk_fields
from uamo.torus import golden, rational_frequency

B = golden()
unit_angle = st.floats(0, 1, allow_nan=False)


def test_eval_M_example():
    z = np.exp(0.6j)
    m = cc.eval_M(z, 0.0)
    assert np.allclose(m, [[1 / z, 0], [0, z]])
    assert abs(np.linalg.det(m) - 1) < 1e-14


def test_eval_M_pole():
    with pytest.raises(cc.PoleError):
        cc.eval_M(1.0, 0.25)
    with pytest.raises(ZeroDivisionError):
        cc.eval_M(1.0, 0.75)
    # off the real axis the pole is absent
    assert np.all(np.isfinite(cc.eval_M(cc.SpectralParameter(1.0, 0.1), 0.25)))


def test_eval_N_relation_to_M():
    z, x = np.exp(1.1j), 0.17
    assert np.allclose(cc.eval_N(z, x), -2j * math.cos(2 * math.pi * x) * cc.eval_M(z, x), atol=1e-14)


def test_walk_gz_product_is_M_numerator():
    z, x = np.exp(0.4j), 0.31
    s = math.sin(2 * math.pi * x)
    assert np.allclose(cc.eval_GZ(z, x), [[1 / z, -s], [-s, z]], atol=1e-14)
    with pytest.raises(ValueError):
        cc.eval_GZ(z, x, which="h")


def test_spectral_parameter_validation():
    with pytest.raises(ValueError):
        cc.SpectralParameter(0.0)
    assert cc.SpectralParameter.on_circle(0.25).unimodular
    assert not cc.SpectralParameter(2.0).unimodular


def test_kind_parse():
    assert cc.CocycleKind.parse("N") is cc.CocycleKind.N
    with pytest.raises(ValueError):
        cc.CocycleKind.parse("Q")


def test_iterate_zero_steps_is_identity():
    assert np.array_equal(cc.iterate("N", B, 1.0, 0.3, 0), np.eye(2))
    with pytest.raises(ValueError):
        cc.iterate("N", B, 1.0, 0.3, -1)


def test_iterate_matches_explicit_product():
    z, x0, n = np.exp(0.9j), 0.123, 7
    P = np.eye(2, dtype=complex)
    for j in range(n):
        P = cc.eval_N(z, x0 + j * B.value) @ P
    assert np.allclose(cc.iterate("N", B, z, x0, n), P, rtol=1e-12, atol=1e-10)


def test_det_N_product():
    # short orbit: det of a long product is far below rounding of its entries
    z, x0, n = np.exp(2.2j), 0.41, 6
    xs = x0 + np.arange(n) * B.value
    det = np.linalg.det(cc.iterate("N", B, z, x0, n))
    assert det == pytest.approx(np.prod(-4 * np.cos(2 * np.pi * xs) ** 2), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(unit_angle, unit_angle, st.integers(0, 30), st.integers(0, 30), st.floats(-0.3, 0.3))
def test_composition_law(phi, x0, n, m, eps):
    z = cc.SpectralParameter(complex(np.exp(2j * np.pi * phi)), eps)
    a, la = cc.iterate_log("N", B, z, x0, n)
    b, lb = cc.iterate_log("N", B, z, x0 + n * B.value, m)
    c, lc = cc.iterate_log("N", B, z, x0, n + m)
    lhs, rhs = (b @ a) * math.exp(la + lb - lc), c
    scale = np.abs(b) @ np.abs(a) * math.exp(la + lb - lc)
    assert np.all(np.abs(lhs - rhs) <= 1e-9 * np.maximum(scale, 1.0))


def test_gz_recursion_reproduces_cmv_eigenvector():
    x, cuts = 0.3, (-6, 10)
    op = build_generalized_cmv(walk_fields(), x, B, cuts)
    w, V = np.linalg.eig(op.matrix)
    j = int(np.argmin(np.abs(np.angle(w) - 1.0)))
    z, u = w[j], V[:, j]
    v = op.meta_M @ u / z
    start = op.first_index + 3
    i0 = start - op.first_index
    uu, vv = cc.gz_propagate(walk_fields(), x, B, z, (u[i0], v[i0]), start, 20)
    assert np.allclose(uu, u[i0:i0 + 21], atol=1e-12)
    assert np.allclose(vv, v[i0:i0 + 21], atol=1e-12)


def test_lyapunov_constant_cocycle_oracle():
    # beta = 0: the cocycle is constant along orbits, so L is the phase average
    # of log spectral radius
    b0 = rational_frequency(0, 1)
    z = np.exp(0.7j)
    th = cc.theta_samples(64, seed=3)
    rad = [np.max(np.abs(np.linalg.eigvals(cc.eval_N(z, t)))) for t in th]
    oracle = float(np.mean(np.log(rad)))
    est = cc.lyapunov("N", b0, z, n_iters=4000, samples=64, seed=3)
    assert est.value == pytest.approx(oracle, abs=5e-3)


def test_lyapunov_even_in_eps():
    z = np.exp(1.3j)
    L, _ = cc.lyapunov_grid("N", B, [z], [-0.2, 0.2], n_iters=500, samples=32)
    assert L[0, 0] == pytest.approx(L[0, 1], abs=1e-10)


def test_lyapunov_lower_bound_and_convexity():
    z = np.exp(0.2j)
    eps = np.linspace(0, 0.5, 11)
    L, _ = cc.lyapunov_grid("N", B, [z], eps, n_iters=600, samples=64)
    assert np.all(L[0] >= -1e-3)
    assert np.all(np.diff(L[0], 2) >= -5e-3)


def test_large_eps_asymptote():
    est = cc.lyapunov("N", B, cc.SpectralParameter(1.0, 2.0), n_iters=300, samples=16)
    assert est.value == pytest.approx(2 * math.pi * 2.0, abs=1e-3)


def test_profile_csv(tmp_path):
    prof = cc.lyapunov_profile(B, 1.0, [0.0, 0.1, 0.2], n_iters=100, samples=16)
    path = tmp_path / "p.csv"
    prof.to_csv(str(path), provenance={"seed": 0})
    raw = path.read_bytes()
    assert raw.startswith(b"eps,L,err,slope\r\n")
    rows = list(csv.reader(raw.decode().splitlines()))
    assert len(rows) == 4 and float(rows[1][0]) == 0.0
    assert (tmp_path / "p.csv.json").exists()


def test_acceleration_large_eps_is_one():
    acc = cc.acceleration(B, np.exp(0.5j), eps0=3.0, n_iters=200, samples=16)
    assert acc.resolved and acc.omega_rounded == 1


def test_ds_outside_circle():
    res = cc.dominated_splitting_check(B, 2.0, n_max=256)
    assert res.verdict is cc.Verdict.DS
    d = res.to_json()
    assert d["verdict"] == "DS" and d["z"] == [2.0, 0.0] and d["checkpoints"]


def test_ds_inside_periodic_band_is_not_ds():
    from uamo.operators import build_floquet_block
    # a Floquet eigenvalue at a generic phase lies inside a periodic band
    z = np.linalg.eigvals(build_floquet_block(3, 5, 0.03, 0.25).matrix)[0]
    res = cc.dominated_splitting_check((3, 5), z)
    assert res.verdict is not cc.Verdict.DS


def test_ds_checkpoints():
    assert cc.ds_checkpoints(rational_frequency(3, 5), 40) == [5, 10, 20, 40]
    assert cc.ds_checkpoints(B, 64) == [8, 16, 32, 64]
    assert len(cc.ds_grid((3, 5))) == 320
