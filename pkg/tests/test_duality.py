import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uamo.duality import (
    dual_residual, duality_report, next_pow2, residual_fields, semi_conjugacy_check, transform,
    truncation_duality, write_report,
)
from uamo.operators import WalkState, apply_update
from uamo.torus import golden, rational_frequency


def random_state(seed, n_min=-3, width=6):
    rng = np.random.default_rng(seed)
    return WalkState(n_min, rng.normal(size=(width, 2)) + 1j * rng.normal(size=(width, 2)))


def test_transform_of_point_mass():
    pair = transform(WalkState.basis(0, 0), 8)
    assert np.allclose(pair.w_up, 1.0) and np.allclose(pair.w_down, 1j)
    pair = transform(WalkState.basis(2, 1), 8)
    assert np.allclose(pair.w_down, np.exp(2j * np.pi * 2 * pair.x))


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(-20, 20), st.integers(1, 8))
def test_parseval(seed, n_min, width):
    psi = random_state(seed, n_min, width)
    pair = transform(psi, next_pow2(2 * width))
    assert pair.l2_norm() == pytest.approx(math.sqrt(2) * psi.norm(), rel=1e-12)


def test_transform_linear():
    a, b = random_state(1), random_state(2)
    both = WalkState(a.n_min, a.amplitudes + 2j * b.amplitudes)
    ta, tb, tab = transform(a, 16), transform(b, 16), transform(both, 16)
    assert np.allclose(tab.w_up, ta.w_up + 2j * tb.w_up)
    assert np.allclose(tab.w_down, ta.w_down + 2j * tb.w_down)


@pytest.mark.parametrize("G", [12, 4])
def test_transform_rejects_bad_grid(G):
    with pytest.raises(ValueError):
        transform(random_state(0, width=6), G)


def test_shift_exact_against_direct_sum():
    pair = transform(random_state(3), 16)
    rep = dual_residual(pair, golden(), 0.2, 1.0)
    assert rep.shift_error < 1e-13


def test_constant_coin_toy_residual():
    # beta = 0, theta = 0: w_up = 1, w_down = i gives r_up = z - e^{2 pi i x}
    z = np.exp(0.3j)
    x, r_up, _, _ = residual_fields(transform(WalkState.basis(0, 0), 8), rational_frequency(0, 1), 0.0, z)
    assert np.allclose(r_up, z - np.exp(2j * np.pi * x), atol=1e-14)


@pytest.mark.parametrize("p, q, z, n_min, amps", [
    (0, 1, 1j, -1, [[0, -1j], [1, 0]]),
    (0, 1, -1j, -1, [[0, 1j], [1, 0]]),
    (1, 2, 1, -1, [[0, 1], [1, 0]]),
    (1, 2, -1, -1, [[0, -1], [1, 0]]),
])
def test_exact_eigenvector_has_vanishing_residual(p, q, z, n_min, amps):
    # at theta = 1/4 these coins are off-diagonal and trap a two-site state
    beta = rational_frequency(p, q)
    psi = WalkState(n_min, amps)
    assert np.allclose(apply_update(beta, 0.25, psi).to_vector(-4, 8), z * psi.to_vector(-4, 8), atol=1e-15)
    pair = transform(psi, 16)
    rep = dual_residual(pair, beta, 0.25, z)
    assert rep.residual_up < 1e-14 and rep.residual_down < 1e-14
    assert semi_conjugacy_check(pair, beta, 0.25, z).defect < 1e-13


def test_non_eigenvector_has_large_residual():
    rep = dual_residual(transform(random_state(5), 32), golden(), 0.1, np.exp(0.4j))
    assert max(rep.residual_up, rep.residual_down) > 0.1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 1), st.floats(0, 2 * math.pi))
def test_semi_conjugacy_bound_holds_for_any_state(seed, theta, phi):
    sc = semi_conjugacy_check(transform(random_state(seed), 32), golden(), theta, np.exp(1j * phi))
    assert sc.within_bound


def test_zero_state_rejected():
    pair = transform(WalkState(0, np.zeros((2, 2))), 8)
    with pytest.raises(ValueError):
        dual_residual(pair, golden(), 0.1, 1.0)
    with pytest.raises(ValueError):
        semi_conjugacy_check(pair, golden(), 0.1, 1.0)


def test_truncation_duality_small():
    out = truncation_duality(golden(), 0.1, 32)
    assert out["size"] == 64 and out["all_within_bound"]
    # boundary mass drives the residual, so the bulk state beats the median
    assert out["bulk_up"] < out["median_up"] and out["bulk_down"] < out["median_down"]


def test_report_json(tmp_path):
    rep = duality_report(golden(), 0.1, 16)
    assert rep.boundary_shift is not None and rep.truncation_size == 32
    path = tmp_path / "d.json"
    write_report(str(path), rep, {"seed": 0})
    d = json.loads(path.read_text())
    assert d["provenance"] == {"seed": 0} and "residual_up" in d


def test_pair_csv(tmp_path):
    pair = transform(WalkState.basis(0, 0), 4)
    path = tmp_path / "w.csv"
    pair.to_csv(str(path))
    assert path.read_text().splitlines()[0] == "x,re_w_up,im_w_up,re_w_down,im_w_down"
