import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from multilap.affinity import KernelParams, build_weight_field, field_stats
from multilap.normfilter import (AlphaEstimate, NormMode, apply_exact, apply_norm_free,
                                 estimate_alpha, trace_terms, variance_factors)

from conftest import field_to_dense

P = KernelParams(h_y=0.7, window_radius=2, patch_radius=1)


def full_window_constant(n_side=3, c=0.4):
    y = np.full((n_side, n_side), c)
    return y, build_weight_field(y, KernelParams(window_radius=n_side))


def test_exact_fixes_constants():
    y = np.full((5, 6), 0.37)
    z = apply_exact(build_weight_field(y, P), y)
    assert np.max(np.abs(z - 0.37)) <= 1e-15


def test_exact_two_pixel_analytic():
    y = np.array([[0.0, 1.0]])
    w = build_weight_field(y, KernelParams(h_y=1.0, window_radius=1, patch_radius=0))
    z = apply_exact(w, y)
    e = math.exp(-1)
    assert z[0, 0] == pytest.approx(e / (1 + e), abs=1e-15)
    assert z[0, 1] == pytest.approx(1 / (1 + e), abs=1e-15)
    assert z[0, 0] == pytest.approx(0.26894, abs=1e-5)
    assert z[0, 1] == pytest.approx(0.73106, abs=1e-5)


def test_exact_matches_dense(rng):
    y = rng.random((8, 8))
    w = build_weight_field(y, P)
    K = field_to_dense(w)
    want = (K / K.sum(axis=1)[:, None]) @ y.ravel()
    assert np.max(np.abs(apply_exact(w, y).ravel() - want)) <= 1e-10


def test_exact_is_convex_combination(rng):
    y = rng.random((9, 7))
    z = apply_exact(build_weight_field(y, P), y)
    assert y.min() <= z.min() and z.max() <= y.max()


@pytest.mark.parametrize("alpha", [1e-3, 0.05, 1.0, 7.0])
def test_norm_free_fixes_constants(alpha):
    y = np.full((5, 5), 0.81)
    z = apply_norm_free(build_weight_field(y, P), y, alpha)
    assert np.max(np.abs(z - 0.81)) <= 1e-6


def test_norm_free_equals_mean_for_global_window():
    rng = np.random.default_rng(3)
    y0, w = full_window_constant()
    # weights are all one for the constant image; filter a different signal with them
    y = rng.random(y0.shape)
    z = apply_norm_free(w, y, 1.0 / y.size)
    assert np.max(np.abs(z - y.mean())) <= 1e-12


def test_norm_free_matches_dense(rng):
    y = rng.random((8, 8))
    w = build_weight_field(y, P)
    alpha = 1.0 / field_stats(w).d_bar
    K = field_to_dense(w)
    What = np.eye(64) + alpha * (K - np.diag(K.sum(axis=1)))
    assert np.max(np.abs(apply_norm_free(w, y, alpha).ravel() - What @ y.ravel())) <= 1e-10


def test_norm_free_is_not_clamped():
    y = np.array([[0.0, 0.0, 1.0, 1.0]])
    w = build_weight_field(y, KernelParams(h_y=10.0, window_radius=1, patch_radius=0))
    z = apply_norm_free(w, y, 5.0)
    assert z.min() < 0.0 or z.max() > 1.0


def test_errors(rng):
    w = build_weight_field(rng.random((4, 4)), P)
    with pytest.raises(ValueError, match="alpha"):
        apply_norm_free(w, rng.random((4, 4)), 0.0)
    with pytest.raises(ValueError, match="dimension"):
        apply_exact(w, rng.random((4, 5)))
    with pytest.raises(ValueError, match="dimension"):
        apply_norm_free(w, rng.random((3, 4)), 0.1)
    with pytest.raises(ValueError):
        NormMode("norm_free", -1.0)
    with pytest.raises(ValueError):
        NormMode("fast")


def test_closed_form_global_window_is_one_over_n():
    _, w = full_window_constant(3)
    n = 9
    est = estimate_alpha(w, "closed_form")
    assert est.strategy == "closed_form" and not est.degenerate
    assert est.value == pytest.approx((n * n - n) / (n ** 3 - n ** 2), rel=1e-12)
    assert est.value == pytest.approx(1.0 / field_stats(w).d_bar, rel=1e-12)


def test_closed_form_degenerate_falls_back(rng):
    w = build_weight_field(rng.random((4, 4)), P)
    w.weights[:] = 0.0
    w.weights[w.center] = 1.0
    w.degree = w.weights.sum(axis=0)
    est = estimate_alpha(w, "closed_form")
    assert est.degenerate and est.value == 1.0
    assert float(est) == 1.0


def test_trace_terms_match_dense(rng):
    y = rng.random((5, 6))
    w = build_weight_field(y, P)
    K = field_to_dense(w)
    D = np.diag(K.sum(axis=1))
    t = trace_terms(w)
    want = {"tr_K": np.trace(K), "tr_D": np.trace(D), "tr_KD": np.trace(K @ D),
            "tr_D2": np.trace(D @ D), "tr_K2": np.trace(K @ K),
            "tr_KDinvK": np.trace(K @ np.linalg.inv(D) @ K)}
    for key, v in want.items():
        assert t[key] == pytest.approx(v, rel=1e-9), key


def grid_argmin(w, steps=10_000):
    K = field_to_dense(w)
    d = K.sum(axis=1)
    A = K / d[:, None] - np.eye(K.shape[0])
    L = K - np.diag(d)
    grid = np.linspace(0, 2 / d.mean(), steps + 1)
    J = [np.sum((A - a * L) ** 2) for a in grid]
    return grid[int(np.argmin(J))], grid[1] - grid[0], grid, np.array(J)


def test_closed_form_matches_grid_scan(rng):
    w = build_weight_field(rng.random((8, 8)), P)
    a_star, step, grid, J = grid_argmin(w, 2000)
    est = estimate_alpha(w, "closed_form").value
    assert abs(est - a_star) <= step
    # J(closed form) is no larger than J anywhere on the grid
    K = field_to_dense(w)
    d = K.sum(axis=1)
    J_est = np.sum((K / d[:, None] - np.eye(64) - est * (K - np.diag(d))) ** 2)
    assert J_est <= J.min() + 1e-12


def test_other_strategies(rng):
    w = build_weight_field(rng.random((6, 6)), P)
    st_ = field_stats(w)
    assert estimate_alpha(w, "trace_ratio").value == st_.s1 / st_.s2
    assert estimate_alpha(w, "inverse_mean_degree").value == 1.0 / st_.d_bar
    assert estimate_alpha(w, 0.25) == AlphaEstimate(0.25, "fixed")
    with pytest.raises(ValueError):
        estimate_alpha(w, "median")


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(0, 1)), st.integers(1, 3))
def test_estimator_ordering(y, r):
    w = build_weight_field(y, KernelParams(window_radius=r))
    s = field_stats(w)
    assert 1.0 / (s.m * s.n) <= s.s1 / s.s2 <= 1.0 / s.d_bar * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(0, 1)), st.floats(0.01, 20))
def test_row_stochastic_and_symmetric(y, scale):
    w = build_weight_field(y, P)
    K = field_to_dense(w)
    d = K.sum(axis=1)
    W = K / d[:, None]
    What = np.eye(K.shape[0]) + scale / d.mean() * (K - np.diag(d))
    assert np.max(np.abs(W.sum(axis=1) - 1)) <= 1e-9
    assert np.max(np.abs(What.sum(axis=1) - 1)) <= 1e-6
    assert np.max(np.abs(What - What.T)) <= 1e-9


def test_variance_factors_global_window():
    _, w = full_window_constant(3)
    vf = variance_factors(w, 1 / 9)
    assert np.allclose(vf.nu, 1 / 9, rtol=0, atol=1e-15)
    assert np.allclose(vf.nu_hat, 1 / 9, rtol=0, atol=1e-15)


def test_variance_factors_rho_one_gives_nu(rng):
    w = build_weight_field(rng.random((4, 4)), P)
    # pixel-wise alpha = 1/d_i makes rho_i = 1; check one pixel at a time
    for (r, c) in [(0, 0), (1, 2), (3, 3)]:
        vf = variance_factors(w, 1.0 / w.degree[r, c])
        assert vf.rho[r, c] == pytest.approx(1.0, abs=1e-15)
        assert vf.nu_hat_approx[r, c] == pytest.approx(vf.nu[r, c], abs=1e-15)
        assert vf.nu_hat[r, c] == pytest.approx(vf.nu[r, c], abs=1e-12)


def test_variance_factors_against_dense_rows(rng):
    y = rng.random((4, 4))
    w = build_weight_field(y, P)
    alpha = 1.0 / field_stats(w).d_bar
    K = field_to_dense(w)
    d = K.sum(axis=1)
    W = K / d[:, None]
    What = np.eye(16) + alpha * (K - np.diag(d))
    vf = variance_factors(w, alpha)
    assert np.allclose(vf.nu.ravel(), (W ** 2).sum(axis=1), rtol=0, atol=1e-12)
    assert np.allclose(vf.nu_hat.ravel(), (What ** 2).sum(axis=1), rtol=0, atol=1e-12)
    assert np.all(vf.nu > 0) and np.all(vf.nu <= 1) and np.all(vf.rho > 0)
    bound = 2 * np.abs(vf.rho * (1 - vf.rho)) * vf.self_weight + 1e-9
    assert np.all(np.abs(vf.nu_hat - vf.nu_hat_approx) <= bound)
