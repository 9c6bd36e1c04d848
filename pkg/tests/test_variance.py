import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevma.fitting import fit_fixed_xi_mle, fit_mle
from gevma.gev import GevParams, return_level, sample
from gevma.variance import (
    bma_variance,
    bootstrap_se,
    delta_var,
    delta_var_fixed_xi,
    dirichlet_weight_cov,
    ma_var_fixed_weights,
    ma_var_random_weights,
    moving_average,
    observed_information,
    observed_information_fixed_xi,
    rl_covariance_matrix,
    submodel_correlation,
)


@pytest.fixture(scope="module")
def data():
    return sample(GevParams(100.0, 30.0, -0.25), 80, 42)


def test_observed_information_spd_at_mle(data):
    fit = fit_mle(data)
    H = observed_information(fit.params, data)
    assert np.allclose(H, H.T)
    assert np.all(np.linalg.eigvalsh(H) > 0)


def test_observed_information_fixed_xi_spd(data):
    fit = fit_mle(data)
    fixed = fit_fixed_xi_mle(data, fit.params.xi)
    H = observed_information_fixed_xi(fixed.params, data)
    assert np.all(np.linalg.eigvalsh(H) > 0)
    # the fixed-shape Hessian is the (mu, sigma) block of the full one
    H3 = observed_information(fit.params, data)
    assert H == pytest.approx(H3[:2, :2], rel=1e-3)


def test_delta_var_fixed_xi_matches_parametric_bootstrap():
    # oracle: Monte Carlo variance of the fixed-shape fit under the fitted model
    rng = np.random.default_rng(3)
    x = sample(GevParams(100.0, 30.0, -0.2), 50, rng)
    fit = fit_fixed_xi_mle(x, fit_mle(x).params.xi)
    v_delta = delta_var_fixed_xi(fit.params, x, 0.01)
    rls = []
    for _ in range(600):
        y = sample(fit.params, 50, rng)
        try:
            p = fit_fixed_xi_mle(y, fit.params.xi).params
            rls.append(float(return_level(p, 100)))
        except Exception:
            pass
    v_mc = np.var(rls, ddof=1)
    assert v_delta == pytest.approx(v_mc, rel=0.2)


def test_delta_var_full_fit_matches_bootstrap_roughly():
    # the three-parameter version carries shape uncertainty; agreement with a
    # parametric bootstrap from the fitted model is only first-order
    rng = np.random.default_rng(5)
    x = sample(GevParams(100.0, 30.0, -0.15), 80, rng)
    fit = fit_mle(x)
    se_delta = math.sqrt(delta_var(fit.params, x, 0.01))
    rls = []
    for _ in range(300):
        y = sample(fit.params, 80, rng)
        try:
            rls.append(float(return_level(fit_mle(y).params, 100)))
        except Exception:
            pass
    se_mc = np.std(rls, ddof=1)
    assert se_delta == pytest.approx(se_mc, rel=0.4)


def test_delta_var_positive_and_grows_with_period(data):
    fit = fit_mle(data)
    v100 = delta_var(fit.params, data, 0.01)
    v200 = delta_var(fit.params, data, 0.005)
    assert 0 < v100 < v200


def test_delta_var_fixed_xi_less_than_full(data):
    # fixing the shape removes its (dominant) contribution to RL variance
    fit = fit_mle(data)
    fixed = fit_fixed_xi_mle(data, fit.params.xi)
    v_full = delta_var(fit.params, data, 0.01)
    v_fixed = delta_var_fixed_xi(fixed.params, data, 0.01)
    assert 0 < v_fixed < v_full


def test_delta_var_fixed_xi_warns_outside_regularity():
    x = sample(GevParams(10.0, 2.0, 0.55), 60, 0)
    fit = fit_fixed_xi_mle(x, 0.55)
    with pytest.warns(RuntimeWarning, match="regularity"):
        delta_var_fixed_xi(fit.params, x, 0.01)


def test_submodel_correlation_bounds_and_identity():
    a = GevParams(100.0, 30.0, -0.2)
    b = GevParams(105.0, 28.0, -0.3)
    assert submodel_correlation(a, a) == pytest.approx(1.0)
    rho = submodel_correlation(a, b)
    assert -1.0 <= rho <= 1.0


def test_rl_covariance_matrix_diagonal():
    ps = [GevParams(100.0, 30.0, -0.2), GevParams(101.0, 29.0, -0.25)]
    v = [4.0, 9.0]
    C = rl_covariance_matrix(ps, v)
    assert C[0, 0] == 4.0 and C[1, 1] == 9.0
    assert C[0, 1] == C[1, 0]
    assert abs(C[0, 1]) <= 6.0 + 1e-12  # |rho| <= 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 8))
def test_dirichlet_weight_cov_rows_sum_zero(seed, k):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(k))
    D = dirichlet_weight_cov(w)
    # weights sum to one, so every row of their covariance sums to zero
    assert np.allclose(D.sum(axis=1), 0.0, atol=1e-12)
    assert np.all(np.diag(D) >= 0)
    assert np.allclose(D, D.T)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 8))
def test_random_weight_var_at_least_fixed_weight_term(seed, k):
    # with PSD C, the random-weight variance dominates the fixed-weight one:
    # the two extra terms r~^T D r~ and tr(D C) are both nonnegative
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(k))
    r = rng.normal(500.0, 30.0, size=k)
    A = rng.normal(size=(k, k))
    C = A @ A.T
    v_fixed = float(w @ C @ w)
    v_rand = ma_var_random_weights(w, r, C)
    assert v_rand >= v_fixed - 1e-9


def test_ma_var_fixed_weights_identity_rho():
    w = np.array([0.5, 0.5])
    v = np.array([4.0, 4.0])
    rho = np.ones((2, 2))
    # perfectly correlated equal-variance models: var equals the common value
    assert ma_var_fixed_weights(w, v, rho) == pytest.approx(4.0)


def test_ma_var_random_weights_dimension_check():
    with pytest.raises(ValueError):
        ma_var_random_weights([0.5, 0.5], [1.0], np.eye(2))


def test_moving_average_constant_and_ends():
    x = np.array([5.0, 5.0, 5.0, 5.0])
    assert np.array_equal(moving_average(x), x)
    y = moving_average(np.array([0.0, 3.0, 6.0, 9.0]))
    # interior entries: centered mean of three; ends: shrunken window of two
    assert y == pytest.approx([1.5, 3.0, 6.0, 7.5])


def test_bma_variance_decomposition():
    w = np.array([0.25, 0.75])
    r = np.array([500.0, 520.0])
    v = np.array([100.0, 64.0])
    out = bma_variance(w, r, v)
    r_bar = 0.25 * 500 + 0.75 * 520
    assert out.among_model == pytest.approx(
        0.25 * (500 - r_bar) ** 2 + 0.75 * (520 - r_bar) ** 2)
    assert out.within_model == pytest.approx(0.25 * 100 + 0.75 * 64)
    assert out.total == pytest.approx(out.among_model + out.within_model)


def test_bma_variance_degenerate_weight():
    out = bma_variance([1.0], [500.0], [81.0])
    assert out.among_model == 0.0
    assert out.within_model == 81.0


def test_bootstrap_se_reproducible(data):
    est = lambda x: float(return_level(fit_mle(x).params, 100))
    a = bootstrap_se(data, est, 100.0, B=50, rng_seed=5)
    b = bootstrap_se(data, est, 100.0, B=50, rng_seed=5)
    assert a == b
    assert a > 0


def test_bootstrap_se_counts_failures(data):
    calls = {"n": 0}

    def flaky(x):
        calls["n"] += 1
        if calls["n"] % 3 == 0:
            raise ValueError("boom")
        return 1.0 + 0.01 * calls["n"]

    se, values, failures = bootstrap_se(data, flaky, 100.0, B=30, rng_seed=0,
                                        return_sample=True)
    assert failures == 10
    assert values.size == 20
    assert math.isfinite(se)


def test_bootstrap_se_matches_delta_order_of_magnitude(data):
    # two independent routes to the same uncertainty should agree roughly
    est = lambda x: float(return_level(fit_mle(x).params, 100))
    se_boot = bootstrap_se(data, est, 100.0, B=200, rng_seed=2)
    fit = fit_mle(data)
    se_delta = math.sqrt(delta_var(fit.params, data, 0.01))
    assert se_boot == pytest.approx(se_delta, rel=0.6)
