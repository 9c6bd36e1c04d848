import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevma.averaging import AnalysisContext, MaMethodConfig, ma_return_level
from gevma.gev import GevParams, quantile, sample
from gevma.surrogate import DEFAULT_PROBS, fit_surrogate, surrogate_of_estimate


@settings(max_examples=100, deadline=None)
@given(st.floats(-50, 150), st.floats(1.0, 60.0), st.floats(-0.45, 0.45))
def test_surrogate_recovers_exact_gev(mu, sigma, xi):
    truth = GevParams(mu, sigma, xi)
    fit = fit_surrogate(lambda q: float(quantile(truth, q)),
                        start=GevParams(mu + 1.0, sigma * 1.1, xi + 0.02))
    assert fit.rss < 1e-8
    assert fit.params.mu == pytest.approx(mu, abs=1e-3)
    assert fit.params.sigma == pytest.approx(sigma, rel=1e-3)
    assert fit.params.xi == pytest.approx(xi, abs=1e-3)


def test_surrogate_recovers_without_start_hint():
    truth = GevParams(100.0, 30.0, -0.3)
    fit = fit_surrogate(lambda q: float(quantile(truth, q)))
    assert fit.rss < 1e-6
    assert fit.params.xi == pytest.approx(-0.3, abs=1e-3)


def test_surrogate_probability_grid_validation():
    truth = GevParams(0.0, 1.0, 0.0)
    f = lambda q: float(quantile(truth, q))
    with pytest.raises(ValueError):
        fit_surrogate(f, probs=(0.5, 0.9, 0.99))  # too few
    with pytest.raises(ValueError):
        fit_surrogate(f, probs=(0.0, 0.5, 0.9, 0.99))  # boundary prob


def test_surrogate_records_its_grid():
    truth = GevParams(10.0, 5.0, 0.1)
    fit = fit_surrogate(lambda q: float(quantile(truth, q)))
    assert fit.probs == DEFAULT_PROBS


def test_surrogate_tracks_ma_curve():
    data = sample(GevParams(100.0, 30.0, -0.25), 60, 13)
    ctx = AnalysisContext(data, rng_seed=0)
    est = ma_return_level(data, MaMethodConfig(method="MA.gLd1", K=10), 100.0, ctx=ctx)
    sur = surrogate_of_estimate(est)

    w, params = est.weights.w, est.candidate_set.params
    for q in (0.5, 0.9, 0.99, 0.995):
        ma_q = float(sum(wk * quantile(p, q) for wk, p in zip(w, params)))
        # the surrogate reproduces the averaged curve closely on and off grid
        assert float(quantile(sur.params, q)) == pytest.approx(ma_q, rel=0.01)
    # the surrogate shape lies within the candidate shape hull (weighted blend)
    assert est.candidate_set.xi_grid.min() - 0.05 <= sur.params.xi \
        <= est.candidate_set.xi_grid.max() + 0.05


def test_surrogate_of_degenerate_average_is_exact():
    # a single dominant candidate: the surrogate must return that model
    data = sample(GevParams(100.0, 30.0, -0.2), 60, 3)
    ctx = AnalysisContext(data, rng_seed=0)
    est = ma_return_level(data, MaMethodConfig(method="MA.gLd1", K=10), 100.0, ctx=ctx)
    # rebuild with a one-hot weight on the middle candidate
    from dataclasses import replace

    from gevma.averaging import WeightVector

    k = est.K_effective // 2
    w = np.zeros(est.K_effective)
    w[k] = 1.0
    one_hot = replace(est, weights=WeightVector(w=w, scheme="gLd"))
    sur = surrogate_of_estimate(one_hot)
    target = est.candidate_set.params[k]
    assert sur.rss < 1e-8
    assert sur.params.mu == pytest.approx(target.mu, abs=1e-3)
    assert sur.params.xi == pytest.approx(target.xi, abs=1e-3)
