import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevma.gev import GevParams, population_l_moments, sample
from gevma.lmom import (
    DegenerateSampleError,
    LMomentCov,
    _pwm_b,
    generalized_l_distance,
    l_distance,
    l_moment_cov,
    l_moment_distance_vector,
    med_distance_vector,
    sample_l_moments,
)


def test_sample_l_moments_small_case():
    # direct enumeration oracle for n=4: b1 = sum (i-1)/(n-1) x_(i) / n, etc.
    x = np.array([1.0, 2.0, 4.0, 8.0])
    b0 = x.mean()
    b1 = (0 * 1 + 1 * 2 + 2 * 4 + 3 * 8) / 3 / 4
    b2 = (0 * 1 + 0 * 2 + 2 * 4 + 6 * 8) / 6 / 4
    sm = sample_l_moments(x)
    assert sm.l1 == pytest.approx(b0, rel=1e-14)
    assert sm.l2 == pytest.approx(2 * b1 - b0, rel=1e-14)
    assert sm.l3 == pytest.approx(6 * b2 - 6 * b1 + b0, rel=1e-14)
    assert sm.robust_center == pytest.approx(3.0)
    assert sm.n == 4


def test_sample_l_moments_order_invariant():
    rng = np.random.default_rng(1)
    x = rng.gamma(2.0, 5.0, size=40)
    a = sample_l_moments(x)
    b = sample_l_moments(x[::-1])
    assert a == b


def test_sample_l_moments_requires_four():
    with pytest.raises(ValueError):
        sample_l_moments([1.0, 2.0, 3.0])


def test_l_moments_consistency_with_population():
    # large-sample l-moments converge to the population values
    p = GevParams(100.0, 30.0, -0.25)
    x = sample(p, 200_000, 7)
    sm = sample_l_moments(x)
    lam = population_l_moments(p)
    assert sm.l1 == pytest.approx(lam[0], rel=1e-2)
    assert sm.l2 == pytest.approx(lam[1], rel=1e-2)
    assert sm.l3 == pytest.approx(lam[2], rel=8e-2)


@settings(max_examples=120, deadline=None)
@given(st.floats(-100, 100), st.floats(0.1, 50), st.integers(0, 2**31 - 1))
def test_l_moments_affine_equivariance(a, b, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(10.0, 3.0, size=30)
    sm = sample_l_moments(x)
    sm2 = sample_l_moments(b * x + a)
    # l1 is affine-equivariant; l2, l3 scale-equivariant (b > 0)
    assert sm2.l1 == pytest.approx(b * sm.l1 + a, rel=1e-9, abs=1e-7)
    assert sm2.l2 == pytest.approx(b * sm.l2, rel=1e-9, abs=1e-7)
    assert sm2.l3 == pytest.approx(b * sm.l3, rel=1e-9, abs=1e-7)


def test_pwm_cov_matches_bootstrap_oracle():
    # the exact distribution-free covariance should agree with a large
    # nonparametric bootstrap on a moderate sample
    p = GevParams(100.0, 30.0, -0.2)
    x = np.sort(sample(p, 60, 11))
    V_exact = l_moment_cov(x).V
    rng = np.random.default_rng(5)
    B = 4000
    ls = np.empty((B, 3))
    for r in range(B):
        res = rng.choice(x, size=x.size, replace=True)
        ls[r] = sample_l_moments(res).as_array()
    V_boot = np.cov(ls, rowvar=False)
    # bootstrap Monte Carlo error ~ O(1/sqrt(B)); compare loosely
    for i in range(3):
        assert V_exact[i, i] == pytest.approx(V_boot[i, i], rel=0.25)
    assert V_exact[0, 1] == pytest.approx(V_boot[0, 1], rel=0.35)


def test_l_moment_cov_spd_and_source():
    x = sample(GevParams(50.0, 10.0, -0.3), 50, 3)
    cov = l_moment_cov(x)
    assert cov.source in ("exact", "bootstrap")
    eig = np.linalg.eigvalsh(cov.V)
    assert np.all(eig > 0)
    assert np.allclose(cov.cholesky @ cov.cholesky.T, cov.V, atol=1e-12)


def test_l_moment_cov_degenerate():
    with pytest.raises(DegenerateSampleError):
        l_moment_cov(np.full(20, 3.0))
    with pytest.raises(ValueError):
        l_moment_cov(np.arange(5.0))


def test_generalized_l_distance_identity_matrix():
    V = LMomentCov(V=np.eye(3), source="exact", cholesky=np.eye(3))
    d = np.array([1.0, 2.0, 3.0])
    assert generalized_l_distance(d, V) == pytest.approx(14.0, rel=1e-12)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_generalized_l_distance_nonnegative(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3))
    V = A @ A.T + 0.1 * np.eye(3)
    cov = LMomentCov(V=V, source="exact", cholesky=np.linalg.cholesky(V))
    d = rng.normal(size=3)
    gld = generalized_l_distance(d, cov)
    assert gld >= 0
    # agreement with the direct quadratic form
    assert gld == pytest.approx(float(d @ np.linalg.solve(V, d)), rel=1e-9)


def test_distance_vectors():
    p = GevParams(100.0, 30.0, -0.2)
    x = sample(p, 5000, 9)
    sm = sample_l_moments(x)
    d = l_moment_distance_vector(sm, p)
    assert np.all(np.abs(d) < np.array([2.0, 2.0, 2.0]))
    dm = med_distance_vector(x, p)
    assert dm[1] == d[1] and dm[2] == d[2]
    assert dm[0] != d[0]
    assert l_distance(sm, population_l_moments(p)) == pytest.approx(np.sum(np.abs(d)))


def test_pwm_b_weights_sum():
    # b_k weights: mean of C(i-1,k)/C(n-1,k) x_(i); constant vector maps to
    # (c, c/... ) sanity: for constant data b0=b1*2=...? just check invariance
    x = np.full(25, 7.0)
    b = _pwm_b(np.sort(x))
    assert b[0] == pytest.approx(7.0)
    assert b[1] == pytest.approx(3.5)
    assert b[2] == pytest.approx(7.0 / 3.0)
