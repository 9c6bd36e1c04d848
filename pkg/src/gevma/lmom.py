"""Sample L-moments, their covariance matrix, and L-moment distances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from .gev import GevParams, population_l_moments, quantile


class DegenerateSampleError(ValueError):
    """All observations equal; L-moment machinery is undefined."""


class NotPositiveDefiniteError(ValueError):
    """Covariance matrix failed a Cholesky factorization."""


@dataclass(frozen=True)
class SampleLMoments:
    """First three sample L-moments plus the sample median."""

    l1: float
    l2: float
    l3: float
    n: int
    robust_center: float  # sample median

    def as_array(self) -> np.ndarray:
        return np.array([self.l1, self.l2, self.l3])


@dataclass(frozen=True)
class LMomentCov:
    """3x3 covariance matrix of (l1, l2, l3) and how it was obtained."""

    V: np.ndarray
    source: str  # "exact" or "bootstrap"
    cholesky: np.ndarray = field(repr=False, default=None)


def _pwm_b(x_sorted: np.ndarray) -> np.ndarray:
    """Unbiased probability-weighted moments b0, b1, b2 of a sorted sample."""
    n = x_sorted.size
    i = np.arange(1, n + 1, dtype=float)
    b0 = x_sorted.mean()
    b1 = np.sum((i - 1) / (n - 1) * x_sorted) / n
    b2 = np.sum((i - 1) * (i - 2) / ((n - 1) * (n - 2)) * x_sorted) / n
    return np.array([b0, b1, b2])


# maps (b0, b1, b2) to (l1, l2, l3)
_B_TO_L = np.array([[1.0, 0.0, 0.0], [-1.0, 2.0, 0.0], [1.0, -6.0, 6.0]])


def sample_l_moments(data) -> SampleLMoments:
    """Unbiased sample L-moments l1, l2, l3 from the ordered data."""
    x = np.sort(np.asarray(data, dtype=float))
    if x.size < 4:
        raise ValueError(f"need at least 4 observations, got {x.size}")
    l1, l2, l3 = _B_TO_L @ _pwm_b(x)
    return SampleLMoments(float(l1), float(l2), float(l3), x.size, float(np.median(x)))


def _comb0(m: np.ndarray, k: int) -> np.ndarray:
    """C(m, k) with the counting convention C(m, k) = 0 for m < k."""
    return np.where(m >= k, comb(np.maximum(m, k), k), 0.0)


def _pwm_cov_exact(x_sorted: np.ndarray) -> np.ndarray:
    """Distribution-free unbiased covariance of the sample PWMs (b0, b1, b2).

    Uses the order-statistic double sums of Elamir & Seheult: the product
    moment E(b_k b_l) is estimated from pairs of disjoint subsets whose maxima
    contribute binomial-coefficient weights, then subtracted from b_k * b_l.
    """
    n = x_sorted.size
    i = np.arange(1, n + 1, dtype=float)
    b = _pwm_b(x_sorted)
    cov = np.empty((3, 3))
    for k in range(3):
        for l in range(k, 3):
            # sum over i<j of [C(i-1,k) C(j-k-2,l) + C(i-1,l) C(j-l-2,k)] x_i x_j
            a_k = _comb0(i - 1, k) * x_sorted
            a_l = _comb0(i - 1, l) * x_sorted
            c_l = _comb0(i - k - 2, l) * x_sorted
            c_k = _comb0(i - l - 2, k) * x_sorted
            csum_k = np.concatenate(([0.0], np.cumsum(a_k)[:-1]))
            csum_l = np.concatenate(([0.0], np.cumsum(a_l)[:-1]))
            total = np.sum(c_l * csum_k) + np.sum(c_k * csum_l)
            norm = (k + 1) * (l + 1) * comb(n, k + 1) * comb(n - k - 1, l + 1)
            cov[k, l] = cov[l, k] = b[k] * b[l] - total / norm
    return cov


def _pwm_cov_bootstrap(x: np.ndarray, B: int, rng: np.random.Generator) -> np.ndarray:
    n = x.size
    bs = np.empty((B, 3))
    for r in range(B):
        res = np.sort(rng.choice(x, size=n, replace=True))
        bs[r] = _pwm_b(res)
    return np.cov(bs, rowvar=False)


def l_moment_cov(data, bootstrap_B: int = 500, rng_seed: int = 0) -> LMomentCov:
    """Covariance matrix of (l1, l2, l3), shared across all candidate models.

    The exact distribution-free estimator is used first; if it is not
    symmetric positive definite (Cholesky test), the covariance is recomputed
    from a nonparametric bootstrap of the sample L-moments.
    """
    x = np.sort(np.asarray(data, dtype=float))
    if x.size < 10:
        raise ValueError(f"need at least 10 observations, got {x.size}")
    if np.ptp(x) == 0:
        raise DegenerateSampleError("all observations are equal")

    V = _B_TO_L @ _pwm_cov_exact(x) @ _B_TO_L.T
    V = 0.5 * (V + V.T)
    try:
        chol = np.linalg.cholesky(V)
        return LMomentCov(V=V, source="exact", cholesky=chol)
    except np.linalg.LinAlgError:
        pass

    rng = np.random.default_rng(rng_seed)
    V = _B_TO_L @ _pwm_cov_bootstrap(x, bootstrap_B, rng) @ _B_TO_L.T
    V = 0.5 * (V + V.T)
    try:
        chol = np.linalg.cholesky(V)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("bootstrap covariance not positive definite") from exc
    return LMomentCov(V=V, source="bootstrap", cholesky=chol)


def l_distance(sample: SampleLMoments, pop: tuple[float, float, float]) -> float:
    """Plain L-moment distance: sum of absolute coordinate differences."""
    return float(np.sum(np.abs(sample.as_array() - np.asarray(pop))))


def generalized_l_distance(d, V: LMomentCov) -> float:
    """Mahalanobis-type quadratic form d^T V^-1 d, solved via Cholesky."""
    d = np.asarray(d, dtype=float)
    chol = V.cholesky
    if chol is None:
        try:
            chol = np.linalg.cholesky(V.V)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError("V is not positive definite") from exc
    y = np.linalg.solve(chol, d)
    return float(y @ y)


def l_moment_distance_vector(sample: SampleLMoments, candidate: GevParams) -> np.ndarray:
    """d_k = sample L-moments minus population L-moments of the candidate."""
    return sample.as_array() - np.asarray(population_l_moments(candidate))


def med_distance_vector(data, candidate: GevParams) -> np.ndarray:
    """Distance vector with the first component replaced by median - q0.5."""
    sm = sample_l_moments(data)
    d = l_moment_distance_vector(sm, candidate)
    d[0] = sm.robust_center - quantile(candidate, 0.5)
    return d
