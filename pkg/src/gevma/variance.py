"""Variance and standard-error machinery for single fits and model averages."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fitting import FitError
from .gev import GevParams, log_likelihood, quantile, rl_gradient, rl_gradient_fixed_xi


class SingularInformationError(RuntimeError):
    """Observed information matrix could not be inverted."""


@dataclass(frozen=True)
class BmaVariance:
    among_model: float
    within_model: float

    @property
    def total(self) -> float:
        return self.among_model + self.within_model


def observed_information_fixed_xi(params: GevParams, data,
                                  rel_step: float = 1e-5) -> np.ndarray:
    """Central finite-difference Hessian of the fixed-shape negative
    log-likelihood with respect to (mu, sigma)."""
    data = np.asarray(data, dtype=float)
    xi = params.xi

    def nll(mu, sigma):
        if sigma <= 0:
            return math.inf
        return -log_likelihood(GevParams(mu, sigma, xi), data)

    h_mu = rel_step * max(abs(params.mu), 1.0)
    h_sg = rel_step * max(abs(params.sigma), 1.0)
    f0 = nll(params.mu, params.sigma)
    H = np.empty((2, 2))
    H[0, 0] = (nll(params.mu + h_mu, params.sigma) - 2 * f0
               + nll(params.mu - h_mu, params.sigma)) / h_mu**2
    H[1, 1] = (nll(params.mu, params.sigma + h_sg) - 2 * f0
               + nll(params.mu, params.sigma - h_sg)) / h_sg**2
    H[0, 1] = H[1, 0] = (
        nll(params.mu + h_mu, params.sigma + h_sg)
        - nll(params.mu + h_mu, params.sigma - h_sg)
        - nll(params.mu - h_mu, params.sigma + h_sg)
        + nll(params.mu - h_mu, params.sigma - h_sg)
    ) / (4 * h_mu * h_sg)
    if not np.all(np.isfinite(H)):
        raise SingularInformationError("finite-difference Hessian hit the support boundary")
    return H


def observed_information(params: GevParams, data, rel_step: float = 1e-5) -> np.ndarray:
    """Central finite-difference Hessian of the negative log-likelihood with
    respect to (mu, sigma, xi)."""
    data = np.asarray(data, dtype=float)
    theta = params.as_array()

    def nll(t):
        if t[1] <= 0:
            return math.inf
        return -log_likelihood(GevParams(*t), data)

    h = rel_step * np.maximum(np.abs(theta), [1.0, 1.0, 0.1])
    H = np.empty((3, 3))
    f0 = nll(theta)
    for i in range(3):
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h[i]
        tm[i] -= h[i]
        H[i, i] = (nll(tp) - 2 * f0 + nll(tm)) / h[i] ** 2
        for j in range(i + 1, 3):
            tpp, tpm, tmp, tmm = (theta.copy() for _ in range(4))
            tpp[[i, j]] += [h[i], h[j]]
            tpm[[i, j]] += [h[i], -h[j]]
            tmp[[i, j]] += [-h[i], h[j]]
            tmm[[i, j]] += [-h[i], -h[j]]
            H[i, j] = H[j, i] = (nll(tpp) - nll(tpm) - nll(tmp) + nll(tmm)) \
                / (4 * h[i] * h[j])
    if not np.all(np.isfinite(H)):
        raise SingularInformationError("finite-difference Hessian hit the support boundary")
    return H


def delta_var(params: GevParams, data, p: float) -> float:
    """Delta-method variance of the ``1/p`` return level of a full
    three-parameter fit."""
    H = observed_information(params, data)
    try:
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError as exc:
        raise SingularInformationError("observed information is singular") from exc
    grad = rl_gradient(params, p)
    return float(grad @ cov @ grad)


def delta_var_fixed_xi(params: GevParams, data, p: float) -> float:
    """Delta-method variance of the ``1/p`` return level of a fixed-shape fit.

    Uses the inverse observed-information matrix of the two-parameter fit.
    """
    if params.xi >= 0.5:
        warnings.warn(f"xi={params.xi:.3f} >= 1/2: outside the asymptotic-normality "
                      "regularity region; variance may be unreliable", RuntimeWarning)
    H = observed_information_fixed_xi(params, data)
    try:
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError as exc:
        raise SingularInformationError("observed information is singular") from exc
    grad = rl_gradient_fixed_xi(params, p)
    return float(grad @ cov @ grad)


def submodel_correlation(params_i: GevParams, params_j: GevParams) -> float:
    """Pearson correlation proxy between two fitted submodels.

    Computed over twelve paired values: the nine deciles q0.1..q0.9 and the
    three parameters of each model.
    """
    qs = np.arange(0.1, 0.95, 0.1)
    vi = np.concatenate([np.atleast_1d(quantile(params_i, qs)), params_i.as_array()])
    vj = np.concatenate([np.atleast_1d(quantile(params_j, qs)), params_j.as_array()])
    si, sj = vi.std(), vj.std()
    if si == 0 or sj == 0:
        return 1.0
    rho = float(np.corrcoef(vi, vj)[0, 1])
    return float(np.clip(rho, -1.0, 1.0))


def rl_covariance_matrix(params_list, per_model_var) -> np.ndarray:
    """C matrix: per-model delta variances on the diagonal, correlation-scaled
    covariances off it.  May be indefinite (the correlation is approximate)."""
    K = len(params_list)
    v = np.asarray(per_model_var, dtype=float)
    C = np.empty((K, K))
    for i in range(K):
        C[i, i] = v[i]
        for j in range(i + 1, K):
            rho = submodel_correlation(params_list[i], params_list[j])
            C[i, j] = C[j, i] = rho * math.sqrt(v[i] * v[j])
    return C


def ma_var_fixed_weights(w, per_model_var, rho: np.ndarray) -> float:
    """Fixed-weight variance of the averaged return level: w^T C w."""
    w = np.asarray(w, dtype=float)
    v = np.asarray(per_model_var, dtype=float)
    s = np.sqrt(v)
    C = rho * np.outer(s, s)
    np.fill_diagonal(C, v)
    return float(w @ C @ w)


def dirichlet_weight_cov(w) -> np.ndarray:
    """Weight covariance under the Dirichlet assumption:
    Var = w(1-w)/2, Cov = -w_i w_j / 2."""
    w = np.asarray(w, dtype=float)
    D = -np.outer(w, w) / 2.0
    np.fill_diagonal(D, w * (1.0 - w) / 2.0)
    return D


def moving_average(x, q: int = 3) -> np.ndarray:
    """Centered order-q moving average with shrinking windows at the ends."""
    x = np.asarray(x, dtype=float)
    half = (q - 1) // 2
    out = np.empty_like(x)
    for i in range(x.size):
        lo = max(0, i - half)
        hi = min(x.size, i + half + 1)
        out[i] = x[lo:hi].mean()
    return out


def ma_var_random_weights(w_hat, r_hat, C: np.ndarray, q: int = 3) -> float:
    """Variance of the averaged return level with random (Dirichlet) weights.

    Returns r~^T D r~ + tr(D C) + w^T C w, where r~ is the moving-average
    smoothed return-level vector.
    """
    w = np.asarray(w_hat, dtype=float)
    r = np.asarray(r_hat, dtype=float)
    C = np.asarray(C, dtype=float)
    if not (w.size == r.size == C.shape[0] == C.shape[1]):
        raise ValueError("dimension mismatch between weights, return levels, and C")
    D = dirichlet_weight_cov(w)
    r_s = moving_average(r, q)
    return float(r_s @ D @ r_s + np.trace(D @ C) + w @ C @ w)


def bma_variance(w, per_model_rl, per_model_var) -> BmaVariance:
    """Posterior variance decomposition: among-model + within-model."""
    w = np.asarray(w, dtype=float)
    r = np.asarray(per_model_rl, dtype=float)
    v = np.asarray(per_model_var, dtype=float)
    r_bar = float(w @ r)
    among = float(w @ (r - r_bar) ** 2)
    within = float(w @ v)
    return BmaVariance(among_model=among, within_model=within)


def bootstrap_se(data, estimator, T: float, B: int = 500, rng_seed: int = 0,
                 return_sample: bool = False):
    """Nonparametric-bootstrap SE of a T-year return-level estimator.

    ``estimator(resample)`` must return the return level for period ``T``.
    Resamples where the estimator fails are dropped and counted.
    """
    data = np.asarray(data, dtype=float)
    rng = np.random.default_rng(rng_seed)
    n = data.size
    values = []
    failures = 0
    for b in range(B):
        res = rng.choice(data, size=n, replace=True)
        try:
            values.append(float(estimator(res)))
        except (FitError, SingularInformationError, ValueError,
                np.linalg.LinAlgError):
            failures += 1
    values = np.asarray(values)
    se = float(values.std(ddof=1)) if values.size > 1 else math.nan
    if return_sample:
        return se, values, failures
    return se
