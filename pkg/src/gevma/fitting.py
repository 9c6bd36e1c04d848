"""GEV parameter estimators: MLE, LME, fixed-shape variants, restricted
MLEs, and the shape-penalized MLE."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import gamma as _gamma

from .gev import EULER_GAMMA, GevParams, log_likelihood
from .lmom import SampleLMoments, sample_l_moments

XI_BOUND = 0.99

_LN2 = math.log(2.0)
_LN3 = math.log(3.0)


class FitError(RuntimeError):
    """Raised when an estimator cannot produce a usable fit."""


@dataclass(frozen=True)
class FitResult:
    params: GevParams
    converged: bool
    method: str
    neg_log_lik: float = math.nan


def _xi_to_unbounded(xi: float) -> float:
    return math.atanh(np.clip(xi / XI_BOUND, -1 + 1e-12, 1 - 1e-12))


def _xi_from_unbounded(z: float) -> float:
    return XI_BOUND * math.tanh(z)


def _nm_minimize(fun, x0, extra_starts=()):
    """Nelder-Mead with restarts; returns the best converged result."""
    best = None
    for start in (x0, *extra_starts):
        res = minimize(
            fun,
            np.asarray(start, dtype=float),
            method="Nelder-Mead",
            options={"xatol": 1e-9, "fatol": 1e-10, "maxiter": 5000, "maxfev": 5000},
        )
        if not np.isfinite(res.fun):
            continue
        if best is None or res.fun < best.fun:
            best = res
    return best


def _feasible_start(data: np.ndarray, xi: float, mu: float, sigma: float) -> tuple[float, float]:
    """Adjust (mu, sigma) until all data are strictly inside the support."""
    if abs(xi) < 1e-9:
        return mu, sigma
    for _ in range(60):
        t = 1.0 - xi * (data - mu) / sigma
        if np.all(t > 1e-8):
            return mu, sigma
        sigma *= 1.5
    raise FitError(f"could not find a feasible starting point at xi={xi}")


def fit_fixed_xi_lme(data, xi: float, lmoms: SampleLMoments | None = None) -> FitResult:
    """Closed-form L-moment fit of (mu, sigma) at a known shape."""
    if lmoms is None:
        lmoms = sample_l_moments(data)
    l1, l2 = lmoms.l1, lmoms.l2
    if abs(xi) < 1e-9:
        sigma = l2 / _LN2
        mu = l1 - EULER_GAMMA * sigma
    else:
        g = _gamma(1.0 + xi)
        # sigma = l2 * xi / ((1 - 2^-xi) * Gamma(1+xi)); expm1 form keeps small xi stable
        sigma = l2 / (g * (-math.expm1(-xi * _LN2)) / xi)
        mu = l1 - sigma * (1.0 - g) / xi
    if sigma <= 0:
        raise FitError(f"fixed-xi LME produced nonpositive scale at xi={xi}")
    params = GevParams(mu, sigma, xi)
    return FitResult(params, True, "LME_fixed_xi")


def fit_lme(data) -> FitResult:
    """Three-parameter L-moment fit using the Hosking rational approximation
    for the shape, then the closed-form (mu, sigma) inversions."""
    lmoms = sample_l_moments(data)
    t3 = lmoms.l3 / lmoms.l2
    c = 2.0 / (3.0 + t3) - _LN2 / _LN3
    xi = 7.8590 * c + 2.9554 * c * c
    res = fit_fixed_xi_lme(data, xi, lmoms=lmoms)
    nll = -log_likelihood(res.params, data)
    return FitResult(res.params, True, "LME", neg_log_lik=nll)


def fit_fixed_xi_mle(data, xi: float) -> FitResult:
    """Maximum likelihood over (mu, sigma) with the shape held fixed."""
    data = np.asarray(data, dtype=float)
    try:
        start = fit_fixed_xi_lme(data, xi)
        mu0, sigma0 = start.params.mu, start.params.sigma
    except FitError:
        mu0, sigma0 = float(np.mean(data)), float(np.std(data))
    mu0, sigma0 = _feasible_start(data, xi, mu0, sigma0)

    def nll(theta):
        mu, log_sigma = theta
        try:
            p = GevParams(mu, math.exp(log_sigma), xi)
        except (ValueError, OverflowError):
            return math.inf
        return -log_likelihood(p, data)

    x0 = [mu0, math.log(sigma0)]
    best = _nm_minimize(nll, x0, extra_starts=([mu0, math.log(sigma0 * 1.2)],))
    if best is None:
        raise FitError(f"fixed-xi MLE failed to converge at xi={xi}")
    mu, log_sigma = best.x
    return FitResult(GevParams(mu, math.exp(log_sigma), xi), True, "MLE_fixed_xi",
                     neg_log_lik=float(best.fun))


def _mle_starts(data: np.ndarray):
    try:
        lme = fit_lme(data).params
    except FitError:
        lme = GevParams(float(np.mean(data)), float(np.std(data) + 1e-12), 0.0)
    xi0 = float(np.clip(lme.xi, -XI_BOUND + 1e-6, XI_BOUND - 1e-6))
    starts = [
        (lme.mu, lme.sigma, xi0),
        (lme.mu, lme.sigma * 1.2, xi0),
        (lme.mu, lme.sigma, 0.0),
    ]
    return starts


def _fit_mle_like(data, penalty, method: str) -> FitResult:
    """Shared driver for the plain and penalized three-parameter MLEs."""
    data = np.asarray(data, dtype=float)
    if data.size < 10:
        raise ValueError(f"need at least 10 observations, got {data.size}")
    if np.ptp(data) == 0:
        raise FitError("degenerate sample: all observations identical")

    def neg_obj(theta):
        mu, log_sigma, z = theta
        xi = _xi_from_unbounded(z)
        try:
            p = GevParams(mu, math.exp(log_sigma), xi)
        except (ValueError, OverflowError):
            return math.inf
        val = log_likelihood(p, data)
        if penalty is not None:
            val += penalty(xi)
        return -val

    starts = []
    for mu, sigma, xi in _mle_starts(data):
        mu, sigma = _feasible_start(data, xi, mu, sigma)
        starts.append([mu, math.log(sigma), _xi_to_unbounded(xi)])
    best = _nm_minimize(neg_obj, starts[0], extra_starts=starts[1:])
    if best is None:
        raise FitError(f"{method} failed: no start reached a finite optimum")
    mu, log_sigma, z = best.x
    params = GevParams(mu, math.exp(log_sigma), _xi_from_unbounded(z))
    nll = -log_likelihood(params, data)
    return FitResult(params, True, method, neg_log_lik=float(nll))


def fit_mle(data) -> FitResult:
    """Three-parameter maximum likelihood fit, multi-start Nelder-Mead."""
    return _fit_mle_like(data, None, "MLE")


def cd_log_penalty(xi: float, alpha: float = 1.0, lam: float = 1.0) -> float:
    """Log of the Coles-Dixon shape penalty: 0 for xi >= 0, -inf for xi <= -1."""
    if xi >= 0:
        return 0.0
    if xi <= -1:
        return -math.inf
    return -lam * (1.0 / (1.0 + xi) - 1.0) ** alpha


def fit_mle_cd(data, alpha: float = 1.0, lam: float = 1.0) -> FitResult:
    """Penalized MLE with the Coles-Dixon penalty on the shape."""
    return _fit_mle_like(data, lambda xi: cd_log_penalty(xi, alpha, lam), "MLE_CD")


def fit_remle(data, variant: int) -> FitResult:
    """Restricted MLEs matching population to sample L-moments.

    Variant 1 profiles the likelihood over (sigma, xi) with mu eliminated
    through lambda1 = l1.  Variant 2 optimizes over xi alone with both
    (mu, sigma) given by the fixed-shape LME closed forms (lambda1 = l1,
    lambda2 = l2).
    """
    if variant not in (1, 2):
        raise ValueError(f"variant must be 1 or 2, got {variant}")
    data = np.asarray(data, dtype=float)
    lmoms = sample_l_moments(data)
    l1 = lmoms.l1

    if variant == 1:
        def nll(theta):
            log_sigma, z = theta
            xi = _xi_from_unbounded(z)
            sigma = math.exp(log_sigma)
            if abs(xi) < 1e-9:
                mu = l1 - EULER_GAMMA * sigma
            else:
                mu = l1 - sigma * (1.0 - _gamma(1.0 + xi)) / xi
            try:
                p = GevParams(mu, sigma, xi)
            except (ValueError, OverflowError):
                return math.inf
            return -log_likelihood(p, data)

        lme = fit_lme(data).params
        x0 = [math.log(lme.sigma), _xi_to_unbounded(lme.xi)]
        best = _nm_minimize(nll, x0, extra_starts=(
            [math.log(lme.sigma * 1.2), _xi_to_unbounded(lme.xi)],
            [math.log(lme.sigma), 0.0],
        ))
        if best is None:
            raise FitError("Re.MLE1 failed to converge")
        log_sigma, z = best.x
        xi = _xi_from_unbounded(z)
        sigma = math.exp(log_sigma)
        mu = l1 - sigma * (1.0 - _gamma(1.0 + xi)) / xi if abs(xi) >= 1e-9 \
            else l1 - EULER_GAMMA * sigma
        return FitResult(GevParams(mu, sigma, xi), True, "ReMLE1",
                         neg_log_lik=float(best.fun))

    def nll2(theta):
        xi = _xi_from_unbounded(theta[0])
        try:
            p = fit_fixed_xi_lme(data, xi, lmoms=lmoms).params
        except FitError:
            return math.inf
        return -log_likelihood(p, data)

    lme = fit_lme(data).params
    best = _nm_minimize(nll2, [_xi_to_unbounded(lme.xi)], extra_starts=([0.0],))
    if best is None:
        raise FitError("Re.MLE2 failed to converge")
    xi = _xi_from_unbounded(best.x[0])
    params = fit_fixed_xi_lme(data, xi, lmoms=lmoms).params
    return FitResult(params, True, "ReMLE2", neg_log_lik=float(best.fun))
