"""Single-GEV surrogate of a model-averaged return-level curve."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .averaging import MaEstimate
from .fitting import FitError
from .gev import GevParams, quantile

DEFAULT_PROBS = (0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.96, 0.97, 0.98, 0.99,
                 0.992, 0.994, 0.995, 0.996, 0.998, 0.999)


@dataclass(frozen=True)
class SurrogateFit:
    params: GevParams
    rss: float
    probs: tuple[float, ...]


def fit_surrogate(ma_quantile, probs=DEFAULT_PROBS,
                  start: GevParams | None = None) -> SurrogateFit:
    """Least-squares GEV fit to a set of target quantiles.

    ``ma_quantile(q)`` returns the model-averaged quantile at non-exceedance
    probability ``q``.  The optimizer starts at ``start`` (typically the
    weight-averaged candidate parameters) and minimizes the residual sum of
    squares over the probability grid.
    """
    probs = tuple(float(q) for q in probs)
    if len(probs) < 4 or any(not 0 < q < 1 for q in probs):
        raise ValueError("need at least 4 probabilities strictly inside (0, 1)")
    targets = np.array([ma_quantile(q) for q in probs])
    qarr = np.array(probs)

    if start is None:
        start = GevParams(float(targets[0]), float(np.std(targets) + 1e-6), -0.1)

    def rss(theta):
        mu, log_sigma, xi = theta
        try:
            p = GevParams(mu, math.exp(log_sigma), xi)
        except (ValueError, OverflowError):
            return math.inf
        if not -1 < xi < 1:
            return math.inf
        resid = np.atleast_1d(quantile(p, qarr)) - targets
        return float(resid @ resid)

    x0 = [start.mu, math.log(start.sigma), start.xi]
    best = None
    for pert in (1.0, 1.2):
        res = minimize(rss, [x0[0], x0[1] + math.log(pert), x0[2]],
                       method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12,
                                "maxiter": 5000, "maxfev": 5000})
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise FitError("surrogate fit failed to converge")
    mu, log_sigma, xi = best.x
    return SurrogateFit(GevParams(mu, math.exp(log_sigma), xi),
                        float(best.fun), probs)


def surrogate_of_estimate(estimate: MaEstimate, probs=DEFAULT_PROBS) -> SurrogateFit:
    """Fit a surrogate GEV to the return-level curve of an MA estimate.

    The MA quantile at probability q is the weighted average of the candidate
    quantiles; the start point is the weight-averaged candidate parameters.
    """
    w = estimate.weights.w
    params = estimate.candidate_set.params

    def ma_quantile(q: float) -> float:
        return float(sum(wk * quantile(p, q) for wk, p in zip(w, params)))

    mu0 = float(sum(wk * p.mu for wk, p in zip(w, params)))
    sigma0 = float(sum(wk * p.sigma for wk, p in zip(w, params)))
    xi0 = float(sum(wk * p.xi for wk, p in zip(w, params)))
    return fit_surrogate(ma_quantile, probs, start=GevParams(mu0, sigma0, xi0))
