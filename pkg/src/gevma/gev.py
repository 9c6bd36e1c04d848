"""Core GEV distribution mathematics.

All functions use the Hosking-Wallis sign convention for the shape
parameter: the distribution is heavy tailed (unbounded above) when
``xi < 0`` and bounded above by ``mu + sigma/xi`` when ``xi > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma

EULER_GAMMA = 0.5772156649015328606

# below this the Gumbel limit expressions are used
_XI_EPS = 1e-9


class InvalidParamsError(ValueError):
    """Raised when GEV parameters violate their invariants."""


@dataclass(frozen=True)
class GevParams:
    """Location / scale / shape triple of a GEV distribution.

    Attributes
    ----------
    mu : float
        Location parameter (data units).
    sigma : float
        Scale parameter (data units), must be positive.
    xi : float
        Shape parameter (dimensionless), Hosking-Wallis convention.
    """

    mu: float
    sigma: float
    xi: float

    def __post_init__(self):
        if not np.isfinite(self.mu) or not np.isfinite(self.sigma) or not np.isfinite(self.xi):
            raise InvalidParamsError(f"non-finite GEV parameters: {self}")
        if self.sigma <= 0:
            raise InvalidParamsError(f"sigma must be positive, got {self.sigma}")

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.sigma, self.xi])


def _check_params(params: GevParams) -> None:
    if params.sigma <= 0:
        raise InvalidParamsError(f"sigma must be positive, got {params.sigma}")


def cdf(params: GevParams, x) -> np.ndarray | float:
    """GEV cumulative distribution function.

    Outside the support, returns 1 above the upper endpoint (xi > 0)
    and 0 below the lower endpoint (xi < 0).
    """
    _check_params(params)
    x = np.asarray(x, dtype=float)
    z = (x - params.mu) / params.sigma
    xi = params.xi
    if abs(xi) < _XI_EPS:
        out = np.exp(-np.exp(-z))
    else:
        t = 1.0 - xi * z
        with np.errstate(divide="ignore", invalid="ignore"):
            # log1p keeps log(t)/xi accurate as xi -> 0
            log_t = np.log1p(np.where(t > 0, -xi * z, 0.0))
            out = np.where(
                t > 0,
                np.exp(-np.exp(log_t / xi)),
                1.0 if xi > 0 else 0.0,
            )
    return float(out) if out.ndim == 0 else out


def logpdf(params: GevParams, x) -> np.ndarray | float:
    """Log-density; ``-inf`` outside the support."""
    _check_params(params)
    x = np.asarray(x, dtype=float)
    z = (x - params.mu) / params.sigma
    xi = params.xi
    if abs(xi) < _XI_EPS:
        out = -np.log(params.sigma) - z - np.exp(-z)
    else:
        t = 1.0 - xi * z
        log_t = np.log1p(np.where(t > 0, -xi * z, 0.0))
        out = np.where(
            t > 0,
            -np.log(params.sigma) + (1.0 / xi - 1.0) * log_t - np.exp(log_t / xi),
            -np.inf,
        )
    return float(out) if out.ndim == 0 else out


def log_likelihood(params: GevParams, data) -> float:
    """Sum of log-densities; ``-inf`` if any observation is outside the support."""
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        raise ValueError("data must be nonempty")
    return float(np.sum(logpdf(params, data)))


def quantile(params: GevParams, q) -> np.ndarray | float:
    """Quantile function, exact inverse of :func:`cdf` for ``0 < q < 1``."""
    _check_params(params)
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise ValueError("q must lie strictly inside (0, 1)")
    y = -np.log(q)
    xi = params.xi
    if abs(xi) < _XI_EPS:
        out = params.mu - params.sigma * np.log(y)
    else:
        # (1 - y^xi)/xi computed as -expm1(xi*log(y))/xi for stability near 0
        out = params.mu - params.sigma * np.expm1(xi * np.log(y)) / xi
    return float(out) if out.ndim == 0 else out


def return_level(params: GevParams, T) -> np.ndarray | float:
    """T-year return level: the ``1 - 1/T`` quantile (``T > 1``)."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 1):
        raise ValueError("return period T must exceed 1")
    return quantile(params, 1.0 - 1.0 / T)


def population_l_moments(params: GevParams) -> tuple[float, float, float]:
    """First three population L-moments (lambda1, lambda2, lambda3).

    Requires ``xi > -1`` for the moments to exist.
    """
    _check_params(params)
    xi = params.xi
    if xi <= -1:
        raise InvalidParamsError(f"population L-moments require xi > -1, got {xi}")
    if abs(xi) < _XI_EPS:
        lam1 = params.mu + EULER_GAMMA * params.sigma
        lam2 = params.sigma * np.log(2.0)
        tau3 = 2.0 * np.log(3.0) / np.log(2.0) - 3.0
    else:
        g = _gamma(1.0 + xi)
        lam1 = params.mu + params.sigma * (1.0 - g) / xi
        # (1 - 2^-xi)/xi via expm1 for small-xi stability
        lam2 = params.sigma * g * (-np.expm1(-xi * np.log(2.0))) / xi
        tau3 = 2.0 * np.expm1(-xi * np.log(3.0)) / np.expm1(-xi * np.log(2.0)) - 3.0
    return float(lam1), float(lam2), float(tau3 * lam2)


def sample(params: GevParams, n: int, rng) -> np.ndarray:
    """Draw ``n`` variates by inverse-CDF sampling.

    ``rng`` may be an integer seed or a ``numpy.random.Generator``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    u = rng.uniform(size=n)
    return np.asarray(quantile(params, u))


def rl_gradient(params: GevParams, p: float) -> np.ndarray:
    """Gradient of the ``1/p`` return level with respect to (mu, sigma, xi)."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    a = np.log(-np.log1p(-p))  # log y
    xi = params.xi
    if abs(xi) < 1e-5:
        # series in xi avoids cancellation in the exact expression
        d_sigma = -a * (1.0 + xi * a / 2.0 + xi * xi * a * a / 6.0)
        d_xi = -params.sigma * (a * a / 2.0 + a**3 * xi / 3.0)
    else:
        e = np.exp(xi * a)
        d_sigma = -np.expm1(xi * a) / xi
        # d/dxi of (1 - y^xi)/xi
        d_xi = -params.sigma * (a * e * xi - (e - 1.0)) / xi**2
    return np.array([1.0, d_sigma, d_xi])


def rl_gradient_fixed_xi(params: GevParams, p: float) -> np.ndarray:
    """Gradient of the ``1/p`` return level with respect to (mu, sigma) at fixed xi."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    y = -np.log1p(-p)
    xi = params.xi
    if abs(xi) < _XI_EPS:
        d_sigma = -np.log(y)
    else:
        d_sigma = -np.expm1(xi * np.log(y)) / xi
    return np.array([1.0, d_sigma])
