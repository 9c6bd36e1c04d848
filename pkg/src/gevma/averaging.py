"""Model-averaged return-level estimation.

Candidate submodels are fixed-shape GEV fits placed along a confidence
interval for the shape parameter; weights come from L-moment distances,
smooth AIC, Bayesian priors on the shape, or forward cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .fitting import XI_BOUND, FitError, FitResult, fit_fixed_xi_lme, fit_lme, fit_mle
from .gev import GevParams, log_likelihood, quantile, return_level
from .intervals import ProfileLikelihood, XiInterval, bootstrap_ci_xi, profile_ci_xi
from .lmom import (
    LMomentCov,
    generalized_l_distance,
    l_moment_cov,
    l_moment_distance_vector,
    sample_l_moments,
)
from .variance import delta_var_fixed_xi, ma_var_random_weights, rl_covariance_matrix

# method name -> (estimation criterion, weighting scheme, trim)
METHOD_TABLE = {
    "MA.gLd1": ("MLE", "gLd", 1),
    "MA.gLd2": ("MLE", "gLd", 2),
    "MA.like0": ("LME", "smoothAIC", 0),
    "MA.like1": ("LME", "smoothAIC", 1),
    "MA.cvt": ("MLE", "smoothAIC", 0),
    "MA.med": ("MLE", "med", 1),
    "BMA.like": ("LME", "bma.like", 0),
    "BMA.gLd": ("MLE", "bma.gLd", 0),
    "MA.fcv": ("MLE", "fcv", 0),
}


@dataclass(frozen=True)
class MaMethodConfig:
    """Configuration of one model-averaging method."""

    method: str
    K: int = 12
    alpha_ci: float = 0.05
    prune_threshold: float = 0.01
    edge_threshold: float = 0.1
    fcv_test_fraction: float = 0.10
    starter: str = "mle"  # "mle" (profile likelihood) or "lme" (bootstrap)
    boot_B: int = 500
    trim_estimation: bool = False  # also trim the data used for candidate fits

    def __post_init__(self):
        if self.method not in METHOD_TABLE:
            raise ValueError(f"unknown method {self.method!r}; choose from {sorted(METHOD_TABLE)}")
        if self.starter not in ("mle", "lme"):
            raise ValueError(f"starter must be 'mle' or 'lme', got {self.starter!r}")
        if self.K < 1:
            raise ValueError("K must be >= 1")

    @property
    def estimation(self) -> str:
        return METHOD_TABLE[self.method][0]

    @property
    def weighting(self) -> str:
        return METHOD_TABLE[self.method][1]

    @property
    def trim(self) -> int:
        return METHOD_TABLE[self.method][2]


@dataclass(frozen=True)
class CandidateSet:
    xi_grid: np.ndarray
    fits: tuple[FitResult, ...]
    est_criterion: str
    starter: str
    trim: int

    @property
    def K(self) -> int:
        return len(self.fits)

    @property
    def params(self) -> tuple[GevParams, ...]:
        return tuple(f.params for f in self.fits)


@dataclass(frozen=True)
class WeightVector:
    w: np.ndarray
    scheme: str

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if np.any(w < -1e-15) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to one")


@dataclass(frozen=True)
class MaEstimate:
    r_ma: float
    T: float
    weights: WeightVector
    per_model_rl: np.ndarray
    candidate_set: CandidateSet
    config: MaMethodConfig
    extension_rounds: int = 0

    @property
    def K_effective(self) -> int:
        return self.candidate_set.K


class AnalysisContext:
    """Per-dataset cache of fits, profiles, intervals, and covariances.

    Lets several MA methods (or several K values) run on one sample without
    recomputing the expensive shared pieces.
    """

    def __init__(self, data, rng_seed: int = 0):
        self.data = np.sort(np.asarray(data, dtype=float))
        self.rng_seed = int(rng_seed)
        self._cache: dict = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    def trimmed(self, trim: int) -> np.ndarray:
        return self.data[trim:] if trim else self.data

    def lme(self) -> FitResult:
        return self._get("lme", lambda: fit_lme(self.data))

    def mle(self) -> FitResult:
        return self._get("mle", lambda: fit_mle(self.data))

    def profile(self) -> ProfileLikelihood:
        return self._get("profile", lambda: ProfileLikelihood(self.data))

    def profile_ci(self, alpha: float) -> XiInterval:
        return self._get(("pci", alpha),
                         lambda: profile_ci_xi(self.data, alpha, profile=self.profile()))

    def bootstrap_ci(self, alpha: float, B: int) -> XiInterval:
        return self._get(("bci", alpha, B),
                         lambda: bootstrap_ci_xi(self.data, alpha, B, self.rng_seed))

    def lmoments(self, trim: int = 0):
        return self._get(("lmom", trim), lambda: sample_l_moments(self.trimmed(trim)))

    def lmoment_cov(self, trim: int = 0) -> LMomentCov:
        return self._get(("lcov", trim),
                         lambda: l_moment_cov(self.trimmed(trim), rng_seed=self.rng_seed))


def _fit_candidate(ctx: AnalysisContext, xi: float, estimation: str, trim: int = 0) -> FitResult:
    data = ctx.trimmed(trim)
    if estimation == "LME":
        fit = fit_fixed_xi_lme(data, xi, lmoms=ctx.lmoments(trim))
        nll = -log_likelihood(fit.params, data)
        return replace(fit, neg_log_lik=float(nll))
    if trim == 0:
        lp, params = ctx.profile().optimum(xi)
        return FitResult(params, True, "MLE_fixed_xi", neg_log_lik=-lp)
    from .fitting import fit_fixed_xi_mle

    return fit_fixed_xi_mle(data, xi)


def _profile_quantile_grid(ci: XiInterval, K: int) -> np.ndarray:
    """Deterministic shape grid: inverse-CDF points of the normalized profile
    density restricted to the confidence interval, at levels (k - 0.5)/K."""
    grid, lp = ci.profile[:, 0], ci.profile[:, 1]
    if K == 1:
        return np.array([grid[np.argmax(lp)]])
    # dense evaluation inside the CI via interpolation of the profile
    fine = np.linspace(ci.lower, ci.upper, 2001)
    lp_fine = np.interp(fine, grid, lp)
    dens = np.exp(lp_fine - lp_fine.max())
    cdf = np.concatenate(([0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(fine))))
    cdf /= cdf[-1]
    levels = (np.arange(1, K + 1) - 0.5) / K
    # cdf is nondecreasing; strictify for interpolation
    keep = np.concatenate(([True], np.diff(cdf) > 0))
    return np.interp(levels, cdf[keep], fine[keep])


def select_candidates(data, config: MaMethodConfig, rng_seed: int = 0,
                      ctx: AnalysisContext | None = None) -> CandidateSet:
    """Construct the K fixed-shape candidate submodels."""
    if ctx is None:
        ctx = AnalysisContext(data, rng_seed)
    if config.starter == "mle":
        ci = ctx.profile_ci(config.alpha_ci)
        xi_grid = _profile_quantile_grid(ci, config.K)
    else:
        ci = ctx.bootstrap_ci(config.alpha_ci, config.boot_B)
        inside = ci.boot_sample[(ci.boot_sample >= ci.lower) & (ci.boot_sample <= ci.upper)]
        levels = (np.arange(1, config.K + 1) - 0.5) / config.K
        xi_grid = np.quantile(inside, levels) if config.K > 1 \
            else np.array([np.median(inside)])
    xi_grid = np.unique(np.clip(xi_grid, -XI_BOUND + 1e-6, XI_BOUND - 1e-6))
    est_trim = config.trim if config.trim_estimation else 0
    fits = []
    for xi in xi_grid:
        try:
            fits.append(_fit_candidate(ctx, float(xi), config.estimation, est_trim))
        except FitError as exc:
            raise FitError(f"candidate fit failed at xi={xi:.4f}") from exc
    return CandidateSet(xi_grid=xi_grid, fits=tuple(fits),
                        est_criterion=config.estimation, starter=config.starter,
                        trim=config.trim)


def _normalize_log_weights(logw: np.ndarray, scheme: str) -> WeightVector:
    finite = np.isfinite(logw)
    if not finite.any():
        raise FitError(f"all candidate weights vanished under scheme {scheme!r}")
    w = np.zeros_like(logw)
    shifted = logw[finite] - logw[finite].max()
    w[finite] = np.exp(shifted)
    w /= w.sum()
    return WeightVector(w=w, scheme=scheme)


def _log_gld_kernels(ctx: AnalysisContext, cands: CandidateSet, trim: int,
                     variant: str) -> np.ndarray:
    V = ctx.lmoment_cov(trim)
    sm = ctx.lmoments(trim)
    logw = np.empty(cands.K)
    for k, params in enumerate(cands.params):
        d = l_moment_distance_vector(sm, params)
        if variant == "med":
            d[0] = sm.robust_center - quantile(params, 0.5)
        logw[k] = -0.5 * generalized_l_distance(d, V)
    return logw


def weights_gld(data, cands: CandidateSet, V: LMomentCov | None = None,
                trim: int = 0, variant: str = "gLd",
                ctx: AnalysisContext | None = None) -> WeightVector:
    """Multivariate-normal weights from the generalized L-moment distance.

    The normalizing constant of the density cancels; only exp(-GLD/2) enters.
    """
    if ctx is None:
        ctx = AnalysisContext(data)
    if V is not None:
        ctx._cache[("lcov", trim)] = V
    return _normalize_log_weights(_log_gld_kernels(ctx, cands, trim, variant), variant)


def _log_aic_kernels(ctx: AnalysisContext, cands: CandidateSet, trim: int) -> np.ndarray:
    trimmed = ctx.trimmed(trim)
    logw = np.empty(cands.K)
    for k, params in enumerate(cands.params):
        ll = log_likelihood(params, trimmed)
        # AIC_k = -2 ll + 2*2 free parameters; exp(-AIC/2) up to a constant
        logw[k] = ll - 2.0 if np.isfinite(ll) else -np.inf
    return logw


def weights_smooth_aic(data, cands: CandidateSet, trim: int = 0,
                       ctx: AnalysisContext | None = None) -> WeightVector:
    """Smooth-AIC weights: proportional to exp(-delta AIC / 2)."""
    if ctx is None:
        ctx = AnalysisContext(data)
    return _normalize_log_weights(_log_aic_kernels(ctx, cands, trim), "smoothAIC")


def bma_prior_hyperparams(xi_hat_lme: float, scheme: str) -> tuple[float, float]:
    """Data-adaptive normal-prior hyperparameters for the shape, keyed on the
    LME shape estimate."""
    if scheme == "gLd":
        mu = 1.5 * max(xi_hat_lme, -0.45)
        sd = max((0.4 + xi_hat_lme) / 4.0 + 0.14, 0.14)
    elif scheme == "like":
        mu = 2.2 * max(xi_hat_lme, -0.5)
        sd = max((0.45 + xi_hat_lme) / 5.0 + 0.11, 0.11)
    else:
        raise ValueError(f"unknown BMA scheme {scheme!r}")
    return mu, sd


def weights_bma(data, cands: CandidateSet, scheme: str = "like",
                V: LMomentCov | None = None, trim: int = 0,
                ctx: AnalysisContext | None = None) -> WeightVector:
    """Bayesian weights: data kernel times a normal prior on each shape value.

    For a nonnegative LME shape estimate the prior is flat and the weights
    coincide with the non-Bayesian scheme.
    """
    if ctx is None:
        ctx = AnalysisContext(data)
    if V is not None:
        ctx._cache[("lcov", trim)] = V
    if scheme == "like":
        log_kernel = _log_aic_kernels(ctx, cands, trim)
    else:
        log_kernel = _log_gld_kernels(ctx, cands, trim, "gLd")
    xi_hat = ctx.lme().params.xi
    if xi_hat < 0:
        mu, sd = bma_prior_hyperparams(xi_hat, scheme)
        log_prior = -0.5 * ((cands.xi_grid - mu) / sd) ** 2 - math.log(sd)
        log_kernel = log_kernel + log_prior
    return _normalize_log_weights(log_kernel, f"bma.{scheme}")


def weights_fcv(data, cands: CandidateSet, test_fraction: float = 0.10,
                ctx: AnalysisContext | None = None) -> WeightVector:
    """Forward-cross-validation weights from held-out largest observations.

    Each candidate is refitted on the training part; held-out order statistics
    are predicted at full-sample plotting positions, scored by the normal
    likelihood with delta-method prediction variances.
    """
    if ctx is None:
        ctx = AnalysisContext(data)
    x = ctx.data  # already sorted ascending
    n = x.size
    n_te = max(1, int(round(test_fraction * n)))
    if n - n_te < 10:
        raise ValueError("training set too small for the requested test fraction")
    train, test = x[: n - n_te], x[n - n_te:]
    ranks = np.arange(n - n_te + 1, n + 1)
    probs = (ranks - 0.5) / n  # non-exceedance plotting positions
    train_lmoms = sample_l_moments(train)
    logw = np.empty(cands.K)
    for k, xi in enumerate(cands.xi_grid):
        if cands.est_criterion == "LME":
            refit = fit_fixed_xi_lme(train, float(xi), lmoms=train_lmoms).params
        else:
            from .fitting import fit_fixed_xi_mle

            refit = fit_fixed_xi_mle(train, float(xi)).params
        pred = np.atleast_1d(quantile(refit, probs))
        s2 = np.array([delta_var_fixed_xi(refit, train, 1.0 - q) for q in probs])
        fcv = float(np.sum((test - pred) ** 2 / s2))
        logw[k] = -0.5 * fcv - 0.5 * np.sum(np.log(2.0 * math.pi * s2))
    return _normalize_log_weights(logw, "fcv")


def compute_weights(ctx: AnalysisContext, cands: CandidateSet,
                    config: MaMethodConfig) -> WeightVector:
    scheme = config.weighting
    if scheme in ("gLd", "med"):
        return weights_gld(None, cands, trim=config.trim, variant=scheme, ctx=ctx)
    if scheme == "smoothAIC":
        return weights_smooth_aic(None, cands, trim=config.trim, ctx=ctx)
    if scheme == "bma.like":
        return weights_bma(None, cands, scheme="like", trim=config.trim, ctx=ctx)
    if scheme == "bma.gLd":
        return weights_bma(None, cands, scheme="gLd", trim=config.trim, ctx=ctx)
    if scheme == "fcv":
        return weights_fcv(None, cands, test_fraction=config.fcv_test_fraction, ctx=ctx)
    raise ValueError(f"unknown weighting scheme {scheme!r}")


def _extend_grid(ctx: AnalysisContext, cands: CandidateSet, config: MaMethodConfig,
                 side: str, n_extra: int = 3) -> CandidateSet:
    grid = cands.xi_grid
    est_trim = config.trim if config.trim_estimation else 0
    if side == "lower":
        step = grid[1] - grid[0] if grid.size > 1 else 0.02
        new = grid[0] - step * np.arange(1, n_extra + 1)
        new = new[new > -XI_BOUND + 1e-6]
    else:
        step = grid[-1] - grid[-2] if grid.size > 1 else 0.02
        new = grid[-1] + step * np.arange(1, n_extra + 1)
        new = new[new < XI_BOUND - 1e-6]
    if new.size == 0:
        return cands
    all_xi = np.concatenate([grid, new])
    order = np.argsort(all_xi)
    fits = list(cands.fits)
    for xi in new:
        fits.append(_fit_candidate(ctx, float(xi), config.estimation, est_trim))
    fits = tuple(fits[i] for i in order)
    return CandidateSet(xi_grid=all_xi[order], fits=fits,
                        est_criterion=cands.est_criterion, starter=cands.starter,
                        trim=cands.trim)


def ma_return_level(data, config: MaMethodConfig, T: float, rng_seed: int = 0,
                    ctx: AnalysisContext | None = None) -> MaEstimate:
    """Full model-averaging pipeline for one method and return period.

    Selects candidates, weights them, adaptively extends the shape grid while
    an edge candidate stays heavy, prunes near-zero weights, and returns the
    weighted return level.
    """
    if ctx is None:
        ctx = AnalysisContext(data, rng_seed)
    cands = select_candidates(None, config, rng_seed, ctx=ctx)
    weights = compute_weights(ctx, cands, config)
    rounds = 0
    for _ in range(3):
        w = weights.w
        grow_lower = w[0] > config.edge_threshold
        grow_upper = w[-1] > config.edge_threshold
        if not (grow_lower or grow_upper):
            break
        before = cands.K
        if grow_lower:
            cands = _extend_grid(ctx, cands, config, "lower")
        if grow_upper:
            cands = _extend_grid(ctx, cands, config, "upper")
        if cands.K == before:
            break
        weights = compute_weights(ctx, cands, config)
        rounds += 1

    w = weights.w
    keep = w > config.prune_threshold
    if keep.sum() < 2:  # retain at least the top two candidates
        keep = np.zeros_like(keep)
        keep[np.argsort(w)[-2:]] = True
    kept_idx = np.nonzero(keep)[0]
    w_kept = w[kept_idx] / w[kept_idx].sum()
    cands_kept = CandidateSet(
        xi_grid=cands.xi_grid[kept_idx],
        fits=tuple(cands.fits[i] for i in kept_idx),
        est_criterion=cands.est_criterion, starter=cands.starter, trim=cands.trim,
    )
    rl = np.array([return_level(p, T) for p in cands_kept.params])
    r_ma = float(w_kept @ rl)
    return MaEstimate(
        r_ma=r_ma, T=float(T),
        weights=WeightVector(w=w_kept, scheme=weights.scheme),
        per_model_rl=rl, candidate_set=cands_kept, config=config,
        extension_rounds=rounds,
    )


def ma_standard_error(estimate: MaEstimate, data, q: int = 3) -> float:
    """Random-weight SE of an MA return level (Dirichlet weight model)."""
    p = 1.0 / estimate.T
    per_var = [delta_var_fixed_xi(params, data, p) for params in estimate.candidate_set.params]
    C = rl_covariance_matrix(estimate.candidate_set.params, per_var)
    var = ma_var_random_weights(estimate.weights.w, estimate.per_model_rl, C, q=q)
    return math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class KSelection:
    K_star: int
    K_prime: int
    K_values: np.ndarray
    estimates: np.ndarray
    se: np.ndarray
    stability: np.ndarray  # d_K for interior K values, nan at the ends
    in_stability_set: np.ndarray
    in_se_set: np.ndarray
    fallback_used: bool = False


def select_K(data, config: MaMethodConfig, T: float,
             K_range: tuple[int, int] = (4, 20), alpha_q: float = 0.6,
             rng_seed: int = 0, ctx: AnalysisContext | None = None) -> KSelection:
    """Automatic submodel-count selection from stability and SE curves.

    Scans K over ``K_range``, computes the MA estimate and its random-weight
    SE, forms the stability measure d_K, and intersects the low-d_K and
    low-SE sets to pick K' and then K*.
    """
    if ctx is None:
        ctx = AnalysisContext(data, rng_seed)
    K_lo, K_hi = K_range
    K_values = np.arange(K_lo, K_hi + 1)
    est = np.empty(K_values.size)
    se = np.empty(K_values.size)
    for i, K in enumerate(K_values):
        cfg = replace(config, K=int(K))
        ma = ma_return_level(None, cfg, T, rng_seed, ctx=ctx)
        est[i] = ma.r_ma
        se[i] = ma_standard_error(ma, ctx.data)

    d = np.full(K_values.size, np.nan)
    for i in range(1, K_values.size - 1):
        d[i] = abs(est[i] - est[i - 1]) + abs(est[i + 1] - est[i])
    interior = ~np.isnan(d)
    d_cut = np.quantile(d[interior], alpha_q)
    se_cut = np.quantile(se, alpha_q)
    in_S = interior & (d <= d_cut)
    in_E = se <= se_cut

    both = np.nonzero(in_S & in_E)[0]
    fallback = both.size == 0
    if fallback:
        s_idx = np.nonzero(in_S)[0]
        if s_idx.size == 0:
            raise FitError("no K value satisfies the stability condition")
        kp_idx = s_idx[np.argmin(se[s_idx])]
    else:
        kp_idx = both[0]
    K_prime = int(K_values[kp_idx])

    neighborhood = in_S & (np.abs(K_values - K_prime) <= 2)
    cand = np.nonzero(neighborhood)[0]
    if cand.size == 0:
        cand = np.array([kp_idx])
    K_star = int(K_values[cand[np.argmin(se[cand])]])
    return KSelection(K_star=K_star, K_prime=K_prime, K_values=K_values,
                      estimates=est, se=se, stability=d,
                      in_stability_set=in_S, in_se_set=in_E, fallback_used=fallback)
