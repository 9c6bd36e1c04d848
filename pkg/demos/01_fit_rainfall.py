"""Fit the bundled annual-maximum rainfall series with every estimator.

Walks through the basic workflow: load a dataset, fit the five single-model
estimators and the four headline model-averaging methods, and compare their
100-year return levels and standard errors.

Run:  python3 demos/01_fit_rainfall.py
"""

import math


from gevma import (
    AnalysisContext,
    MaMethodConfig,
    bootstrap_se,
    delta_var,
    estimate_return_level,
    fit_lme,
    fit_mle,
    fit_mle_cd,
    fit_remle,
    load_haenam,
    ma_return_level,
    ma_standard_error,
    return_level,
)

T = 100.0
ds = load_haenam()
data = ds.values
print(f"dataset: {ds.name} (n={ds.n}, {ds.units}), years "
      f"{ds.years.min()}-{ds.years.max()}")
print(f"range: {data.min():.1f} .. {data.max():.1f} {ds.units}\n")

# --- single-model fits ------------------------------------------------------
# The five classical estimators: full MLE, L-moments (LME), the two
# restricted MLEs (likelihood maximized subject to matching one or two
# sample L-moments), and the shape-penalized MLE.
print(f"{'method':10s} {'mu':>7s} {'sigma':>7s} {'xi':>8s} {'RL100':>8s} {'SE':>7s}")
for name, fit in [
    ("MLE", fit_mle(data)),
    ("LME", fit_lme(data)),
    ("Re.MLE1", fit_remle(data, 1)),
    ("Re.MLE2", fit_remle(data, 2)),
    ("MLE.CD", fit_mle_cd(data)),
]:
    p = fit.params
    rl = float(return_level(p, T))
    if name == "MLE":
        se = math.sqrt(delta_var(p, data, 1.0 / T))
        se_s = f"{se:7.1f}"
    else:
        se_s = "      -"
    print(f"{name:10s} {p.mu:7.2f} {p.sigma:7.2f} {p.xi:8.4f} {rl:8.1f} {se_s}")

# --- model averaging --------------------------------------------------------
# Each MA method averages the return levels of K fixed-shape submodels placed
# along a confidence interval for the shape.  The context caches the profile
# likelihood and L-moment covariance so the methods share the expensive parts.
print()
ctx = AnalysisContext(data, rng_seed=0)
for method in ("MA.gLd1", "MA.gLd2", "MA.like0", "MA.like1", "BMA.like"):
    est = ma_return_level(data, MaMethodConfig(method=method), T, ctx=ctx)
    se = ma_standard_error(est, ctx.data)
    print(f"{method:10s} {'':7s} {'':7s} {'':8s} {est.r_ma:8.1f} {se:7.1f}"
          f"   (K_eff={est.K_effective})")

# --- a bootstrap cross-check for one method ---------------------------------
print()
se_b = bootstrap_se(data, lambda x: estimate_return_level(x, "LME", T), T,
                    B=200, rng_seed=0)
print(f"LME bootstrap SE (B=200): {se_b:.1f}")
print("\nThe averaged estimates sit between the heavy-tailed MLE and the "
      "lighter LME,\nwith markedly smaller standard errors than the MLE.")
