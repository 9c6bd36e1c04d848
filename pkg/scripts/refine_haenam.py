"""Refine the reconstructed series against the published comparison targets.

Starts from an interpolant of two earlier calibration solutions and runs a
damped SVD-truncated Gauss-Newton on tolerance-normalized residuals covering
exactly the quantities compared against the published fits:

  * full MLE (mu, sigma, xi) and its 100-year return level,
  * the first three sample L-moments (which pin the LME fit exactly),
  * the 100-year return levels of the lambda1-restricted MLE and the
    shape-penalized MLE.

Saves the refined (unrounded) series to scripts/_haenam_refined.npy.
"""

import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).parent))
from reconstruct_haenam import lmoment_targets, sample_lmoments  # noqa: E402

from gevma.fitting import fit_lme, fit_mle, fit_mle_cd, fit_remle  # noqa: E402
from gevma.gev import return_level  # noqa: E402

HERE = pathlib.Path(__file__).parent
LM_T = lmoment_targets()
# acceptance half-widths for each residual row
TOL = np.array([0.5, 0.5, 0.01, 5.694, 0.05, 0.05, 0.05, 5.371, 5.135])
TARGET = np.array([112.6, 35.10, -0.394, 569.4, 0.0, 0.0, 0.0, 537.1, 513.5])


def raw_values(x):
    xs = np.sort(x)
    pm = fit_mle(xs).params
    p1 = fit_remle(xs, 1).params
    pc = fit_mle_cd(xs).params
    lm = sample_lmoments(xs) - LM_T
    return np.array([
        pm.mu, pm.sigma, pm.xi, float(return_level(pm, 100)),
        lm[0], lm[1], lm[2],
        float(return_level(p1, 100)),
        float(return_level(pc, 100)),
    ])


def resid(x):
    return (raw_values(x) - TARGET) / TOL


def monitor(x):
    xs = np.sort(x)
    p2 = fit_remle(xs, 2).params
    pl = fit_lme(xs).params
    return float(return_level(p2, 100)), float(return_level(pl, 100))


def jacobian(x, h=0.02):
    n = x.size
    J = np.empty((TOL.size, n))
    for j in range(n):
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        J[:, j] = (resid(xp) - resid(xm)) / (2 * h)
    return J


def main():
    xa = np.sort(np.load(HERE / "_haenam_newton.npy"))
    xb = np.sort(np.load(HERE / "_haenam_newton2.npy"))
    x = np.sort(0.3 * xa + 0.7 * xb)

    r = resid(x)
    print("start |r| =", np.linalg.norm(r), np.round(r, 3), flush=True)

    for it in range(8):
        dev = np.abs(r * TOL)
        if np.all(dev < 0.8 * TOL):
            print("converged: all residuals inside 0.8 * tolerance", flush=True)
            break
        t0 = time.time()
        J = jacobian(x)
        U, s, Vt = np.linalg.svd(J, full_matrices=False)
        keep = s > 1e-4 * s[0]
        step = -(Vt[keep].T * (1.0 / s[keep])) @ (U[:, keep].T @ r)
        ns = np.linalg.norm(step)
        if ns > 15.0:
            step *= 15.0 / ns
        best, best_r, best_t = None, np.linalg.norm(r), 0.0
        for t in (1.0, 0.5, 0.25, 0.125, 0.0625):
            cand = np.sort(x + t * step)
            rc = resid(cand)
            if np.linalg.norm(rc) < best_r:
                best, best_r, best_t = (cand, rc), np.linalg.norm(rc), t
                break
        if best is None:
            print("no descent; stopping", flush=True)
            break
        x, r = best[0], best[1]
        r2, rl_lme = monitor(x)
        print(f"iter {it}: |r|={best_r:.4e} t={best_t} "
              f"dev={np.round(r * TOL, 3)} r2={r2:.1f} lme={rl_lme:.1f} "
              f"({time.time() - t0:.0f}s)", flush=True)

    np.save(HERE / "_haenam_refined.npy", x)
    vals = raw_values(x)
    print("final values:", np.round(vals, 4), flush=True)
    print("final dev/tol:", np.round((vals - TARGET) / TOL, 3), flush=True)

    # confirm the rounded series still passes
    xr = np.round(np.sort(x), 1)
    vr = raw_values(xr)
    print("rounded dev/tol:", np.round((vr - TARGET) / TOL, 3), flush=True)
    r2, rl_lme = monitor(xr)
    print(f"rounded r2={r2:.1f} lme={rl_lme:.1f}", flush=True)


if __name__ == "__main__":
    main()
