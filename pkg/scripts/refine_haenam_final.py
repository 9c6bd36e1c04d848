"""Last targeted polish: pull the surrogate location inside tolerance.

Greedy search on the 0.1 mm lattice from the rounded stage-2 state.  All
rows are hinged at 97% of tolerance except the gLd-average SE, which is
held at no-worse-than-current (it is structurally out of reach; see the
decisions ledger).
"""

import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).parent))
from refine_haenam import HERE  # noqa: E402
from refine_haenam_ma import TARGET_MA, TOL_MA, raw_values_ma  # noqa: E402

GLD_SE_ROW = 11


def objective(x):
    rel = np.abs(raw_values_ma(np.sort(x)) - TARGET_MA) / TOL_MA
    hinge = np.maximum(0.0, rel - 0.97)
    hinge[GLD_SE_ROW] = max(0.0, rel[GLD_SE_ROW] - 1.40)
    return float(np.sum(hinge**2)), rel


def main():
    rng = np.random.default_rng(5)
    x = np.round(np.sort(np.load(HERE / "_haenam_refined_ma2.npy")), 1)
    best, rel = objective(x)
    print(f"start obj={best:.5f} rel={np.round(rel, 2)}", flush=True)
    t0 = time.time()
    tries = accepts = 0
    while time.time() - t0 < 2400 and best > 0.0:
        m = int(rng.integers(1, 3))
        idx = rng.choice(x.size, size=m, replace=False)
        cand = x.copy()
        steps = rng.integers(1, 4, size=m) * rng.choice([-1, 1], size=m)
        cand[idx] = np.round(cand[idx] + 0.1 * steps, 1)
        val, rel_c = objective(cand)
        tries += 1
        if val < best:
            x, best = np.sort(cand), val
            accepts += 1
            np.save(HERE / "_haenam_final.npy", x)
            print(f"[{time.time()-t0:6.0f}s] obj={best:.5f} acc={accepts}/{tries} "
                  f"rel={np.round(rel_c, 2)}", flush=True)

    np.save(HERE / "_haenam_final.npy", x)
    val, rel_f = objective(x)
    print(f"final: obj={val:.5f} rel={np.round(rel_f, 3)}", flush=True)


if __name__ == "__main__":
    main()
