"""A small Monte Carlo comparison of return-level estimators.

Reproduces the structure of a bias / SE / RMSE comparison at desk scale:
samples of size 50 from heavy-tailed GEV truths, four estimators, the 99th
percentile (100-year level) as the target.  Uses two worker processes; the
results are bit-identical to a single-process run with the same seed.

Run:  python3 demos/03_simulation_study.py        (~2 minutes)
"""

from gevma import GevParams, SimConfig, report_table, run_simulation

config = SimConfig(
    true_params=GevParams(100.0, 30.0, -0.2),  # xi is overridden per grid point
    n=50,
    N_reps=100,
    K=8,
    T_targets=(100.0,),
    methods=("MLE", "LME", "Re.MLE2", "MA.like1"),
    xi_grid=(-0.35, -0.2, -0.05),
    rng_seed=42,
    n_workers=2,
)

report = run_simulation(config, progress=True)
print()
print(report_table(report, fmt="markdown"))

print("Reading the table: the MLE overestimates badly for heavy tails")
print("(positive bias, large SE), while averaging trades a small negative")
print("bias for a much smaller RMSE.")
