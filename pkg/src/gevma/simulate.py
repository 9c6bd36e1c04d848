"""Monte Carlo comparison harness for return-level estimators.

Replicates are seeded by (seed, shape-index, replicate) so every method sees
the same data within a replicate, and reports are bit-identical regardless
of how many worker processes are used.
"""

from __future__ import annotations

import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .averaging import METHOD_TABLE, AnalysisContext, MaMethodConfig, ma_return_level
from .fitting import FitError, fit_lme, fit_mle, fit_mle_cd, fit_remle
from .gev import GevParams, return_level, sample
from .lmom import DegenerateSampleError
from .variance import SingularInformationError

DEFAULT_XI_GRID = (-0.45, -0.40, -0.35, -0.30, -0.25,
                   -0.20, -0.15, -0.10, -0.05, -0.001)

_SINGLE_FIT = {
    "MLE": fit_mle,
    "LME": fit_lme,
    "MLE.CD": fit_mle_cd,
    "Re.MLE1": lambda x: fit_remle(x, variant=1),
    "Re.MLE2": lambda x: fit_remle(x, variant=2),
}

DEFAULT_METHODS = ("MLE", "LME", "MA.gLd1", "MA.like1")


@dataclass(frozen=True)
class SimConfig:
    true_params: GevParams = GevParams(100.0, 30.0, -0.2)
    n: int = 50
    N_reps: int = 1000
    K: int = 12
    B_boot: int = 500
    T_targets: tuple = (100.0, 200.0)
    methods: tuple = DEFAULT_METHODS
    rng_seed: int = 0
    xi_grid: tuple = DEFAULT_XI_GRID
    n_workers: int = 1

    def __post_init__(self):
        if self.n < 20:
            raise ValueError("n must be >= 20")
        if self.N_reps < 1:
            raise ValueError("N_reps must be >= 1")
        for m in self.methods:
            if m not in _SINGLE_FIT and m not in METHOD_TABLE:
                raise ValueError(f"unknown method {m!r}")
        object.__setattr__(self, "T_targets", tuple(float(t) for t in self.T_targets))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "xi_grid", tuple(float(x) for x in self.xi_grid))


@dataclass(frozen=True)
class SimCell:
    bias: float
    se: float
    rmse: float
    failures: int


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    cells: dict  # (method, xi, T) -> SimCell

    def cell(self, method: str, xi: float, T: float) -> SimCell:
        return self.cells[(method, float(xi), float(T))]


def estimate_return_level(data, method: str, T: float, K: int = 12,
                          B: int = 500, rng_seed: int = 0,
                          ctx: AnalysisContext | None = None) -> float:
    """Point estimate of the T-year return level by any named method."""
    if method in _SINGLE_FIT:
        return float(return_level(_SINGLE_FIT[method](np.asarray(data, float)).params, T))
    cfg = MaMethodConfig(method=method, K=K, boot_B=B)
    return ma_return_level(data, cfg, T, rng_seed=rng_seed, ctx=ctx).r_ma


def _replicate(config: SimConfig, xi_idx: int, r: int):
    """One replicate: simulate a sample, run every method at every T."""
    xi = config.xi_grid[xi_idx]
    ss = np.random.SeedSequence(entropy=config.rng_seed, spawn_key=(xi_idx, r))
    rng = np.random.default_rng(ss)
    truth = replace(config.true_params, xi=xi)
    data = sample(truth, config.n, rng)
    # derived integer seed for any internal resampling (bootstrap CIs)
    sub_seed = int(ss.generate_state(1)[0])
    ctx = AnalysisContext(data, rng_seed=sub_seed)
    out = np.full((len(config.methods), len(config.T_targets)), np.nan)
    for i, method in enumerate(config.methods):
        for j, T in enumerate(config.T_targets):
            try:
                out[i, j] = estimate_return_level(
                    data, method, T, K=config.K, B=config.B_boot,
                    rng_seed=sub_seed, ctx=ctx)
            except (FitError, DegenerateSampleError, SingularInformationError,
                    ValueError, np.linalg.LinAlgError):
                out[i, j] = np.nan
    return xi_idx, r, out


def _replicate_star(args):
    return _replicate(*args)


def run_simulation(config: SimConfig, progress: bool = False) -> SimReport:
    """Run the full grid of (shape, replicate) cells and aggregate.

    Bias, SE, and RMSE all use divisor N over the successful replicates, so
    rmse^2 = bias^2 + se^2 holds exactly.  Failed fits are excluded and
    counted per cell.
    """
    tasks = [(config, xi_idx, r)
             for xi_idx in range(len(config.xi_grid))
             for r in range(config.N_reps)]
    results = np.full((len(config.xi_grid), config.N_reps,
                       len(config.methods), len(config.T_targets)), np.nan)
    if config.n_workers > 1:
        with ProcessPoolExecutor(max_workers=config.n_workers) as pool:
            it = pool.map(_replicate_star, tasks, chunksize=4)
            for done, (xi_idx, r, out) in enumerate(it, 1):
                results[xi_idx, r] = out
                if progress and done % 50 == 0:
                    print(f"  {done}/{len(tasks)} replicates", file=sys.stderr)
    else:
        for done, task in enumerate(tasks, 1):
            xi_idx, r, out = _replicate_star(task)
            results[xi_idx, r] = out
            if progress and done % 50 == 0:
                print(f"  {done}/{len(tasks)} replicates", file=sys.stderr)

    cells = {}
    for xi_idx, xi in enumerate(config.xi_grid):
        truth = replace(config.true_params, xi=xi)
        for j, T in enumerate(config.T_targets):
            r_true = return_level(truth, T)
            for i, method in enumerate(config.methods):
                vals = results[xi_idx, :, i, j]
                ok = vals[np.isfinite(vals)]
                failures = int(config.N_reps - ok.size)
                if ok.size == 0:
                    cells[(method, xi, T)] = SimCell(math.nan, math.nan,
                                                    math.nan, failures)
                    continue
                bias = float(ok.mean() - r_true)
                se = float(np.sqrt(np.mean((ok - ok.mean()) ** 2)))
                rmse = float(np.sqrt(np.mean((ok - r_true) ** 2)))
                cells[(method, xi, T)] = SimCell(bias, se, rmse, failures)
    return SimReport(config=config, cells=cells)


def _config_dict(config: SimConfig) -> dict:
    return {
        "true_params": list(config.true_params.as_array()),
        "n": config.n, "N_reps": config.N_reps, "K": config.K,
        "B_boot": config.B_boot, "T_targets": list(config.T_targets),
        "methods": list(config.methods), "rng_seed": config.rng_seed,
        "xi_grid": list(config.xi_grid), "n_workers": config.n_workers,
    }


def config_from_dict(d: dict) -> SimConfig:
    d = dict(d)
    if "true_params" in d:
        d["true_params"] = GevParams(*d["true_params"])
    try:
        return SimConfig(**d)
    except TypeError as exc:
        raise ValueError(f"bad simulation config: {exc}") from exc


def report_table(report: SimReport, fmt: str = "csv") -> str:
    """Serialize the report grid: methods as rows, shape values as columns,
    one row per (measure, method, T)."""
    xi_vals = report.config.xi_grid
    measures = ("bias", "se", "rmse", "failures")
    if fmt == "json":
        payload = {
            "config": _config_dict(report.config),
            "cells": [
                {"method": m, "xi": xi, "T": T, "bias": c.bias, "se": c.se,
                 "rmse": c.rmse, "failures": c.failures}
                for (m, xi, T), c in report.cells.items()
            ],
        }
        return json.dumps(payload, indent=2)
    rows = []
    for T in report.config.T_targets:
        for measure in measures:
            for m in report.config.methods:
                vals = []
                for xi in xi_vals:
                    c = report.cell(m, xi, T)
                    v = getattr(c, measure)
                    vals.append(str(v) if measure == "failures" else f"{v:.1f}")
                rows.append((f"{T:g}", measure, m, vals))
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("T,measure,method," + ",".join(f"{x:g}" for x in xi_vals) + "\n")
        for T, measure, m, vals in rows:
            buf.write(f"{T},{measure},{m}," + ",".join(vals) + "\n")
        return buf.getvalue()
    if fmt == "markdown":
        head = "| T | measure | method | " + " | ".join(f"{x:g}" for x in xi_vals) + " |"
        sep = "|" + "---|" * (3 + len(xi_vals))
        lines = [head, sep]
        for T, measure, m, vals in rows:
            lines.append(f"| {T} | {measure} | {m} | " + " | ".join(vals) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_report(text: str) -> SimReport:
    """Inverse of ``report_table(report, 'json')``."""
    payload = json.loads(text)
    config = config_from_dict(payload["config"])
    cells = {}
    for c in payload["cells"]:
        cells[(c["method"], float(c["xi"]), float(c["T"]))] = SimCell(
            bias=c["bias"], se=c["se"], rmse=c["rmse"], failures=c["failures"])
    return SimReport(config=config, cells=cells)
