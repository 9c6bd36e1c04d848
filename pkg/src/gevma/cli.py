"""Command-line front end: fitting reports, K-selection diagnostics,
simulation runs, and bootstrap standard errors.  All outputs are plain
CSV/JSON files with provenance headers."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .averaging import (
    METHOD_TABLE,
    AnalysisContext,
    MaMethodConfig,
    ma_return_level,
    ma_standard_error,
    select_K,
)
from .datasets import DataError, ingest, load_haenam
from .fitting import FitError
from .gev import quantile, return_level
from .lmom import DegenerateSampleError
from .simulate import (
    _SINGLE_FIT,
    config_from_dict,
    report_table,
    run_simulation,
)
from .surrogate import surrogate_of_estimate
from .variance import SingularInformationError, bma_variance, delta_var, delta_var_fixed_xi

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_NUMERIC_ERRORS = (FitError, DegenerateSampleError, SingularInformationError,
                   ValueError, np.linalg.LinAlgError)

ALL_METHODS = tuple(_SINGLE_FIT) + tuple(METHOD_TABLE)


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _provenance(args: argparse.Namespace) -> list[str]:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return [
        f"# gevma {__version__}",
        f"# seed: {getattr(args, 'seed', None)}",
        f"# config: {json.dumps(resolved, default=str)}",
    ]


def _write_csv(path, header_lines, columns, rows):
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return f"{v:.6g}"
    return str(v)


def _load_data(args):
    if args.data:
        return ingest(args.data)
    return load_haenam()


def _ma_config(method: str, args) -> MaMethodConfig:
    return MaMethodConfig(method=method, K=args.k,
                          alpha_ci=1.0 - args.ci_level,
                          starter=args.starter, boot_B=args.boot or 500)


def _method_curve(data, method, T_grid, args, seed, ctx=None):
    """Return-level curve over T_grid, plus per-candidate detail for MA."""
    T_grid = np.asarray(T_grid, dtype=float)
    if method in _SINGLE_FIT:
        params = _SINGLE_FIT[method](np.asarray(data, float)).params
        return np.atleast_1d(return_level(params, T_grid)), params, None
    cfg = _ma_config(method, args)
    est = ma_return_level(data, cfg, float(T_grid[0]), rng_seed=seed, ctx=ctx)
    per = np.array([np.atleast_1d(return_level(p, T_grid))
                    for p in est.candidate_set.params])
    return est.weights.w @ per, None, est


def cmd_fit(args) -> int:
    dataset = _load_data(args)
    data = dataset.values
    os.makedirs(args.out, exist_ok=True)
    header = _provenance(args)
    T_list = args.return_periods
    n = data.size
    x_sorted = np.sort(data)
    probs = (np.arange(1, n + 1) - 0.5) / n
    # log-spaced return-period grid for the curve files, plus the requested T
    T_grid = np.unique(np.concatenate(
        [np.geomspace(2.0, 1000.0, 25), np.asarray(T_list, float)]))

    ctx = AnalysisContext(data, rng_seed=args.seed)
    report_rows = []
    report_json = []
    failures = []
    for method in args.methods:
        try:
            row = _fit_one_method(method, dataset, ctx, args, header,
                                  T_list, T_grid, x_sorted, probs)
        except _NUMERIC_ERRORS as exc:
            failures.append(method)
            print(f"warning: {method} failed: {exc}", file=sys.stderr)
            report_json.append({"method": method, "error": str(exc)})
            continue
        report_rows.append(row["csv"])
        report_json.append(row["json"])

    if not report_rows:
        print("error: every requested method failed", file=sys.stderr)
        return EXIT_NUMERIC

    columns = ["method", "mu", "sigma", "xi", "K_effective"]
    for T in T_list:
        columns += [f"rl_{T:g}", f"asym_se_{T:g}", f"boot_se_{T:g}"]
    _write_csv(os.path.join(args.out, "fit_report.csv"), header, columns,
               report_rows)
    payload = {"version": __version__, "seed": args.seed,
               "dataset": {"name": dataset.name, "n": dataset.n},
               "methods": report_json}
    with open(os.path.join(args.out, "fit_report.json"), "w") as fh:
        json.dump(payload, fh, indent=2)
    return EXIT_OK


def _fit_one_method(method, dataset, ctx, args, header, T_list, T_grid,
                    x_sorted, probs):
    data = ctx.data
    curve, params, est = _method_curve(data, method, T_grid, args,
                                       args.seed, ctx=ctx)
    is_ma = est is not None

    if is_ma:
        sur = surrogate_of_estimate(est).params
        mu, sigma, xi = sur.mu, sur.sigma, sur.xi
        K_eff = est.K_effective
        w = est.weights.w
        cand_params = est.candidate_set.params
        fitted_q = w @ np.array([np.atleast_1d(quantile(p, probs))
                                 for p in cand_params])
    else:
        mu, sigma, xi = params.mu, params.sigma, params.xi
        K_eff = 1
        fitted_q = np.atleast_1d(quantile(params, probs))

    # QQ data at the standard plotting positions
    _write_csv(os.path.join(args.out, f"qq_{method}.csv"), header,
               ["prob", "observed", "fitted"],
               list(zip(probs, x_sorted, fitted_q)))

    # weight-vs-shape profile (MA methods only)
    if is_ma:
        rl_T0 = np.array([return_level(p, T_list[0]) for p in cand_params])
        _write_csv(os.path.join(args.out, f"weights_{method}.csv"), header,
                   ["xi", "mu", "sigma", "weight", f"rl_{T_list[0]:g}"],
                   [(p.xi, p.mu, p.sigma, wk, r)
                    for p, wk, r in zip(cand_params, w, rl_T0)])

    # asymptotic SEs
    asym = {}
    for T in T_list:
        p = 1.0 / T
        try:
            if is_ma:
                if method.startswith("BMA"):
                    per_var = [delta_var_fixed_xi(q, data, p) for q in cand_params]
                    asym[T] = math.sqrt(bma_variance(w, [return_level(q, T)
                                                         for q in cand_params],
                                                     per_var).total)
                else:
                    est_T = ma_return_level(data, _ma_config(method, args), T,
                                            rng_seed=args.seed, ctx=ctx)
                    asym[T] = ma_standard_error(est_T, data)
            elif method in ("MLE", "MLE.CD"):
                asym[T] = math.sqrt(delta_var(params, data, p))
            else:
                asym[T] = math.nan
        except _NUMERIC_ERRORS:
            asym[T] = math.nan

    # bootstrap: curves for the confidence band, scalars for the SE
    boot_se = {T: math.nan for T in T_list}
    if args.boot > 0:
        rng = np.random.default_rng(args.seed)
        curves = []
        for _ in range(args.boot):
            res = rng.choice(data, size=data.size, replace=True)
            try:
                c, _, _ = _method_curve(res, method, T_grid, args, args.seed)
                curves.append(c)
            except _NUMERIC_ERRORS:
                continue
        if len(curves) > 1:
            curves = np.array(curves)
            lo = np.quantile(curves, 0.025, axis=0)
            hi = np.quantile(curves, 0.975, axis=0)
            for T in T_list:
                col = curves[:, np.argmin(np.abs(T_grid - T))]
                boot_se[T] = float(col.std(ddof=1))
            T0 = T_list[0]
            col0 = curves[:, np.argmin(np.abs(T_grid - T0))]
            _write_csv(os.path.join(args.out, f"boot_dist_{method}.csv"),
                       header, [f"rl_{T0:g}"], [(v,) for v in col0])
        else:
            lo = hi = np.full_like(curve, np.nan)
    else:
        lo = hi = np.full_like(curve, np.nan)

    _write_csv(os.path.join(args.out, f"rl_curve_{method}.csv"), header,
               ["T", "estimate", "lower", "upper"],
               list(zip(T_grid, curve, lo, hi)))

    rl = {T: float(curve[np.argmin(np.abs(T_grid - T))]) for T in T_list}
    csv_row = [method, mu, sigma, xi, K_eff]
    for T in T_list:
        csv_row += [rl[T], asym[T], boot_se[T]]
    js = {"method": method, "mu": mu, "sigma": sigma, "xi": xi,
          "K_effective": K_eff,
          "return_levels": {f"{T:g}": rl[T] for T in T_list},
          "asymptotic_se": {f"{T:g}": asym[T] for T in T_list},
          "bootstrap_se": {f"{T:g}": boot_se[T] for T in T_list}}
    if is_ma:
        js["weights"] = [float(v) for v in w]
        js["xi_grid"] = [float(p.xi) for p in cand_params]
    return {"csv": csv_row, "json": js}


def cmd_select_k(args) -> int:
    dataset = _load_data(args)
    method = args.methods[0]
    if method in _SINGLE_FIT:
        print(f"error: {method} is not a model-averaging method", file=sys.stderr)
        return EXIT_USAGE
    T = args.return_periods[0]
    cfg = _ma_config(method, args)
    try:
        sel = select_K(dataset.values, cfg, T, rng_seed=args.seed)
    except _NUMERIC_ERRORS as exc:
        print(f"error: K selection failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = args.out
    if os.path.isdir(out) or not out.endswith(".csv"):
        os.makedirs(out, exist_ok=True)
        out = os.path.join(out, "select_k.csv")
    rows = []
    for i, K in enumerate(sel.K_values):
        rows.append((int(K), sel.estimates[i], sel.stability[i], sel.se[i],
                     int(sel.in_stability_set[i]), int(sel.in_se_set[i]),
                     int(K == sel.K_prime), int(K == sel.K_star)))
    _write_csv(out, _provenance(args),
               ["K", "estimate", "d_K", "se", "in_stability_set", "in_se_set",
                "is_K_prime", "is_K_star"], rows)
    print(f"K* = {sel.K_star}, K' = {sel.K_prime}")
    return EXIT_OK


def _parse_sim_config(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        return json.loads(text)
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if "," in val:
            parts = [p.strip() for p in val.split(",") if p.strip()]
            out[key] = [json.loads(p) if _is_json(p) else p for p in parts]
        else:
            out[key] = json.loads(val) if _is_json(val) else val
    return out


def _is_json(token: str) -> bool:
    try:
        json.loads(token)
        return True
    except (ValueError, TypeError):
        return False


def cmd_simulate(args) -> int:
    try:
        raw = _parse_sim_config(args.config)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for single in ("methods", "T_targets", "xi_grid"):
        if single in raw and not isinstance(raw[single], list):
            raw[single] = [raw[single]]
    if args.seed is not None:
        raw["rng_seed"] = args.seed
    try:
        config = config_from_dict(raw)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    os.makedirs(args.out, exist_ok=True)
    report = run_simulation(config, progress=True)
    header = _provenance(args)
    ext = {"csv": "csv", "json": "json", "markdown": "md"}[args.format]
    body = report_table(report, args.format)
    path = os.path.join(args.out, f"report.{ext}")
    with open(path, "w") as fh:
        if args.format != "json":
            fh.write("\n".join(header) + "\n")
        fh.write(body)
    with open(os.path.join(args.out, "resolved_config.json"), "w") as fh:
        json.dump(json.loads(report_table(report, "json"))["config"], fh, indent=2)
    print(f"report written to {path}")
    return EXIT_OK


def cmd_bootstrap_se(args) -> int:
    dataset = _load_data(args)
    data = dataset.values
    rows = []
    any_ok = False
    for method in args.methods:
        for T in args.return_periods:
            rng = np.random.default_rng(args.seed)
            values = []
            fails = 0
            for _ in range(args.boot):
                res = rng.choice(data, size=data.size, replace=True)
                try:
                    ctx = AnalysisContext(res, rng_seed=args.seed)
                    curve, _, _ = _method_curve(res, method, [T], args,
                                                args.seed, ctx=ctx)
                    values.append(float(curve[0]))
                except _NUMERIC_ERRORS:
                    fails += 1
            if len(values) > 1:
                se = float(np.std(values, ddof=1))
                any_ok = True
            else:
                se = math.nan
            rows.append((method, T, se, fails))
    if not any_ok:
        print("error: every requested method failed", file=sys.stderr)
        return EXIT_NUMERIC
    out = args.out
    if os.path.isdir(out) or not out.endswith((".csv", ".json")):
        os.makedirs(out, exist_ok=True)
        out = os.path.join(out, f"bootstrap_se.{args.format if args.format != 'markdown' else 'csv'}")
    if out.endswith(".json"):
        payload = {"version": __version__, "seed": args.seed,
                   "results": [{"method": m, "T": T, "se": se, "failures": f}
                               for m, T, se, f in rows]}
        with open(out, "w") as fh:
            json.dump(payload, fh, indent=2)
    else:
        _write_csv(out, _provenance(args),
                   ["method", "T", "boot_se", "failures"], rows)
    print(f"bootstrap SEs written to {out}")
    return EXIT_OK


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _add_common(p: argparse.ArgumentParser, methods_default: str):
    p.add_argument("--data", help="input CSV (single column or year,value); "
                                  "defaults to the bundled rainfall series")
    p.add_argument("--methods", type=_csv_list, default=_csv_list(methods_default),
                   help=f"comma-separated method names from: {', '.join(ALL_METHODS)}")
    p.add_argument("--return-periods", type=_float_list, default=[100.0, 200.0],
                   help="comma-separated return periods in years")
    p.add_argument("--boot", type=int, default=500,
                   help="bootstrap resamples (0 disables bootstrap outputs)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=12, help="number of submodels")
    p.add_argument("--ci-level", type=float, default=0.95,
                   help="confidence level of the shape interval for candidates")
    p.add_argument("--starter", choices=("mle", "lme"), default="mle",
                   help="shape-interval construction: profile likelihood (mle) "
                        "or nonparametric bootstrap (lme)")
    p.add_argument("--out", default="gevma_out", help="output directory or file")
    p.add_argument("--format", choices=("csv", "json", "markdown"), default="csv")


def build_parser() -> _Parser:
    parser = _Parser(prog="gevma",
                     description="Model-averaged GEV return-level estimation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_fit = sub.add_parser("fit", help="fit methods and write report files")
    _add_common(p_fit, "MLE,LME,MA.gLd1,MA.like1")
    p_fit.set_defaults(func=cmd_fit)

    p_k = sub.add_parser("select-k", help="submodel-count selection diagnostics")
    _add_common(p_k, "MA.like1")
    p_k.set_defaults(func=cmd_select_k)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo comparison")
    p_sim.add_argument("config", help="JSON or key=value simulation config file")
    p_sim.add_argument("--out", default="gevma_sim")
    p_sim.add_argument("--format", choices=("csv", "json", "markdown"),
                       default="csv")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="overrides rng_seed from the config file")
    p_sim.set_defaults(func=cmd_simulate)

    p_b = sub.add_parser("bootstrap-se", help="nonparametric bootstrap SEs")
    _add_common(p_b, "MLE,LME")
    p_b.set_defaults(func=cmd_bootstrap_se)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in getattr(args, "methods", []):
        if name not in ALL_METHODS:
            print(f"error: unknown method {name!r}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
