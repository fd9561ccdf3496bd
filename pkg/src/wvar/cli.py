"""Command-line entry point: risk, backtest, optimize, and compare subcommands.

Every flag's default can be overridden through an environment variable named
``WVAR_<FLAG>`` (dashes become underscores, upper-cased); explicit argv values
win over the environment.  Reports carry no timestamps, so identical inputs
produce byte-identical output.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical error.
"""

import argparse
import csv
import datetime as dt
import io
import json
import os
import sys
import tempfile

import numpy as np

from .backtest import classify_result, run_review_test
from .empirical_dist import EmpiricalDistribution
from .errors import DataError, NumericalError
from .market_data import WindowSpec, compute_returns, load_price_csv
from .portfolio import (
    AssetProfile,
    ScalarizationParams,
    auto_penalty,
    profile_from_returns,
    solve_linear_scalarization,
    solve_mean_variance,
    solve_weighted_quadratic,
)
from .rebalance import (
    DEFAULT_RISK_AVERSIONS,
    build_strategy_grid,
    compare_strategies,
    run_rebalance,
)
from .risk_measures import WeightingMeasure, risk_report

ENV_PREFIX = "WVAR_"
METHOD_COLUMN = {"mean-wvar-quadratic": "Mean-WV@R", "mean-variance": "Mean-Variance"}


def _env_name(flag: str) -> str:
    return ENV_PREFIX + flag.lstrip("-").replace("-", "_").upper()


def _add_option(parser, flag, *, default=None, type=str, required=False, help="", choices=None):
    env = os.environ.get(_env_name(flag))
    if env is not None:
        default = type(env) if type is not None else env
        required = False
    if default is not None:
        help = f"{help} (default: {default})"
    parser.add_argument(
        flag, default=default, type=type, required=required, help=f"{help} [env {_env_name(flag)}]",
        choices=choices,
    )


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"{text!r} invalid: must lie strictly between 0 and 1")
    return value


def _even_positive(text: str) -> int:
    value = int(text)
    if value <= 0 or value % 2 != 0:
        raise argparse.ArgumentTypeError(f"{text!r} invalid: must be a positive even integer")
    return value


def _iso_date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!r} invalid: expected ISO date YYYY-MM-DD") from exc


def _parse_measure(spec: str) -> WeightingMeasure:
    if spec == "uniform":
        return WeightingMeasure.uniform()
    if spec.startswith("atom:"):
        level = float(spec.split(":", 1)[1])
        if not 0.0 < level <= 1.0:
            raise ValueError(f"--measure atom level must lie in (0, 1], got {level!r}")
        return WeightingMeasure.single_atom(level)
    try:
        with open(spec) as handle:
            values = [float(line) for line in handle if line.strip()]
    except OSError as exc:
        raise DataError(f"cannot read density file {spec!r}: {exc}") from exc
    return WeightingMeasure.from_density(values)


def _convention(measure: WeightingMeasure, inner_panels=None, outer_panels=None) -> dict:
    block = {
        "sign": "loss-positive (0.03 means a 3% loss)",
        "quantile": "right-continuous empirical order statistic x_(floor(n*s)+1)",
        "weighting_measure": measure.describe(),
    }
    if inner_panels is not None:
        block["inner_panels"] = inner_panels
    if outer_panels is not None:
        block["outer_panels"] = outer_panels
    return block


def _write_text(path, text: str):
    """Write atomically so no partial report survives a failure."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".wvar-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _load_returns(path, min_length=2):
    series_list = [compute_returns(p) for p in load_price_csv(path)]
    for series in series_list:
        if len(series) < min_length:
            raise DataError(f"{series.asset_id}: need at least {min_length} returns")
    return series_list


def _cmd_risk(args) -> int:
    measure = _parse_measure(args.measure)
    assets = []
    for series in _load_returns(args.input):
        dist = EmpiricalDistribution.from_samples(series.returns)
        report = risk_report(dist, args.level, measure, outer_panels=args.outer_panels)
        assets.append(
            {
                "asset_id": series.asset_id,
                "n_samples": dist.n,
                "var": report.var,
                "tvar": report.tvar,
                "wvar": report.wvar,
            }
        )
    payload = {
        "level": args.level,
        "convention": _convention(measure, args.inner_panels, args.outer_panels),
        "assets": assets,
    }
    _write_text(args.output, _json_text(payload))
    return 0


def _cmd_backtest(args) -> int:
    measure = _parse_measure(args.measure)
    spec = WindowSpec(mode=args.window_mode, length=args.window_length, step=args.step)
    assets = []
    for series in _load_returns(args.input):
        results = run_review_test(
            series, spec, level=args.level, measure=measure, outer_panels=args.outer_panels
        )
        assets.append(
            {
                "asset_id": series.asset_id,
                "measures": [
                    {
                        "measure_name": r.measure_name,
                        "total_tests": r.total_tests,
                        "failures": r.failures,
                        "failure_rate": r.failure_rate,
                        "verdict": classify_result(r, args.level),
                        "failure_dates": [d.isoformat() for d in r.failure_dates],
                    }
                    for r in results
                ],
            }
        )
    payload = {
        "level": args.level,
        "window": {"mode": spec.mode, "length": spec.length, "step": spec.step},
        "convention": _convention(measure, outer_panels=args.outer_panels),
        "assets": assets,
    }
    _write_text(args.report, _json_text(payload))
    return 0


def _read_weights_file(path) -> dict:
    """Optional per-asset preference weights: CSV with columns
    asset_id,risk_weight,revenue_weight."""
    try:
        with open(path, newline="") as handle:
            rows = list(csv.DictReader(handle))
    except OSError as exc:
        raise DataError(f"cannot read weights file {path!r}: {exc}") from exc
    table = {}
    for row in rows:
        try:
            table[row["asset_id"]] = (float(row["risk_weight"]), float(row["revenue_weight"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(
                f"{path!r}: expected columns asset_id,risk_weight,revenue_weight"
            ) from exc
    return table


def _cmd_optimize(args) -> int:
    measure = _parse_measure(args.measure)
    series_list = _load_returns(args.input)
    preference = _read_weights_file(args.weights_file) if args.weights_file else {}
    profiles = []
    for series in series_list:
        risk_weight, revenue_weight = preference.get(series.asset_id, (1.0, 1.0))
        profiles.append(
            profile_from_returns(
                series.asset_id,
                series.returns,
                measure=measure,
                outer_panels=args.outer_panels,
                risk_weight=risk_weight,
                revenue_weight=revenue_weight,
            )
        )

    penalty = args.penalty
    if penalty is None:
        penalty = auto_penalty(profiles, args.risk_aversion)
    params = ScalarizationParams(risk_aversion=args.risk_aversion, penalty=penalty)

    if args.method == "lp":
        solution = solve_linear_scalarization(profiles, params)
    elif args.method == "quadratic":
        solution = solve_weighted_quadratic(profiles, params)
    else:
        matrix = np.stack([series.returns for series in series_list], axis=1)
        solution = solve_mean_variance(
            matrix.mean(axis=0),
            np.cov(matrix, rowvar=False, ddof=1),
            params,
            variance_power=args.variance_power,
        )

    payload = {
        "method": solution.method,
        "risk_aversion": args.risk_aversion,
        "penalty": penalty,
        "assets": [
            {
                "asset_id": p.asset_id,
                "mean_return": p.mean_return,
                "wvar": p.wvar,
                "risk_weight": p.risk_weight,
                "revenue_weight": p.revenue_weight,
            }
            for p in profiles
        ],
        "weights": solution.weights.tolist(),
        "projected_weights": (
            solution.projected_weights.tolist()
            if solution.projected_weights is not None
            else None
        ),
        "objective_value": solution.objective_value,
        "gradient_residual": solution.gradient_residual,
        "budget_residual": solution.budget_residual,
        "feasible": solution.feasible,
        "condition_estimate": solution.condition_estimate,
        "warnings": list(solution.warnings),
        "convention": _convention(measure, outer_panels=args.outer_panels),
    }
    _write_text(args.output, _json_text(payload))
    return 0


def _comparison_csv(rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    for row in rows:
        order = sorted(range(2), key=lambda i: row.methods[i] != "mean-wvar-quadratic")
        names = [METHOD_COLUMN.get(row.methods[i], row.methods[i]) for i in order]
        writer.writerow([row.bucket] + names)
        writer.writerow(["Mean"] + [repr(float(row.oos_means[i])) for i in order])
        writer.writerow(["WV@R"] + [repr(float(row.oos_wvars[i])) for i in order])
        writer.writerow(["Higher mean", METHOD_COLUMN.get(row.higher_mean, row.higher_mean)])
        writer.writerow(["Lower WV@R", METHOD_COLUMN.get(row.lower_wvar, row.lower_wvar)])
        writer.writerow([])
    return buffer.getvalue()


def _cmd_compare(args) -> int:
    measure = _parse_measure(args.measure)
    series_list = _load_returns(args.assets)
    if args.risk_aversions is None:
        aversions = DEFAULT_RISK_AVERSIONS
    else:
        values = [float(v) for v in args.risk_aversions.split(",") if v.strip()]
        if not values:
            raise ValueError("--risk-aversions must list at least one value")
        aversions = [(v, f"m={v:g}") for v in values]
    grid = build_strategy_grid(
        aversions, penalty=args.penalty, measure=measure, variance_power=args.variance_power
    )
    reports = [
        run_rebalance(series_list, strategy, args.eval_start, outer_panels=args.outer_panels)
        for strategy in grid
    ]
    rows = compare_strategies(reports)
    _write_text(args.output, _comparison_csv(rows))

    if args.weights_json:
        payload = {
            "evaluation_start": args.eval_start.isoformat(),
            "intra_month": "weights held fixed within each month (daily rebalance to target)",
            "convention": _convention(measure, outer_panels=args.outer_panels),
            "strategies": [
                {
                    "method": report.strategy.method,
                    "bucket": report.strategy.bucket,
                    "risk_aversion": report.strategy.risk_aversion,
                    "oos_mean": report.oos_mean,
                    "oos_wvar": report.oos_wvar,
                    "monthly_weights": [
                        [month.isoformat(), weights.tolist()]
                        for month, weights in report.monthly_weights
                    ],
                }
                for report in reports
            ],
        }
        _write_text(args.weights_json, _json_text(payload))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wvar",
        description="Historical-simulation V@R / Tail-V@R / Weighted-V@R engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    risk = sub.add_parser("risk", help="risk measures per asset on the full sample")
    _add_option(risk, "--input", required=True, help="price CSV (date column + one column per asset)")
    _add_option(risk, "--level", default=0.05, type=_probability, help="confidence tail level")
    _add_option(risk, "--measure", default="uniform", help="uniform | atom:LEVEL | density file")
    _add_option(risk, "--inner-panels", default=128, type=_even_positive, help="Simpson panels for Tail-V@R cross-checks")
    _add_option(risk, "--outer-panels", default=64, type=_even_positive, help="Simpson panels for the Weighted-V@R level integral")
    _add_option(risk, "--output", default="-", help="JSON report path, - for stdout")
    risk.set_defaults(handler=_cmd_risk)

    backtest = sub.add_parser("backtest", help="rolling review test with failure counting")
    _add_option(backtest, "--input", required=True, help="price CSV")
    _add_option(backtest, "--level", default=0.05, type=_probability, help="confidence tail level")
    _add_option(backtest, "--measure", default="uniform", help="uniform | atom:LEVEL | density file")
    _add_option(backtest, "--window-mode", default="rolling", choices=["rolling", "expanding"], help="window style")
    _add_option(backtest, "--window-length", default=250, type=int, help="in-sample observations (minimum for expanding)")
    _add_option(backtest, "--step", default=1, type=int, help="window advance")
    _add_option(backtest, "--outer-panels", default=64, type=_even_positive, help="Simpson panels for Weighted-V@R")
    _add_option(backtest, "--report", default="-", help="JSON report path, - for stdout")
    backtest.set_defaults(handler=_cmd_backtest)

    optimize = sub.add_parser("optimize", help="single portfolio solve from price history")
    _add_option(optimize, "--input", required=True, help="price CSV")
    _add_option(optimize, "--method", default="quadratic", choices=["lp", "quadratic", "mean-variance"], help="scalarization")
    _add_option(optimize, "--risk-aversion", default=1.0, type=float, help="risk aversion m")
    _add_option(optimize, "--penalty", default=None, type=float, help="budget penalty J (default: auto-scaled)")
    _add_option(optimize, "--weights-file", default=None, help="CSV asset_id,risk_weight,revenue_weight")
    _add_option(optimize, "--measure", default="uniform", help="uniform | atom:LEVEL | density file")
    _add_option(optimize, "--outer-panels", default=64, type=_even_positive, help="Simpson panels for Weighted-V@R")
    _add_option(optimize, "--variance-power", default=2, type=int, help="variance exponent for mean-variance (1 or 2)")
    _add_option(optimize, "--output", default="-", help="JSON report path, - for stdout")
    optimize.set_defaults(handler=_cmd_optimize)

    compare = sub.add_parser("compare", help="monthly-rebalanced strategy comparison")
    _add_option(compare, "--assets", required=True, help="price CSV with at least two assets")
    _add_option(compare, "--eval-start", required=True, type=_iso_date, help="first evaluation day (ISO)")
    _add_option(compare, "--risk-aversions", default=None, help="comma list of m values (default: 1e4,1e2,1,1e-2 labeled High..Very Low)")
    _add_option(compare, "--penalty", default=None, type=float, help="budget penalty J (default: auto-scaled per month)")
    _add_option(compare, "--measure", default="uniform", help="fitting measure: uniform | atom:LEVEL | density file")
    _add_option(compare, "--outer-panels", default=64, type=_even_positive, help="Simpson panels for Weighted-V@R")
    _add_option(compare, "--variance-power", default=2, type=int, help="variance exponent for mean-variance (1 or 2)")
    _add_option(compare, "--output", default="-", help="comparison CSV path, - for stdout")
    _add_option(compare, "--weights-json", default=None, help="optional JSON dump of monthly weights")
    compare.set_defaults(handler=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except DataError as exc:
        print(f"wvar {args.command}: data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"wvar {args.command}: numerical error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"wvar {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
