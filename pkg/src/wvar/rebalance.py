"""Monthly-rebalanced strategy comparison on date-aligned return series.

Each calendar month in the evaluation span gets portfolio weights fitted on
all data strictly before that month (expanding window).  Weights are held
fixed within the month (daily rebalancing back to target), the realized daily
portfolio returns are pooled over the whole span, and each strategy reports
the mean and the uniform-measure Weighted-V@R of that pooled sample.
"""

import datetime as dt
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .empirical_dist import EmpiricalDistribution
from .errors import DataError
from .portfolio import (
    ScalarizationParams,
    auto_penalty,
    profile_from_returns,
    project_to_simplex,
    solve_mean_variance,
    solve_weighted_quadratic,
)
from .risk_measures import WeightingMeasure, weighted_var

__all__ = [
    "StrategySpec",
    "PerformanceReport",
    "ComparisonRow",
    "DEFAULT_RISK_AVERSIONS",
    "build_strategy_grid",
    "fit_month_weights",
    "run_rebalance",
    "compare_strategies",
]

METHODS = ("mean-wvar-quadratic", "mean-variance")

# Risk-aversion grid and bucket labels used when none are supplied.
DEFAULT_RISK_AVERSIONS = (
    (1e4, "High Risk"),
    (1e2, "Middle Risk"),
    (1.0, "Low Risk"),
    (1e-2, "Very Low Risk"),
)


@dataclass(frozen=True)
class StrategySpec:
    """One strategy cell: optimizer method plus its scalarization settings.

    ``penalty=None`` lets each monthly solve pick a budget penalty large
    enough for that month's data scale.
    """

    method: str
    risk_aversion: float
    penalty: Optional[float] = None
    measure: Optional[WeightingMeasure] = None
    variance_power: int = 2
    label: Optional[str] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.risk_aversion < 0.0:
            raise ValueError(f"risk aversion must be >= 0, got {self.risk_aversion!r}")
        if self.penalty is not None and self.penalty <= 0.0:
            raise ValueError(f"penalty must be positive, got {self.penalty!r}")

    @property
    def bucket(self) -> str:
        return self.label if self.label is not None else f"m={self.risk_aversion:g}"


@dataclass(frozen=True)
class PerformanceReport:
    """Out-of-sample summary for one strategy over the evaluation span."""

    strategy: StrategySpec
    oos_mean: float
    oos_wvar: float
    monthly_weights: tuple


@dataclass(frozen=True)
class ComparisonRow:
    """One risk-aversion bucket: both strategies side by side."""

    bucket: str
    risk_aversion: float
    methods: tuple
    oos_means: tuple
    oos_wvars: tuple
    higher_mean: str
    lower_wvar: str


def build_strategy_grid(
    risk_aversions=None,
    penalty: Optional[float] = None,
    measure: Optional[WeightingMeasure] = None,
    variance_power: int = 2,
) -> list:
    """Both methods crossed with each (risk_aversion, label) pair."""
    if risk_aversions is None:
        risk_aversions = DEFAULT_RISK_AVERSIONS
    grid = []
    for entry in risk_aversions:
        aversion, label = entry if isinstance(entry, tuple) else (entry, None)
        for method in METHODS:
            grid.append(
                StrategySpec(
                    method=method,
                    risk_aversion=aversion,
                    penalty=penalty,
                    measure=measure,
                    variance_power=variance_power,
                    label=label,
                )
            )
    return grid


def _aligned_matrix(series_list) -> tuple:
    if len(series_list) < 2:
        raise DataError("need at least two return series")
    dates = series_list[0].dates
    for series in series_list[1:]:
        if series.dates != dates:
            raise DataError(
                f"return series {series.asset_id!r} is not date-aligned with "
                f"{series_list[0].asset_id!r}"
            )
    matrix = np.stack([series.returns for series in series_list], axis=1)
    return dates, matrix


def fit_month_weights(series_list, strategy: StrategySpec, month_first_day: dt.date) -> np.ndarray:
    """Simplex weights for the month starting at ``month_first_day``, fitted on
    all observations strictly before that day."""
    dates, matrix = _aligned_matrix(series_list)
    in_sample = matrix[[d < month_first_day for d in dates]]
    if in_sample.shape[0] < 2:
        raise DataError(
            f"not enough history before {month_first_day.isoformat()} "
            f"({in_sample.shape[0]} observations)"
        )
    if strategy.method == "mean-wvar-quadratic":
        profiles = [
            profile_from_returns(series.asset_id, in_sample[:, j], measure=strategy.measure)
            for j, series in enumerate(series_list)
        ]
        penalty = strategy.penalty
        if penalty is None:
            penalty = auto_penalty(profiles, strategy.risk_aversion)
        params = ScalarizationParams(risk_aversion=strategy.risk_aversion, penalty=penalty)
        solution = solve_weighted_quadratic(profiles, params)
        return project_to_simplex(solution.weights)
    # mean-variance
    means = in_sample.mean(axis=0)
    covariance = np.cov(in_sample, rowvar=False, ddof=1)
    params = ScalarizationParams(
        risk_aversion=strategy.risk_aversion,
        penalty=strategy.penalty if strategy.penalty is not None else 1e8,
    )
    solution = solve_mean_variance(
        means, covariance, params, variance_power=strategy.variance_power
    )
    return project_to_simplex(solution.weights)


def run_rebalance(
    series_list,
    strategy: StrategySpec,
    evaluation_start: dt.date,
    outer_panels: int = 64,
) -> PerformanceReport:
    """Monthly-rebalance the strategy from ``evaluation_start`` to the end of
    the aligned series and summarize the realized daily portfolio returns."""
    dates, matrix = _aligned_matrix(series_list)
    eval_months = sorted({(d.year, d.month) for d in dates if d >= evaluation_start})
    if not eval_months:
        raise DataError(f"no observations on or after {evaluation_start.isoformat()}")

    monthly_weights = []
    realized = []
    for year, month in eval_months:
        month_first = dt.date(year, month, 1)
        weights = fit_month_weights(series_list, strategy, month_first)
        monthly_weights.append((month_first, weights))
        in_month = [
            i
            for i, d in enumerate(dates)
            if (d.year, d.month) == (year, month) and d >= evaluation_start
        ]
        realized.extend(matrix[in_month].dot(weights))

    realized = np.asarray(realized)
    dist = EmpiricalDistribution.from_samples(realized)
    return PerformanceReport(
        strategy=strategy,
        oos_mean=float(realized.mean()),
        oos_wvar=weighted_var(dist, WeightingMeasure.uniform(), outer_panels=outer_panels),
        monthly_weights=tuple(monthly_weights),
    )


def compare_strategies(reports: Sequence[PerformanceReport]) -> list:
    """Pair up reports by risk-aversion bucket and flag, per bucket, which
    strategy realized the higher mean and which the lower Weighted-V@R."""
    if len(reports) < 2:
        raise ValueError("need at least two performance reports to compare")
    buckets = {}
    for report in reports:
        key = (report.strategy.bucket, report.strategy.risk_aversion)
        buckets.setdefault(key, []).append(report)
    rows = []
    for (bucket, aversion), pair in buckets.items():
        if len(pair) != 2:
            raise ValueError(
                f"bucket {bucket!r} has {len(pair)} reports; expected exactly 2"
            )
        first, second = pair
        if first.oos_mean > second.oos_mean:
            higher_mean = first.strategy.method
        elif second.oos_mean > first.oos_mean:
            higher_mean = second.strategy.method
        else:
            higher_mean = "tie"
        if first.oos_wvar < second.oos_wvar:
            lower_wvar = first.strategy.method
        elif second.oos_wvar < first.oos_wvar:
            lower_wvar = second.strategy.method
        else:
            lower_wvar = "tie"
        rows.append(
            ComparisonRow(
                bucket=bucket,
                risk_aversion=aversion,
                methods=(first.strategy.method, second.strategy.method),
                oos_means=(first.oos_mean, second.oos_mean),
                oos_wvars=(first.oos_wvar, second.oos_wvar),
                higher_mean=higher_mean,
                lower_wvar=lower_wvar,
            )
        )
    return rows
