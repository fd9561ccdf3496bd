"""Review test: rolling out-of-sample failure counting for the three measures.

For every window the three risk estimates are fitted on the in-sample returns
and compared against the realized next-period loss (the negated next return).
A failure is a strict exceedance: realized loss > estimate.  Ties pass, which
matches the strict inequality in the quantile definition.
"""

from dataclasses import dataclass

from scipy.stats import binom

from .empirical_dist import EmpiricalDistribution
from .market_data import ReturnSeries, WindowSpec, windows
from .risk_measures import (
    WeightingMeasure,
    tail_var_exact,
    value_at_risk,
    weighted_var,
)

__all__ = ["BacktestResult", "run_review_test", "classify_result"]

MEASURE_NAMES = ("var", "tvar", "wvar")


@dataclass(frozen=True)
class BacktestResult:
    """Failure counts for one risk measure over a walked series."""

    measure_name: str
    total_tests: int
    failures: int
    failure_dates: tuple

    def __post_init__(self):
        if not 0 <= self.failures <= self.total_tests:
            raise ValueError(
                f"failures {self.failures} out of range for {self.total_tests} tests"
            )
        if len(self.failure_dates) != self.failures:
            raise ValueError("failure_dates must list exactly one date per failure")

    @property
    def failure_rate(self) -> float:
        return self.failures / self.total_tests


def run_review_test(
    series: ReturnSeries,
    spec: WindowSpec,
    level: float = 0.05,
    measure: WeightingMeasure = None,
    outer_panels: int = 64,
) -> list:
    """Walk the series, estimate V@R / Tail-V@R / Weighted-V@R per window, and
    count strict exceedances of each estimate by the realized loss.

    Returns one BacktestResult per measure, in ``MEASURE_NAMES`` order.  Every
    estimate uses only data strictly before the observation it is tested on.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"backtest level must lie in (0, 1), got {level!r}")
    if measure is None:
        measure = WeightingMeasure.uniform()
    failure_dates = {name: [] for name in MEASURE_NAMES}
    total = 0
    for window in windows(series, spec):
        dist = EmpiricalDistribution.from_samples(window.in_sample.returns)
        estimates = {
            "var": value_at_risk(dist, level),
            "tvar": float(tail_var_exact(dist, level)),
            "wvar": weighted_var(dist, measure, outer_panels=outer_panels),
        }
        realized_loss = -window.next_return
        total += 1
        for name in MEASURE_NAMES:
            if realized_loss > estimates[name]:
                failure_dates[name].append(window.next_date)
    return [
        BacktestResult(
            measure_name=name,
            total_tests=total,
            failures=len(failure_dates[name]),
            failure_dates=tuple(failure_dates[name]),
        )
        for name in MEASURE_NAMES
    ]


def binomial_band(total_tests: int, level: float, coverage: float) -> tuple:
    """Equal-tail acceptance band on failure counts from the exact binomial CDF:
    the central ``coverage`` region of Binomial(total_tests, level)."""
    alpha = 1.0 - coverage
    low = int(binom.ppf(alpha / 2.0, total_tests, level))
    high = int(binom.ppf(1.0 - alpha / 2.0, total_tests, level))
    return low, high


def classify_result(result: BacktestResult, level: float, band_coverage: float = 0.95) -> str:
    """Verdict for a backtest: "risk estimated high" when the measure proved
    conservative (failure rate below the level), "risk estimated low" when it
    underestimated, "consistent" when the failure count sits inside the
    equal-tail binomial band of the given coverage.

    ``band_coverage=None`` disables the band and applies the bare directional
    rule, which is how the verdicts in historical review tables are assigned.
    """
    if result.total_tests <= 0:
        raise ValueError("cannot classify a backtest with zero tests")
    if band_coverage is not None:
        low, high = binomial_band(result.total_tests, level, band_coverage)
        if low <= result.failures <= high:
            return "consistent"
    rate = result.failure_rate
    if rate < level:
        return "risk estimated high"
    if rate > level:
        return "risk estimated low"
    return "consistent"
