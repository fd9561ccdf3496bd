"""Historical-simulation risk measurement and portfolio construction.

Core objects: :class:`~wvar.empirical_dist.EmpiricalDistribution` carries a
return sample; :mod:`~wvar.risk_measures` computes loss-positive V@R,
Tail-V@R and Weighted-V@R from it; :mod:`~wvar.backtest` counts failures of
those estimates out of sample; :mod:`~wvar.portfolio` and
:mod:`~wvar.rebalance` build and evaluate portfolios from per-asset means and
Weighted-V@R values.
"""

from .empirical_dist import EmpiricalDistribution
from .errors import DataError, NumericalError, SingularSystemError
from .market_data import (
    CsvSchema,
    PriceSeries,
    ReturnSeries,
    WindowSpec,
    compute_returns,
    load_price_csv,
    windows,
)
from .quadrature import SimpsonGrid, composite_simpson, half_node_simpson
from .risk_measures import (
    RiskReport,
    WeightingMeasure,
    risk_report,
    tail_var_exact,
    tail_var_simpson,
    value_at_risk,
    weighted_var,
    weighted_var_uniform_closed_form,
    worst_case_loss,
)
from .backtest import BacktestResult, classify_result, run_review_test
from .portfolio import (
    AssetProfile,
    PortfolioSolution,
    ScalarizationParams,
    profile_from_returns,
    project_to_simplex,
    solve_linear_scalarization,
    solve_mean_variance,
    solve_weighted_quadratic,
    total_revenue,
    whole_wvar,
)
from .rebalance import (
    DEFAULT_RISK_AVERSIONS,
    PerformanceReport,
    StrategySpec,
    build_strategy_grid,
    compare_strategies,
    run_rebalance,
)

__version__ = "0.1.0"
