"""Portfolio construction from per-asset mean returns and Weighted-V@R values.

The bi-objective model (maximize weighted revenue, minimize the aggregate
risk bound sum_i k_i * WVAR_i * x_i over the simplex) is collapsed two ways:

* ``solve_linear_scalarization`` -- the linear trade-off
  min sum_i (-m_i R_i + m k_i WVAR_i) x_i on the simplex, whose optimum is a
  vertex;
* ``solve_weighted_quadratic`` -- the penalized squared form
  min -(X'M)^2 + m (X'A)^2 + J (c'X - 1)^2 with M_i = m_i R_i,
  A_i = k_i WVAR_i, c = ones, solved in closed form from its stationarity
  system (-MM' + m AA' + J cc') X = J c.

The closed form ignores the nonnegativity constraint, so the raw stationary
point may leave the simplex; ``project_to_simplex`` is the bridge back, and
solutions report both raw and projected weights.  The squared objective is
nonconvex (the revenue term is concave), so the stationary point is checked
against the second-order condition and flagged when it is a saddle.

``solve_mean_variance`` is the benchmark analog with variance in place of the
risk bound; its objective is quartic in x, so it is minimized numerically on
the simplex rather than in closed form.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .empirical_dist import EmpiricalDistribution
from .errors import NumericalError, SingularSystemError
from .risk_measures import WeightingMeasure, weighted_var

__all__ = [
    "AssetProfile",
    "ScalarizationParams",
    "PortfolioSolution",
    "profile_from_returns",
    "whole_wvar",
    "total_revenue",
    "quadratic_objective",
    "mean_variance_objective",
    "solve_linear_scalarization",
    "solve_weighted_quadratic",
    "solve_mean_variance",
    "project_to_simplex",
    "minimum_penalty",
    "auto_penalty",
]

# J must dominate the squared data scale for the budget penalty to bite.
PENALTY_SCALE_FACTOR = 1e6
DEFAULT_PENALTY = 1e8
RESIDUAL_LIMIT = 1e-8
ILL_CONDITION_WARN = 1e14


@dataclass(frozen=True)
class AssetProfile:
    """Per-asset inputs: mean return, Weighted-V@R, and the two preference weights."""

    asset_id: str
    mean_return: float
    wvar: float
    risk_weight: float = 1.0
    revenue_weight: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.mean_return) and np.isfinite(self.wvar)):
            raise ValueError(f"{self.asset_id}: mean return and wvar must be finite")
        if self.risk_weight <= 0.0 or self.revenue_weight <= 0.0:
            raise ValueError(f"{self.asset_id}: preference weights must be positive")


@dataclass(frozen=True)
class ScalarizationParams:
    """Risk aversion m >= 0 and budget-penalty factor J > 0."""

    risk_aversion: float = 1.0
    penalty: float = DEFAULT_PENALTY

    def __post_init__(self):
        if self.risk_aversion < 0.0 or not np.isfinite(self.risk_aversion):
            raise ValueError(f"risk aversion must be finite and >= 0, got {self.risk_aversion!r}")
        if self.penalty <= 0.0 or not np.isfinite(self.penalty):
            raise ValueError(f"penalty must be finite and > 0, got {self.penalty!r}")


@dataclass(frozen=True)
class PortfolioSolution:
    """Solver output; residuals are recomputed from the returned weights."""

    weights: np.ndarray
    objective_value: float
    gradient_residual: float
    budget_residual: float
    feasible: bool
    method: str
    projected_weights: Optional[np.ndarray] = None
    condition_estimate: Optional[float] = None
    warnings: tuple = field(default=())


def profile_from_returns(
    asset_id: str,
    returns,
    measure: Optional[WeightingMeasure] = None,
    outer_panels: int = 64,
    risk_weight: float = 1.0,
    revenue_weight: float = 1.0,
) -> AssetProfile:
    """Fit an AssetProfile (mean return + Weighted-V@R) from a return sample."""
    arr = np.asarray(returns, dtype=float)
    dist = EmpiricalDistribution.from_samples(arr)
    return AssetProfile(
        asset_id=asset_id,
        mean_return=float(arr.mean()),
        wvar=weighted_var(dist, measure, outer_panels=outer_panels),
        risk_weight=risk_weight,
        revenue_weight=revenue_weight,
    )


def _vectors(profiles: Sequence[AssetProfile]):
    """Revenue vector M_i = m_i R_i and risk vector A_i = k_i WVAR_i."""
    if not profiles:
        raise ValueError("need at least one asset profile")
    revenue = np.array([p.revenue_weight * p.mean_return for p in profiles])
    risk = np.array([p.risk_weight * p.wvar for p in profiles])
    return revenue, risk


def _check_weight_vector(profiles: Sequence[AssetProfile], x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (len(profiles),):
        raise ValueError(f"weight vector has shape {arr.shape}, expected ({len(profiles)},)")
    if np.any(arr < 0.0):
        raise ValueError(f"weights must be nonnegative, got {arr!r}")
    return arr


def whole_wvar(profiles: Sequence[AssetProfile], x) -> float:
    """Aggregate risk bound sum_i k_i * WVAR_i * x_i.

    By coherence (subadditivity plus positive homogeneity) this weighted sum
    bounds the Weighted-V@R of the pooled position from above.
    """
    arr = _check_weight_vector(profiles, x)
    _, risk = _vectors(profiles)
    return float(risk.dot(arr))


def total_revenue(profiles: Sequence[AssetProfile], x) -> float:
    """Preference-weighted expected revenue sum_i m_i * R_i * x_i."""
    arr = _check_weight_vector(profiles, x)
    revenue, _ = _vectors(profiles)
    return float(revenue.dot(arr))


def minimum_penalty(profiles: Sequence[AssetProfile], risk_aversion: float) -> float:
    """Smallest admissible budget penalty for the quadratic scalarization."""
    revenue, risk = _vectors(profiles)
    scale = max(np.abs(revenue).max(), risk_aversion * np.abs(risk).max())
    return PENALTY_SCALE_FACTOR * scale**2


def auto_penalty(profiles: Sequence[AssetProfile], risk_aversion: float) -> float:
    """Default penalty: at least DEFAULT_PENALTY, with 10x headroom over the minimum."""
    return max(DEFAULT_PENALTY, 10.0 * minimum_penalty(profiles, risk_aversion))


def quadratic_objective(profiles: Sequence[AssetProfile], params: ScalarizationParams, x) -> float:
    """-(X'M)^2 + m (X'A)^2 + J (c'X - 1)^2 at an arbitrary weight vector."""
    arr = np.asarray(x, dtype=float)
    revenue, risk = _vectors(profiles)
    budget = arr.sum() - 1.0
    return float(
        -revenue.dot(arr) ** 2
        + params.risk_aversion * risk.dot(arr) ** 2
        + params.penalty * budget**2
    )


def solve_linear_scalarization(
    profiles: Sequence[AssetProfile], params: ScalarizationParams
) -> PortfolioSolution:
    """Minimize the linear trade-off sum_i (-m_i R_i + m k_i WVAR_i) x_i on the
    simplex.  The objective is linear, so the optimum is the vertex with the
    lowest per-asset score; exact ties go to the lowest index."""
    revenue, risk = _vectors(profiles)
    scores = -revenue + params.risk_aversion * risk
    best = int(np.argmin(scores))
    weights = np.zeros(len(profiles))
    weights[best] = 1.0
    return PortfolioSolution(
        weights=weights,
        objective_value=float(scores[best]),
        gradient_residual=float(scores[best] - scores.min()),
        budget_residual=abs(float(weights.sum()) - 1.0),
        feasible=True,
        method="linear",
    )


def solve_weighted_quadratic(
    profiles: Sequence[AssetProfile], params: ScalarizationParams
) -> PortfolioSolution:
    """Closed-form stationary point of the penalized quadratic scalarization.

    Solves (-MM' + m AA' + J cc') X = J c.  The returned weights are the raw
    stationary point; ``projected_weights`` carries its Euclidean projection
    onto the simplex.  Warnings flag a saddle (indefinite Hessian), severe
    ill-conditioning, and the minimum-norm fallback used when the system is
    singular but consistent.
    """
    revenue, risk = _vectors(profiles)
    n = len(profiles)
    floor = minimum_penalty(profiles, params.risk_aversion)
    if params.penalty < floor:
        raise ValueError(
            f"penalty {params.penalty:g} too small for the data scale; "
            f"need at least {floor:g} for the budget penalty to dominate"
        )
    ones = np.ones(n)
    system = (
        -np.outer(revenue, revenue)
        + params.risk_aversion * np.outer(risk, risk)
        + params.penalty * np.outer(ones, ones)
    )
    condition = float(np.linalg.cond(system))
    warnings = []

    def relative_residual(x):
        if not np.isfinite(x).all():
            return np.inf
        return np.abs(system.dot(x) - params.penalty * ones).max() / params.penalty

    # The system matrix is a sum of three rank-one terms, so beyond three
    # assets it is singular by construction while the system itself stays
    # consistent (the penalty vector lies in its range).  Use the literal
    # inverse when it works; otherwise return the minimum-norm solution.
    solution = None
    try:
        candidate = np.linalg.solve(system, params.penalty * ones)
        if relative_residual(candidate) <= 1e-12:
            solution = candidate
    except np.linalg.LinAlgError:
        candidate = None
    if solution is None:
        min_norm = np.linalg.lstsq(system, params.penalty * ones, rcond=None)[0]
        if candidate is None or relative_residual(min_norm) < relative_residual(candidate):
            solution = min_norm
            warnings.append(
                f"system is singular or near-singular (condition estimate {condition:.3g}); "
                "returned the minimum-norm stationary solution"
            )
        else:
            solution = candidate
    residual = relative_residual(solution)
    if residual > RESIDUAL_LIMIT:
        raise SingularSystemError(
            f"stationarity system is numerically unsolvable "
            f"(relative residual {residual:.3g}, condition estimate {condition:.3g})",
            condition_estimate=condition,
        )
    # Second-order check on the budget hyperplane, where the penalty curvature
    # vanishes and -MM' + mAA' rules: negative curvature there means the
    # stationary point is a saddle, not a minimum.
    correction = system - params.penalty * np.outer(ones, ones)
    projector = np.eye(n) - np.outer(ones, ones) / n
    reduced = projector.dot(correction).dot(projector)
    scale = np.abs(reduced).max()
    if scale > 0.0 and np.linalg.eigvalsh(reduced)[0] < -1e-9 * scale:
        warnings.append(
            "second-order check failed: stationary point is a saddle of the "
            "unconstrained objective"
        )
    if condition > ILL_CONDITION_WARN:
        warnings.append(f"system is ill-conditioned (estimate {condition:.3g})")

    gradient = 2.0 * (system.dot(solution) - params.penalty * ones)
    return PortfolioSolution(
        weights=solution,
        objective_value=quadratic_objective(profiles, params, solution),
        gradient_residual=float(np.abs(gradient).max()),
        budget_residual=abs(float(solution.sum()) - 1.0),
        feasible=bool(np.all(solution >= -1e-12)),
        method="weighted-quadratic",
        projected_weights=project_to_simplex(solution),
        condition_estimate=condition,
        warnings=tuple(warnings),
    )


def project_to_simplex(x) -> np.ndarray:
    """Euclidean projection onto {w : sum(w) = 1, w >= 0} by the sort-and-threshold rule."""
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("cannot project an empty vector")
    descending = np.sort(arr)[::-1]
    cumulative = np.cumsum(descending) - 1.0
    indices = np.arange(1, arr.size + 1)
    support = descending - cumulative / indices > 0
    rho = int(np.nonzero(support)[0][-1]) + 1
    threshold = cumulative[rho - 1] / rho
    return np.maximum(arr - threshold, 0.0)


def mean_variance_objective(
    mean_returns,
    covariance,
    params: ScalarizationParams,
    x,
    variance_power: int = 2,
) -> float:
    """-(sum R_i x_i)^2 + m * (x' Cov x)^p + J (sum x_i - 1)^2."""
    arr = np.asarray(x, dtype=float)
    mu = np.asarray(mean_returns, dtype=float)
    cov = np.asarray(covariance, dtype=float)
    budget = arr.sum() - 1.0
    variance = float(arr.dot(cov).dot(arr))
    return float(
        -mu.dot(arr) ** 2
        + params.risk_aversion * variance**variance_power
        + params.penalty * budget**2
    )


def _mean_variance_gradient(mu, cov, params, x, variance_power):
    variance = float(x.dot(cov).dot(x))
    grad = -2.0 * mu.dot(x) * mu
    grad = grad + params.risk_aversion * variance_power * variance ** (variance_power - 1) * 2.0 * cov.dot(x)
    grad = grad + 2.0 * params.penalty * (x.sum() - 1.0) * np.ones_like(x)
    return grad


def solve_mean_variance(
    mean_returns,
    covariance,
    params: ScalarizationParams,
    variance_power: int = 2,
) -> PortfolioSolution:
    """Minimize the squared-revenue / powered-variance trade-off on the simplex.

    The variance term makes the objective quartic in x (with the default
    ``variance_power=2``), so there is no closed form: two assets use a dense
    grid over the simplex segment plus bounded local refinement, more assets
    use projected gradient descent from the uniform portfolio.
    """
    mu = np.asarray(mean_returns, dtype=float).ravel()
    cov = np.asarray(covariance, dtype=float)
    n = mu.size
    if cov.shape != (n, n):
        raise ValueError(f"covariance shape {cov.shape} does not match {n} assets")
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(cov).max())):
        raise NumericalError("covariance must be symmetric")
    eigenvalues = np.linalg.eigvalsh(cov)
    if eigenvalues[0] < -1e-8 * max(1.0, abs(eigenvalues[-1])):
        raise NumericalError(
            f"covariance is not positive semidefinite (smallest eigenvalue {eigenvalues[0]:.3g})"
        )
    if variance_power not in (1, 2):
        raise ValueError(f"variance power must be 1 or 2, got {variance_power!r}")

    def objective(x):
        return mean_variance_objective(mu, cov, params, x, variance_power)

    if n == 1:
        x = np.ones(1)
    elif n == 2:
        grid = np.linspace(0.0, 1.0, 4001)
        points = np.stack([grid, 1.0 - grid], axis=1)
        variances = np.einsum("ij,jk,ik->i", points, cov, points)
        values = -(points.dot(mu)) ** 2 + params.risk_aversion * variances**variance_power
        best = int(np.argmin(values))
        lo = grid[max(best - 1, 0)]
        hi = grid[min(best + 1, grid.size - 1)]
        refined = minimize_scalar(
            lambda t: objective(np.array([t, 1.0 - t])),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        t = float(refined.x)
        if objective(np.array([t, 1.0 - t])) > values[best]:
            t = float(grid[best])
        x = np.array([t, 1.0 - t])
    else:
        x = np.full(n, 1.0 / n)
        step = 1.0
        value = objective(x)
        for _ in range(20000):
            grad = _mean_variance_gradient(mu, cov, params, x, variance_power)
            while step > 1e-18:
                candidate = project_to_simplex(x - step * grad)
                candidate_value = objective(candidate)
                if candidate_value < value - 1e-18:
                    break
                step *= 0.5
            else:
                break
            moved = np.abs(candidate - x).max()
            x, value = candidate, candidate_value
            step = min(step * 2.0, 1e6)
            if moved < 1e-14:
                break

    grad = _mean_variance_gradient(mu, cov, params, x, variance_power)
    prox_residual = np.abs(x - project_to_simplex(x - grad)).max()
    return PortfolioSolution(
        weights=x,
        objective_value=objective(x),
        gradient_residual=float(prox_residual),
        budget_residual=abs(float(x.sum()) - 1.0),
        feasible=bool(np.all(x >= 0.0)),
        method="mean-variance",
    )
