"""V@R, Tail-V@R and Weighted-V@R of an empirical return distribution.

Sign convention: every measure here is loss-positive.  A value of 0.03 means
"a loss of 3%"; a negative value means even the relevant tail is a gain.  For
a return sample x with quantile function q:

* ``value_at_risk(d, lam)``          = -q(lam)
* ``tail_var_exact(d, lam)``         = -(1/lam) * integral_0^lam q(s) ds
* ``weighted_var(d, mu)``            = integral over lam of tail_var(lam) mu(dlam)

Tail-V@R averages the worst lam-fraction of outcomes, so it dominates V@R at
the same level.  Weighted-V@R averages Tail-V@R across levels under a
weighting measure mu on [0, 1]; with uniform mu it depends on the whole
distribution, not just one tail.

The Tail-V@R integral has the exact piecewise evaluation (the integrand is a
step function of s) as its default engine; ``tail_var_simpson`` applies the
Simpson rules instead and exists for cross-validation of the quadrature
route.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .empirical_dist import EmpiricalDistribution
from .quadrature import SimpsonGrid, composite_simpson, half_node_simpson

__all__ = [
    "WeightingMeasure",
    "RiskReport",
    "value_at_risk",
    "tail_var_exact",
    "tail_var_simpson",
    "worst_case_loss",
    "weighted_var",
    "weighted_var_uniform_closed_form",
    "risk_report",
]

ATOM_WEIGHT_TOL = 1e-12
DENSITY_INTEGRAL_TOL = 1e-9


@dataclass(frozen=True)
class WeightingMeasure:
    """Probability measure mu on [0, 1] weighting the Tail-V@R levels.

    Three kinds are supported:

    * ``uniform``  -- Lebesgue measure on [0, 1] (the default everywhere),
    * ``atoms``    -- finitely many point masses (level_j, weight_j),
    * ``density``  -- a nonnegative density given by its values on a uniform
      grid over [0, 1] (odd number of points, so Simpson applies directly).
    """

    kind: str
    atom_levels: Optional[np.ndarray] = None
    atom_weights: Optional[np.ndarray] = None
    density_values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "uniform":
            return
        if self.kind == "atoms":
            levels = np.asarray(self.atom_levels, dtype=float)
            weights = np.asarray(self.atom_weights, dtype=float)
            if levels.ndim != 1 or levels.size == 0 or levels.shape != weights.shape:
                raise ValueError("atoms need matching nonempty level and weight arrays")
            if np.any(levels <= 0.0) or np.any(levels > 1.0):
                raise ValueError("atom levels must lie in (0, 1]")
            if np.any(weights <= 0.0):
                raise ValueError("atom weights must be positive")
            if abs(weights.sum() - 1.0) > ATOM_WEIGHT_TOL:
                raise ValueError(f"atom weights must sum to 1, got {weights.sum()!r}")
            object.__setattr__(self, "atom_levels", levels)
            object.__setattr__(self, "atom_weights", weights)
            return
        if self.kind == "density":
            values = np.asarray(self.density_values, dtype=float)
            if values.ndim != 1 or values.size < 3 or values.size % 2 == 0:
                raise ValueError("density needs an odd number (>= 3) of grid values")
            if np.any(values < 0.0) or not np.isfinite(values).all():
                raise ValueError("density values must be finite and nonnegative")
            total = _simpson_weights(values.size - 1).dot(values)
            if abs(total - 1.0) > DENSITY_INTEGRAL_TOL:
                raise ValueError(f"density must integrate to 1 under Simpson, got {total!r}")
            object.__setattr__(self, "density_values", values)
            return
        raise ValueError(f"unknown weighting-measure kind {self.kind!r}")

    @classmethod
    def uniform(cls) -> "WeightingMeasure":
        return cls("uniform")

    @classmethod
    def from_atoms(cls, pairs) -> "WeightingMeasure":
        """Point masses from (level, weight) pairs; weights must sum to 1."""
        levels, weights = zip(*pairs)
        return cls("atoms", atom_levels=np.asarray(levels, float),
                   atom_weights=np.asarray(weights, float))

    @classmethod
    def single_atom(cls, level: float) -> "WeightingMeasure":
        return cls.from_atoms([(level, 1.0)])

    @classmethod
    def from_density(cls, values, normalize: bool = True) -> "WeightingMeasure":
        """Gridded density on [0, 1].  With ``normalize`` the values are scaled
        so their Simpson integral is exactly 1."""
        arr = np.asarray(values, dtype=float)
        if normalize:
            if arr.ndim != 1 or arr.size < 3 or arr.size % 2 == 0:
                raise ValueError("density needs an odd number (>= 3) of grid values")
            total = _simpson_weights(arr.size - 1).dot(arr)
            if total <= 0.0 or not np.isfinite(total):
                raise ValueError("density must have a positive finite integral")
            arr = arr / total
        return cls("density", density_values=arr)

    def describe(self) -> str:
        if self.kind == "uniform":
            return "uniform"
        if self.kind == "atoms":
            pairs = ", ".join(f"{l:g}:{w:g}" for l, w in zip(self.atom_levels, self.atom_weights))
            return f"atoms({pairs})"
        return f"density({self.density_values.size} grid points)"


def _simpson_weights(n_subintervals: int) -> np.ndarray:
    """Composite-Simpson node weights for a unit interval split into
    ``n_subintervals`` even pieces."""
    h = 1.0 / n_subintervals
    w = np.full(n_subintervals + 1, 2.0)
    w[1:-1:2] = 4.0
    w[0] = w[-1] = 1.0
    return (h / 3.0) * w


def value_at_risk(dist: EmpiricalDistribution, level: float) -> float:
    """Loss-positive V@R: the negated empirical quantile at ``level`` in (0, 1)."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"V@R level must lie in (0, 1), got {level!r}")
    return -dist.quantile(level)


def worst_case_loss(dist: EmpiricalDistribution) -> float:
    """Negated minimum sample: the limit of tail_var_exact as the level -> 0."""
    return -float(dist.sorted_samples[0])


def tail_var_exact(dist: EmpiricalDistribution, level):
    """Loss-positive Tail-V@R by exact integration of the quantile step function.

    For level lam in (0, 1], returns -(1/lam) * integral_0^lam q(s) ds: the full
    atoms below lam contribute 1/n each, the last atom contributes its
    fractional width.  At lam = 1 this is the negated sample mean.  Accepts a
    scalar or an ndarray of levels.
    """
    lam = np.asarray(level, dtype=float)
    if np.any(lam <= 0.0) or np.any(lam > 1.0):
        raise ValueError(f"Tail-V@R level must lie in (0, 1], got {level!r}")
    n = dist.n
    samples = dist.sorted_samples
    prefix = dist._prefix_sums
    full = np.minimum(np.floor(n * lam).astype(int), n)
    frac = lam - full / n
    next_sample = samples[np.minimum(full, n - 1)]
    integral = prefix[full] / n + np.where(full < n, frac * next_sample, 0.0)
    out = -integral / lam
    if lam.ndim == 0:
        return float(out)
    return out


def tail_var_simpson(dist: EmpiricalDistribution, level: float, inner_panels: int = 128) -> float:
    """Tail-V@R via composite Simpson on the quantile function over [0, level].

    The top node evaluates the right-continuous quantile; nodes at or above 1
    clamp to the maximum sample.  On a step integrand the rule carries an
    O(sample range / panels) bias, so this route exists to mirror the
    quadrature construction and cross-check ``tail_var_exact``, not to replace
    it.
    """
    if not 0.0 < level <= 1.0:
        raise ValueError(f"Tail-V@R level must lie in (0, 1], got {level!r}")
    samples = dist.sorted_samples
    n = dist.n

    def clamped_quantile(s):
        idx = np.minimum(np.floor(n * np.asarray(s, dtype=float)).astype(int), n - 1)
        return samples[idx]

    grid = SimpsonGrid(0.0, level, inner_panels)
    return -composite_simpson(clamped_quantile, grid) / level


def weighted_var(
    dist: EmpiricalDistribution,
    measure: Optional[WeightingMeasure] = None,
    outer_panels: int = 64,
) -> float:
    """Loss-positive Weighted-V@R: Tail-V@R averaged over levels under ``measure``.

    * uniform measure: the half-node Simpson rule over [0, 1] applied to
      lam -> tail_var_exact(lam), with the lam = 0 node taking its limit value
      (the worst-case loss);
    * atoms: the exact mixture sum(w_j * tail_var_exact(lam_j));
    * density: composite Simpson of density(lam) * tail_var_exact(lam) on the
      density's own grid (``outer_panels`` is not used).
    """
    if measure is None:
        measure = WeightingMeasure.uniform()
    wcl = worst_case_loss(dist)

    def tail_var_with_limit(lam):
        lam1 = np.atleast_1d(np.asarray(lam, dtype=float))
        out = np.empty_like(lam1)
        at_zero = lam1 <= 0.0
        out[at_zero] = wcl
        if (~at_zero).any():
            out[~at_zero] = tail_var_exact(dist, lam1[~at_zero])
        return out if np.ndim(lam) else float(out[0])

    if measure.kind == "uniform":
        return half_node_simpson(tail_var_with_limit, 0.0, 1.0, outer_panels)
    if measure.kind == "atoms":
        values = tail_var_exact(dist, measure.atom_levels)
        return float(measure.atom_weights.dot(values))
    # density: its grid fixes the Simpson layout
    values = measure.density_values
    grid_levels = np.linspace(0.0, 1.0, values.size)
    integrand = values * tail_var_with_limit(grid_levels)
    return float(_simpson_weights(values.size - 1).dot(integrand))


def weighted_var_uniform_closed_form(dist: EmpiricalDistribution) -> float:
    """Exact uniform-measure Weighted-V@R as a log-weighted sum of order statistics.

    Swapping the order of the two integrals in the uniform Weighted-V@R gives
    -integral_0^1 q(s) * ln(1/s) ds; on n atoms the weight of x_(k) is
    F(k/n) - F((k-1)/n) with F(s) = s - s*ln(s).  The weights sum to 1, so
    this is an exact reference value for ``weighted_var`` with uniform mu.
    """
    n = dist.n
    boundaries = np.arange(1, n + 1) / n
    cumulative = np.concatenate([[0.0], boundaries - boundaries * np.log(boundaries)])
    weights = np.diff(cumulative)
    return -float(dist.sorted_samples.dot(weights))


@dataclass(frozen=True)
class RiskReport:
    """The three risk numbers for one distribution at one level.

    Tail-V@R dominates V@R at the same level by construction; the constructor
    enforces it (violation indicates a bug, not bad data).
    """

    var: float
    tvar: float
    wvar: float
    level: float
    measure: WeightingMeasure

    def __post_init__(self):
        slack = 1e-9 * max(1.0, abs(self.var))
        if self.tvar < self.var - slack:
            raise ValueError(
                f"Tail-V@R {self.tvar!r} fell below V@R {self.var!r} at level {self.level!r}"
            )


def risk_report(
    dist: EmpiricalDistribution,
    level: float,
    measure: Optional[WeightingMeasure] = None,
    outer_panels: int = 64,
) -> RiskReport:
    """Compute V@R, Tail-V@R (exact engine) and Weighted-V@R in one pass."""
    if measure is None:
        measure = WeightingMeasure.uniform()
    return RiskReport(
        var=value_at_risk(dist, level),
        tvar=float(tail_var_exact(dist, level)),
        wvar=weighted_var(dist, measure, outer_panels=outer_panels),
        level=level,
        measure=measure,
    )
