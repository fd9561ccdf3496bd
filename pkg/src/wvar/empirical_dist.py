"""Empirical return distribution and its lower quantile function.

All risk measures in this package are driven by the quantile function of the
empirical sample (historical simulation); nothing is fitted or smoothed.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["EmpiricalDistribution"]


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample of returns defining the empirical quantile function.

    The quantile convention is the strict-inequality infimum
    ``q(s) = inf{x : P(X <= x) > s}``, which for a sample of size n is the
    order statistic ``x_(floor(n*s) + 1)`` (1-indexed).  At jump points this
    takes the right-continuous branch: on four atoms, q(0.75) is the largest
    sample.  Ties in the sample are kept.
    """

    sorted_samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.sorted_samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("need a nonempty 1-D sample")
        if not np.isfinite(samples).all():
            raise ValueError("samples must be finite")
        if np.any(np.diff(samples) < 0):
            raise ValueError("samples must be sorted nondecreasing; use from_samples")
        object.__setattr__(self, "sorted_samples", samples)

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalDistribution":
        """Build a distribution from samples in any order."""
        arr = np.asarray(samples, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("need at least one sample")
        return cls(np.sort(arr))

    @property
    def n(self) -> int:
        return self.sorted_samples.size

    @cached_property
    def _prefix_sums(self) -> np.ndarray:
        """prefix_sums[k] = sum of the k smallest samples (prefix_sums[0] = 0)."""
        return np.concatenate([[0.0], np.cumsum(self.sorted_samples)])

    def quantile(self, s):
        """Lower quantile at probability level(s) s in [0, 1).

        Accepts a scalar or an ndarray; returns the matching shape.
        """
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0.0) or np.any(s_arr >= 1.0):
            raise ValueError(f"quantile level must lie in [0, 1), got {s!r}")
        idx = np.minimum(np.floor(self.n * s_arr).astype(int), self.n - 1)
        out = self.sorted_samples[idx]
        if s_arr.ndim == 0:
            return float(out)
        return out
