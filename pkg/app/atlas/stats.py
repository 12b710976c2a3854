# -*- coding: utf-8 -*-
"""
@Desc    : Mergeable streaming moments and the hypothesis tests used by the verify harness
"""
import math
from typing import Callable, Iterable, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import stats as sps

from atlas.errors import DegenerateFitError, DimensionError, PreconditionError


class EstimatorAccumulator(BaseModel):
    """Count, mean vector and centred co-moment matrix of a stream of vectors."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    count: int = 0
    mean: np.ndarray
    comoment: np.ndarray

    @classmethod
    def empty(cls, dim: int) -> "EstimatorAccumulator":
        return cls(count=0, mean=np.zeros(dim), comoment=np.zeros((dim, dim)))

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "EstimatorAccumulator":
        """Two-pass moments of a (count, dim) block."""
        samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
        count, dim = samples.shape
        if count == 0:
            return cls.empty(dim)
        mean = samples.mean(axis=0)
        centred = samples - mean
        return cls(count=count, mean=mean, comoment=centred.T @ centred)

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    @property
    def has_variance(self) -> bool:
        return self.count >= 2

    @property
    def covariance(self) -> np.ndarray:
        """Unbiased covariance; NaN everywhere while fewer than two observations were seen."""
        if not self.has_variance:
            return np.full((self.dim, self.dim), np.nan)
        return self.comoment / (self.count - 1)

    @property
    def variance(self) -> np.ndarray:
        return np.diag(self.covariance).copy()

    def stderr_of_mean(self) -> np.ndarray:
        return np.sqrt(self.variance / self.count)

    def stderr_of_covariance(self) -> np.ndarray:
        # Gaussian approximation: Var(s_ij) = (s_ii s_jj + s_ij^2) / (n - 1)
        cov = self.covariance
        diag = np.diag(cov)
        return np.sqrt((np.outer(diag, diag) + cov**2) / (self.count - 1))

    def correlation(self, i: int, j: int) -> float:
        cov = self.covariance
        return float(cov[i, j] / math.sqrt(cov[i, i] * cov[j, j]))

    def update(self, observation: Sequence[float]) -> "EstimatorAccumulator":
        x = np.asarray(observation, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.dim:
            raise DimensionError(
                f"observation of length {x.shape[0]} for accumulator of dim {self.dim}"
            )
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.comoment = self.comoment + np.outer(delta, delta) * ((self.count - 1) / self.count)
        return self

    def copy(self) -> "EstimatorAccumulator":
        return EstimatorAccumulator(
            count=self.count, mean=self.mean.copy(), comoment=self.comoment.copy()
        )


def update(acc: EstimatorAccumulator, observation: Sequence[float]) -> EstimatorAccumulator:
    return acc.update(observation)


def merge(a: EstimatorAccumulator, b: EstimatorAccumulator) -> EstimatorAccumulator:
    """Exact pooled moments of two disjoint streams."""
    if a.dim != b.dim:
        raise DimensionError(f"cannot merge accumulators of dim {a.dim} and {b.dim}")
    if b.count == 0:
        return a.copy()
    if a.count == 0:
        return b.copy()

    count = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / count)
    comoment = a.comoment + b.comoment + np.outer(delta, delta) * (a.count * b.count / count)
    return EstimatorAccumulator(count=count, mean=mean, comoment=comoment)


def merge_all(accumulators: Iterable[EstimatorAccumulator], dim: int) -> EstimatorAccumulator:
    pooled = EstimatorAccumulator.empty(dim)
    for acc in accumulators:
        pooled = merge(pooled, acc)
    return pooled


class KsResult(BaseModel):
    statistic: float
    p_value: float


def ks_test(sample: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray]) -> KsResult:
    """One-sample two-sided Kolmogorov-Smirnov test with the asymptotic p-value."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = x.shape[0]
    if n == 0:
        raise PreconditionError("the KS test needs a non-empty sample")

    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    statistic = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    p_value = float(sps.kstwobign.sf(math.sqrt(n) * statistic))
    return KsResult(statistic=statistic, p_value=p_value)


class VarianceRatioResult(BaseModel):
    estimate: float
    ci_low: float
    ci_high: float
    passed: bool


def variance_ratio_ci(
    acc: EstimatorAccumulator,
    target: float,
    level: float = 0.99,
    tolerance: float = 0.0,
    index: int = 0,
) -> VarianceRatioResult:
    """
    Normal-approximation CI of Var/target.

    The standard error of the sample variance is taken as sqrt(2/(n-1)) times the estimate.
    Passes when 1 lies within the CI widened by `tolerance` on either side.
    """
    if acc.count < 100:
        raise PreconditionError(f"variance ratio CI needs at least 100 observations, got {acc.count}")

    estimate = float(acc.covariance[index, index] / target)
    z = float(sps.norm.ppf(0.5 + level / 2.0))
    halfwidth = z * math.sqrt(2.0 / (acc.count - 1)) * estimate
    passed = abs(estimate - 1.0) <= halfwidth + tolerance
    return VarianceRatioResult(
        estimate=estimate,
        ci_low=estimate - halfwidth,
        ci_high=estimate + halfwidth,
        passed=passed,
    )


def loglog_slope(pairs: Iterable[Tuple[float, float]]) -> float:
    """Least-squares slope of log(value) against log(t)."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise DegenerateFitError(f"log-log fit needs at least 3 points, got {len(pairs)}")

    t, value = np.asarray(pairs, dtype=np.float64).T
    if np.any(t <= 0) or np.any(value <= 0):
        raise PreconditionError("log-log fit needs positive times and values")

    slope, _ = np.polyfit(np.log(t), np.log(value), 1)
    return float(slope)
