# -*- coding: utf-8 -*-
"""
@Desc    : Tests for streaming moments, merging and the hypothesis tests
"""
import math

import numpy as np
import pytest
from scipy import stats as sps

from atlas.errors import DegenerateFitError, DimensionError, PreconditionError
from atlas.stats import (
    EstimatorAccumulator,
    ks_test,
    loglog_slope,
    merge,
    merge_all,
    update,
    variance_ratio_ci,
)


@pytest.fixture
def samples() -> np.ndarray:
    rng = np.random.default_rng(11)
    return rng.normal(loc=[1.0, -2.0, 0.5], scale=[1.0, 2.0, 0.3], size=(500, 3))


@pytest.mark.unit
class TestEstimatorAccumulator:
    def test_streaming_matches_two_pass(self, samples):
        acc = EstimatorAccumulator.empty(3)
        for row in samples:
            update(acc, row)

        assert acc.count == 500
        np.testing.assert_allclose(acc.mean, samples.mean(axis=0), rtol=0, atol=1e-12)
        np.testing.assert_allclose(acc.covariance, np.cov(samples, rowvar=False), rtol=1e-10)

    def test_merge_of_halves_equals_whole(self, samples):
        whole = EstimatorAccumulator.from_samples(samples)
        pooled = merge(
            EstimatorAccumulator.from_samples(samples[:123]),
            EstimatorAccumulator.from_samples(samples[123:]),
        )

        assert pooled.count == whole.count
        np.testing.assert_allclose(pooled.mean, whole.mean, rtol=0, atol=1e-12)
        np.testing.assert_allclose(pooled.comoment, whole.comoment, rtol=1e-10)

    def test_merge_all_is_order_independent(self, samples):
        chunks = [EstimatorAccumulator.from_samples(c) for c in np.array_split(samples, 7)]
        forward = merge_all(chunks, 3)
        backward = merge_all(reversed(chunks), 3)
        np.testing.assert_allclose(forward.covariance, backward.covariance, rtol=1e-10)

    def test_merge_with_empty_is_a_copy(self, samples):
        acc = EstimatorAccumulator.from_samples(samples)
        merged = merge(acc, EstimatorAccumulator.empty(3))

        assert merged is not acc
        np.testing.assert_array_equal(merged.mean, acc.mean)
        np.testing.assert_array_equal(merge(EstimatorAccumulator.empty(3), acc).comoment, acc.comoment)

    def test_covariance_is_nan_before_two_observations(self):
        acc = EstimatorAccumulator.empty(2).update([1.0, 2.0])
        assert not acc.has_variance
        assert np.all(np.isnan(acc.covariance))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            EstimatorAccumulator.empty(2).update([1.0, 2.0, 3.0])
        with pytest.raises(DimensionError):
            merge(EstimatorAccumulator.empty(2), EstimatorAccumulator.empty(3))

    def test_correlation_and_stderr(self):
        x = np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        acc = EstimatorAccumulator.from_samples(x)

        assert acc.correlation(0, 1) == pytest.approx(1.0)
        assert acc.stderr_of_mean()[0] == pytest.approx(math.sqrt(acc.variance[0] / 4))
        assert acc.stderr_of_covariance().shape == (2, 2)


@pytest.mark.unit
class TestKsTest:
    def test_single_point_statistic(self):
        result = ks_test([0.5], lambda x: x)
        assert result.statistic == pytest.approx(0.5)

    def test_matches_scipy(self):
        sample = np.random.default_rng(3).exponential(0.5, size=400)
        cdf = sps.expon(scale=0.5).cdf
        ours = ks_test(sample, cdf)
        reference = sps.kstest(sample, cdf, method="asymp")

        assert ours.statistic == pytest.approx(reference.statistic, abs=1e-12)
        assert ours.p_value == pytest.approx(reference.pvalue, rel=1e-6)

    def test_rejects_shifted_law(self):
        sample = np.random.default_rng(5).standard_normal(2000)
        result = ks_test(sample, lambda x: sps.norm.cdf(x - 0.5))
        assert result.p_value < 1e-6

    def test_empty_sample(self):
        with pytest.raises(PreconditionError):
            ks_test([], lambda x: x)

    def test_reject_rate_under_the_null(self):
        rng = np.random.default_rng(8)
        cdf = sps.expon(scale=0.5).cdf
        p_values = np.array(
            [ks_test(rng.exponential(0.5, size=200), cdf).p_value for _ in range(1000)]
        )
        # the asymptotic p-value is slightly conservative at n = 200
        assert 0.025 <= np.mean(p_values < 0.05) <= 0.075
        assert 0.15 <= np.mean(p_values < 0.20) <= 0.25


@pytest.mark.unit
class TestVarianceRatio:
    @pytest.fixture
    def acc(self) -> EstimatorAccumulator:
        sample = np.random.default_rng(17).normal(scale=2.0, size=10_000)
        return EstimatorAccumulator.from_samples(sample[:, None])

    def test_passes_on_true_variance(self, acc):
        result = variance_ratio_ci(acc, target=4.0)
        assert result.passed
        assert result.ci_low < 1.0 < result.ci_high

    def test_fails_on_doubled_target(self, acc):
        result = variance_ratio_ci(acc, target=8.0)
        assert not result.passed
        assert result.estimate == pytest.approx(0.5, abs=0.05)

    def test_tolerance_widens_the_band(self, acc):
        assert variance_ratio_ci(acc, target=8.0, tolerance=0.6).passed

    def test_needs_one_hundred_observations(self):
        acc = EstimatorAccumulator.from_samples(np.ones((99, 1)))
        with pytest.raises(PreconditionError):
            variance_ratio_ci(acc, target=1.0)


@pytest.mark.unit
class TestLogLogSlope:
    def test_exact_power_law(self):
        pairs = [(t, 3.0 * t**0.25) for t in (1.0, 2.0, 4.0, 8.0, 16.0)]
        assert loglog_slope(pairs) == pytest.approx(0.25, abs=1e-12)

    def test_needs_three_points(self):
        with pytest.raises(DegenerateFitError):
            loglog_slope([(1.0, 1.0), (2.0, 2.0)])

    def test_needs_positive_values(self):
        with pytest.raises(PreconditionError):
            loglog_slope([(1.0, 1.0), (2.0, 0.0), (4.0, 2.0)])
