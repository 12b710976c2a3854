# -*- coding: utf-8 -*-
"""
@Desc    : Tests for the acceptance check registry, outcome handling, exact checks and small MC runs
"""
import math

import numpy as np
import pytest
from pydantic import BaseModel

from atlas.checks import BaseCheck, CheckContext, CheckOutcome, Tier, check_registry
from atlas.checks.base import CheckRegistry, band_passed
from atlas.checks import origin as origin_checks
from atlas.checks.fields import (
    BridgeIdentityCheck,
    BridgeParams,
    BulkOriginRatioCheck,
    FieldCovarianceCheck,
    FieldCovarianceParams,
    RatioParams,
    SmoothedBridgeCheck,
    SmoothedBridgeParams,
)
from atlas.checks.limits import (
    AnalyticParams,
    CovarianceAnchorCheck,
    DecompositionCheck,
    LimitSamplerCheck,
    RawQuadratureCheck,
    SigmaAnchorCheck,
)
from atlas.checks.origin import (
    IncrementCorrelationCheck,
    LatticeOriginVarianceCheck,
    OriginParams,
    OriginSeries,
    OriginVarianceCheck,
    RichardsonCheck,
    ScalingExponentCheck,
    TruncationCheck,
    TruncationParams,
    origin_series,
)
from atlas.checks.particles import (
    DStatisticCheck,
    DStatisticParams,
    GapParams,
    GapStationarityCheck,
    HarrisParams,
    HarrisVarianceCheck,
)
from atlas.gaussian import FbmSampler, draw_generator
from atlas.observables import dyadic_times
from models import InitialCondition

FAST_ORDER = [
    "analytic_cov_anchor",
    "analytic_sigma_anchors",
    "analytic_decomposition",
    "analytic_raw_quadrature",
    "limit_sampler_covariance",
    "origin_variance",
    "origin_increment_correlation",
    "harris_tagged_variance",
    "bulk_origin_ratio",
    "d_statistic_second_moment",
    "gap_stationarity",
    "field_covariance",
    "bridge_identity",
    "smoothed_bridge",
    "origin_scaling_exponent",
    "richardson_dt",
    "truncation_insensitivity",
]


class NoParams(BaseModel):
    pass


class ExplodingCheck(BaseCheck[NoParams]):
    check_id = "exploding"
    fast = full = NoParams()

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        raise ZeroDivisionError("boom")


class ConstantCheck(BaseCheck[NoParams]):
    check_id = "constant"
    tiers = (Tier.FULL,)
    fast = full = NoParams()

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        return CheckOutcome(
            check_id=self.check_id, target=1.0, estimate=1.0, ci_low=0.9, ci_high=1.1, passed=True
        )


@pytest.mark.unit
class TestRegistry:
    def test_fast_tier_order(self):
        assert check_registry.get_check_ids(Tier.FAST) == FAST_ORDER

    def test_full_tier_adds_the_lattice_check(self):
        full = check_registry.get_check_ids(Tier.FULL)
        assert "lattice_origin_variance" in full
        assert [c for c in full if c != "lattice_origin_variance"] == FAST_ORDER

    def test_ids_are_unique(self):
        ids = check_registry.get_check_ids()
        assert len(ids) == len(set(ids)) == 18

    def test_lookup(self):
        assert isinstance(check_registry.get_check("analytic_cov_anchor"), CovarianceAnchorCheck)
        assert check_registry.get_check("missing") is None

    def test_duplicates_and_missing_ids_are_refused(self):
        registry = CheckRegistry()
        registry.register(ConstantCheck())
        with pytest.raises(ValueError):
            registry.register(ConstantCheck())

        nameless = ConstantCheck()
        nameless.check_id = ""
        with pytest.raises(ValueError):
            registry.register(nameless)

    def test_tier_filter(self):
        registry = CheckRegistry()
        registry.register(ConstantCheck())
        registry.register(ExplodingCheck())
        assert registry.get_check_ids(Tier.FAST) == ["exploding"]
        assert registry.get_check_ids(Tier.FULL) == ["constant", "exploding"]


@pytest.mark.unit
class TestInvoke:
    def test_exception_becomes_a_failed_outcome(self):
        outcome = ExplodingCheck().invoke(CheckContext())

        assert not outcome.passed
        assert outcome.error == "ZeroDivisionError: boom"
        assert math.isnan(outcome.estimate)
        assert outcome.seconds >= 0.0

    def test_successful_outcome_is_timed(self):
        outcome = ConstantCheck().invoke(CheckContext(tier=Tier.FULL))
        assert outcome.passed
        assert outcome.error is None

    def test_params_follow_the_tier(self):
        check = LimitSamplerCheck()
        assert check.params(CheckContext(tier=Tier.FAST)).draws == 20_000
        assert check.params(CheckContext(tier=Tier.FULL)).draws == 100_000


@pytest.mark.unit
class TestBandPassed:
    def test_full_tier_uses_the_estimate(self):
        ctx = CheckContext(tier=Tier.FULL)
        assert band_passed(ctx, 1.05, 0.9, 1.1, (0.5, 1.5))
        assert not band_passed(ctx, 1.2, 0.9, 1.1, (1.0, 1.4))

    def test_fast_tier_accepts_an_overlapping_ci(self):
        ctx = CheckContext(tier=Tier.FAST)
        assert band_passed(ctx, 1.2, 0.9, 1.1, (1.0, 1.4))
        assert not band_passed(ctx, 1.3, 0.9, 1.1, (1.15, 1.45))


@pytest.mark.unit
class TestExactChecks:
    @pytest.mark.parametrize("check", [CovarianceAnchorCheck(), SigmaAnchorCheck(), DecompositionCheck()])
    def test_passes(self, check):
        outcome = check.invoke(CheckContext())
        assert outcome.passed, outcome.detail

    @pytest.mark.parametrize("check", [CovarianceAnchorCheck(), SigmaAnchorCheck(), DecompositionCheck()])
    def test_perturbed_targets_fail(self, check):
        outcome = check.invoke(CheckContext(target_scale=1.5))
        assert not outcome.passed
        assert outcome.error is None

    def test_anchor_values(self):
        outcome = CovarianceAnchorCheck().invoke(CheckContext())
        assert outcome.estimate == pytest.approx(3.191538, abs=1e-6)
        assert outcome.ci_low < outcome.target < outcome.ci_high

    def test_sampler_fails_against_perturbed_covariance(self):
        outcome = LimitSamplerCheck().invoke(CheckContext(target_scale=1.5))
        assert not outcome.passed

    def test_raw_quadrature_cells_are_seeded_draws(self):
        check = RawQuadratureCheck()
        cells = check.cells(CheckContext())

        assert cells.shape == (20, 4)
        np.testing.assert_array_equal(cells, check.cells(CheckContext()))
        assert not np.array_equal(cells, check.cells(CheckContext(seed=7)))
        assert np.all((cells[:, [0, 2]] >= 0.25) & (cells[:, [0, 2]] <= 4.0))
        assert np.all((cells[:, [1, 3]] >= 0.0) & (cells[:, [1, 3]] <= 4.0))

    def test_lattice_target_is_the_martingale_part(self):
        assert LatticeOriginVarianceCheck().normalised_target() == pytest.approx(
            1.0 / math.sqrt(math.pi), abs=1e-8
        )


SMALL_ORIGIN = OriginParams(replicas=100, t_end=4.0, t_mid=1.0, dt=0.05)


def _small(check, params, tier: Tier = Tier.FAST):
    if tier == Tier.FULL:
        check.full = params
    else:
        check.fast = params
    return check


def _small_correlation():
    check = _small(IncrementCorrelationCheck(), SMALL_ORIGIN)
    check.t = 1.0
    return check


SMOKE = [
    pytest.param(
        lambda: _small(RawQuadratureCheck(), AnalyticParams(points=3)), id="raw-quadrature"
    ),
    pytest.param(lambda: _small(OriginVarianceCheck(), SMALL_ORIGIN), id="origin-variance"),
    pytest.param(_small_correlation, id="increment-correlation"),
    pytest.param(lambda: _small(ScalingExponentCheck(), SMALL_ORIGIN), id="scaling-exponent"),
    pytest.param(lambda: _small(RichardsonCheck(), SMALL_ORIGIN), id="richardson"),
    pytest.param(
        lambda: _small(TruncationCheck(), TruncationParams(replicas=20, t_end=1.0, dt=0.05)),
        id="truncation",
    ),
    pytest.param(
        lambda: _small(HarrisVarianceCheck(), HarrisParams(replicas=100, t=1.0, dt=0.05)),
        id="harris",
    ),
    pytest.param(
        lambda: _small(
            DStatisticCheck(), DStatisticParams(replicas=50, ks=(2, 5), times=(0.0, 0.5), dt=0.05)
        ),
        id="d-statistic",
    ),
    pytest.param(
        lambda: _small(GapStationarityCheck(), GapParams(replicas=10, n_gaps=50, t=0.5, dt=0.05)),
        id="gaps",
    ),
    pytest.param(
        lambda: _small(
            BulkOriginRatioCheck(),
            RatioParams(replicas=50, epsilon=0.25, t=0.5, x_bulk=2.0, dt=0.05),
        ),
        id="bulk-origin-ratio",
    ),
    pytest.param(
        lambda: _small(
            FieldCovarianceCheck(),
            FieldCovarianceParams(
                replicas=40, epsilons=(0.25, 0.5), times=(0.5, 1.0), points=(0.0, 0.5), dt=0.05
            ),
        ),
        id="field-covariance",
    ),
    pytest.param(
        lambda: _small(
            SmoothedBridgeCheck(),
            SmoothedBridgeParams(replicas=20, epsilons=(0.25, 0.5), t=0.5, points=(0.5,), dt=0.05),
        ),
        id="smoothed-bridge",
    ),
]


@pytest.mark.integration
class TestMonteCarloChecksRun:
    @pytest.mark.parametrize("make_check", SMOKE)
    def test_small_run_completes(self, make_check):
        outcome = make_check().invoke(CheckContext(threads=1))

        assert outcome.error is None, outcome.error
        assert math.isfinite(outcome.estimate)
        assert outcome.ci_low <= outcome.ci_high

    def test_lattice_check_runs_on_the_full_tier(self):
        check = _small(LatticeOriginVarianceCheck(), SMALL_ORIGIN, Tier.FULL)
        outcome = check.invoke(CheckContext(tier=Tier.FULL, threads=1))

        assert outcome.error is None, outcome.error
        assert math.isfinite(outcome.estimate)

    def test_bridge_identity_holds_on_a_small_run(self):
        check = _small(
            BridgeIdentityCheck(),
            BridgeParams(replicas=5, epsilon=0.25, times=(0.5,), points=(0.25, 0.5), dt=0.05),
        )
        outcome = check.invoke(CheckContext(threads=1))
        assert outcome.passed, outcome.detail


@pytest.mark.unit
class TestOriginSeries:
    def test_spellings_of_one_simulation_share_a_cache_entry(self, mocker):
        origin_checks._cached_origin_series.cache_clear()
        simulate = mocker.spy(origin_checks, "run_ensemble")

        first = origin_series(3, 20, 2.0, 0.05, 1)
        assert origin_series(3, 20, 2.0, 0.05, 1, InitialCondition.EQUILIBRIUM) is first
        assert origin_series(3, 20, 2, 0.05, 1, initial="equilibrium") is first
        assert simulate.call_count == 1

        origin_series(3, 20, 2.0, 0.05, 1, InitialCondition.LATTICE)
        assert simulate.call_count == 2


def _fbm_series(draws: int) -> OriginSeries:
    times = dyadic_times(64.0)
    lowest = FbmSampler(0.25, times).draws(draw_generator(31), draws)
    sup = np.maximum.accumulate(np.abs(lowest), axis=1)
    return OriginSeries(times=times, lowest=lowest, sup=sup)


@pytest.mark.unit
class TestScalingExponent:
    @pytest.fixture
    def fbm_series(self, mocker):
        return mocker.patch.object(origin_checks, "origin_series", return_value=_fbm_series(4000))

    def test_quarter_growth_passes_on_the_full_tier(self, fbm_series):
        outcome = ScalingExponentCheck().invoke(CheckContext(tier=Tier.FULL))

        assert outcome.passed, outcome.detail
        assert outcome.estimate == pytest.approx(0.25, abs=0.02)
        assert outcome.ci_low < outcome.estimate < outcome.ci_high
        assert "sup slope" in outcome.detail

    def test_perturbed_target_fails(self, fbm_series):
        outcome = ScalingExponentCheck().invoke(CheckContext(tier=Tier.FULL, target_scale=1.5))
        assert not outcome.passed
