# -*- coding: utf-8 -*-
"""
@Desc    : Checks on the lowest particle X_(0): variance law, fBm increments, scaling exponent, dt and N sensitivity
"""
import math
from functools import lru_cache
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict

from atlas.analytic import cov_limit_lattice, origin_cov
from atlas.checks.base import (
    BaseCheck,
    CheckContext,
    CheckOutcome,
    Tier,
    auto_particles,
    band_passed,
)
from atlas.dynamics import run_ensemble, truncation_sensitivity
from atlas.gaussian import draw_generator
from atlas.observables import dyadic_times, fit_origin_exponent, spread_exponent
from atlas.stats import EstimatorAccumulator, VarianceRatioResult, variance_ratio_ci
from models import InitialCondition, ModelKind, ModelSpec

GAMMA = 1.0
Z_99 = 2.5758293035489004


class OriginParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    replicas: int
    t_end: float = 64.0
    t_mid: float = 16.0
    dt: float = 0.01


class OriginSeries(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    times: List[float]
    lowest: np.ndarray
    sup: np.ndarray

    def column(self, t: float) -> np.ndarray:
        return self.lowest[:, self.times.index(t)]

    def sup_column(self, t: float) -> np.ndarray:
        return self.sup[:, self.times.index(t)]


def origin_series(
    seed: int,
    replicas: int,
    t_end: float,
    dt: float,
    threads: int | None,
    initial: InitialCondition = InitialCondition.EQUILIBRIUM,
) -> OriginSeries:
    """X_(0) and its running sup |X_(0)| at dyadic times, shared by every check of this module."""
    # one cache key per simulation, however the caller spells the arguments
    return _cached_origin_series(
        int(seed), int(replicas), float(t_end), float(dt), threads, InitialCondition(initial)
    )


@lru_cache(maxsize=8)
def _cached_origin_series(
    seed: int,
    replicas: int,
    t_end: float,
    dt: float,
    threads: int | None,
    initial: InitialCondition,
) -> OriginSeries:
    spec = ModelSpec.create(
        gamma=GAMMA,
        kind=ModelKind.ATLAS,
        n_particles=auto_particles(GAMMA, 0.0, t_end),
        dt=dt,
        t_end=t_end,
        seed=seed,
    )
    times = dyadic_times(t_end)
    result = run_ensemble(
        spec, times, lambda _, state: (state.lowest, state.origin_sup), replicas, threads, initial
    )
    data = np.array([result.payloads[r] for r in result.replicas])
    return OriginSeries(times=times, lowest=data[:, :, 0], sup=data[:, :, 1])


def _variance_ratio(values: np.ndarray, target_variance: float) -> VarianceRatioResult:
    acc = EstimatorAccumulator.from_samples(values[:, None])
    return variance_ratio_ci(acc, target_variance, level=0.99)


class OriginVarianceCheck(BaseCheck[OriginParams]):
    """Var(X_(0)(t))/sqrt(t) against sqrt(2/pi)/gamma; the bias must shrink from t_mid to t_end."""

    check_id = "origin_variance"
    fast = OriginParams(replicas=500)
    full = OriginParams(replicas=2000)

    band: float = 0.10
    initial: InitialCondition = InitialCondition.EQUILIBRIUM
    require_shrinking_bias: bool = True

    def normalised_target(self) -> float:
        return origin_cov(1.0, 1.0, GAMMA)

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        series = origin_series(ctx.seed, p.replicas, p.t_end, p.dt, ctx.threads, self.initial)
        target = ctx.target_scale * self.normalised_target()

        late = _variance_ratio(series.column(p.t_end), target * math.sqrt(p.t_end))
        mid = _variance_ratio(series.column(p.t_mid), target * math.sqrt(p.t_mid))

        estimate = late.estimate * target
        ci = (late.ci_low * target, late.ci_high * target)
        passed = band_passed(ctx, estimate, target * (1 - self.band), target * (1 + self.band), ci)
        shrinks = abs(late.estimate - 1.0) < abs(mid.estimate - 1.0)
        if ctx.tier == Tier.FULL and self.require_shrinking_bias:
            passed = passed and shrinks

        return CheckOutcome(
            check_id=self.check_id,
            target=target,
            estimate=estimate,
            ci_low=ci[0],
            ci_high=ci[1],
            passed=passed,
            detail=f"t={p.t_end:g}, Var/sqrt(t) at t={p.t_mid:g}: {mid.estimate * target:.5f}, "
            f"bias shrinks: {shrinks}, replicas={p.replicas}",
        )


class LatticeOriginVarianceCheck(OriginVarianceCheck):
    """Equi-distant start: only the martingale part survives, Var/sqrt(t) -> 1/(gamma sqrt(pi))."""

    check_id = "lattice_origin_variance"
    tiers = (Tier.FULL,)
    band = 0.15
    initial = InitialCondition.LATTICE
    require_shrinking_bias = False

    def normalised_target(self) -> float:
        return cov_limit_lattice(1.0, 0.0, 1.0, 0.0, GAMMA) / (2.0 * GAMMA) ** 2


class IncrementCorrelationCheck(BaseCheck[OriginParams]):
    """corr(X_(0)(t), X_(0)(2t)) of the H=1/4 fBm limit is 2^{-3/4}."""

    check_id = "origin_increment_correlation"
    fast = OriginParams(replicas=500)
    full = OriginParams(replicas=2000)

    t: float = 16.0
    tolerance: float = 0.05

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        series = origin_series(ctx.seed, p.replicas, p.t_end, p.dt, ctx.threads)
        t, t2 = self.t, 2.0 * self.t
        target = ctx.target_scale * (
            origin_cov(t, t2, GAMMA)
            / math.sqrt(origin_cov(t, t, GAMMA) * origin_cov(t2, t2, GAMMA))
        )

        acc = EstimatorAccumulator.from_samples(np.column_stack([series.column(t), series.column(t2)]))
        r = acc.correlation(0, 1)
        halfwidth = Z_99 * (1.0 - r**2) / math.sqrt(acc.count - 3)
        ci = (r - halfwidth, r + halfwidth)
        passed = band_passed(ctx, r, target - self.tolerance, target + self.tolerance, ci)

        return CheckOutcome(
            check_id=self.check_id,
            target=target,
            estimate=r,
            ci_low=ci[0],
            ci_high=ci[1],
            passed=passed,
            detail=f"t={t:g}, 2t={t2:g}, replicas={p.replicas}",
        )


class ScalingExponentCheck(BaseCheck[OriginParams]):
    """
    Growth exponent of X_(0) lies in [0.20, 0.30].

    The estimate is the log-log slope of std(X_(0)(t)) over the dyadic window [t_mid, t_end],
    with a replica bootstrap CI. The running-sup slope over every dyadic t <= t_end goes to
    the detail line only; it sits near 0.36 at t_end = 64.
    """

    check_id = "origin_scaling_exponent"
    fast = OriginParams(replicas=500)
    full = OriginParams(replicas=2000)

    half_band: float = 0.05
    resamples: int = 400

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        series = origin_series(ctx.seed, p.replicas, p.t_end, p.dt, ctx.threads)
        window = [t for t in series.times if t >= p.t_mid]
        samples = np.column_stack([series.column(t) for t in window])
        slope = spread_exponent(window, samples)

        rng = draw_generator(ctx.seed, 1)
        n = samples.shape[0]
        resampled = [
            spread_exponent(window, samples[rng.integers(0, n, size=n)])
            for _ in range(self.resamples)
        ]
        ci_low, ci_high = (float(q) for q in np.quantile(resampled, [0.005, 0.995]))

        sup_profile = {t: float(np.mean(series.sup_column(t))) for t in series.times}
        sup_slope = fit_origin_exponent(sup_profile)

        target = ctx.target_scale * 0.25
        lo, hi = target - self.half_band, target + self.half_band
        return CheckOutcome(
            check_id=self.check_id,
            target=target,
            estimate=slope,
            ci_low=ci_low,
            ci_high=ci_high,
            passed=band_passed(ctx, slope, lo, hi, (ci_low, ci_high)),
            detail=f"std slope over t in [{window[0]:g}, {window[-1]:g}], band [{lo:.2f}, {hi:.2f}], "
            f"sup slope over [{series.times[0]:g}, {series.times[-1]:g}]: {sup_slope:.4f}, "
            f"replicas={p.replicas}",
        )


class RichardsonCheck(BaseCheck[OriginParams]):
    """The origin variance estimate at dt and dt/2 agrees within its CI half-width."""

    check_id = "richardson_dt"
    fast = OriginParams(replicas=500)
    full = OriginParams(replicas=2000)

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        target_variance = origin_cov(p.t_end, p.t_end, GAMMA)
        norm = math.sqrt(p.t_end)

        coarse = _variance_ratio(
            origin_series(ctx.seed, p.replicas, p.t_end, p.dt, ctx.threads).column(p.t_end),
            target_variance,
        )
        fine = _variance_ratio(
            origin_series(ctx.seed, p.replicas, p.t_end, p.dt / 2.0, ctx.threads).column(p.t_end),
            target_variance,
        )

        scale = target_variance / norm
        target = ctx.target_scale * coarse.estimate * scale
        estimate = fine.estimate * scale
        halfwidth = (coarse.ci_high - coarse.estimate) * scale
        return CheckOutcome(
            check_id=self.check_id,
            target=target,
            estimate=estimate,
            ci_low=target - halfwidth,
            ci_high=target + halfwidth,
            passed=abs(estimate - target) < halfwidth,
            detail=f"Var/sqrt(t) at dt={p.dt:g} vs dt={p.dt / 2:g}, t={p.t_end:g}",
        )


class TruncationParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    replicas: int
    t_end: float
    dt: float = 0.01


class TruncationCheck(BaseCheck[TruncationParams]):
    """Doubling N leaves the mean and variance of X_(0)(t_end) unchanged within the MC CI."""

    check_id = "truncation_insensitivity"
    fast = TruncationParams(replicas=200, t_end=4.0)
    full = TruncationParams(replicas=1000, t_end=16.0)

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        spec = ModelSpec.create(
            gamma=GAMMA,
            n_particles=auto_particles(GAMMA, 0.0, p.t_end),
            dt=p.dt,
            t_end=p.t_end,
            seed=ctx.seed,
        )
        report = truncation_sensitivity(spec, list(range(p.replicas)), ctx.threads)
        estimate = report.mean_doubled - report.mean
        return CheckOutcome(
            check_id=self.check_id,
            target=0.0,
            estimate=estimate,
            ci_low=-report.mean_halfwidth,
            ci_high=report.mean_halfwidth,
            passed=report.passed,
            detail=f"N={report.n_particles} vs {report.n_particles_doubled}, "
            f"variance {report.variance:.5f} vs {report.variance_doubled:.5f}",
        )
