# -*- coding: utf-8 -*-
"""
@Desc    : Checks on the ranked configuration: Harris tagged particle, D-statistic moments, gap law
"""
import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from atlas.analytic import harris_cov
from atlas.checks.base import BaseCheck, CheckContext, CheckOutcome, auto_particles, band_passed
from atlas.dynamics import (
    ParticleState,
    ReplicaRng,
    init_equilibrium,
    run_ensemble,
    tagged_rank_origin,
)
from atlas.observables import d_statistic
from atlas.stats import EstimatorAccumulator, ks_test, variance_ratio_ci
from models import ModelKind, ModelSpec

GAMMA = 1.0


class HarrisParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    replicas: int
    t: float = 64.0
    dt: float = 0.01


class HarrisVarianceCheck(BaseCheck[HarrisParams]):
    """Var of the k0-th order statistic of the Harris system over sqrt(t) against (2 pi)^{-1/2}/gamma."""

    check_id = "harris_tagged_variance"
    fast = HarrisParams(replicas=500)
    full = HarrisParams(replicas=2000)

    band: float = 0.10

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        spec = ModelSpec.create(
            gamma=GAMMA,
            kind=ModelKind.HARRIS,
            n_particles=2 * auto_particles(GAMMA, 0.0, p.t),
            dt=p.dt,
            t_end=p.t,
            seed=ctx.seed,
        )
        k0 = tagged_rank_origin(init_equilibrium(spec, ReplicaRng(spec.seed, 0)))

        result = run_ensemble(
            spec, [p.t], lambda _, state: float(state.ranked[k0]), p.replicas, ctx.threads
        )
        values = np.array(result.column(p.t))

        target = ctx.target_scale * harris_cov(1.0, 1.0, GAMMA)
        acc = EstimatorAccumulator.from_samples(values[:, None])
        ratio = variance_ratio_ci(acc, target * math.sqrt(p.t), level=0.99)
        estimate = ratio.estimate * target
        ci = (ratio.ci_low * target, ratio.ci_high * target)

        return CheckOutcome(
            check_id=self.check_id,
            target=target,
            estimate=estimate,
            ci_low=ci[0],
            ci_high=ci[1],
            passed=band_passed(ctx, estimate, target * (1 - self.band), target * (1 + self.band), ci),
            detail=f"k0={k0}, N={spec.n_particles}, t={p.t:g}, replicas={p.replicas}",
        )


class DStatisticParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    replicas: int
    ks: Tuple[int, ...]
    times: Tuple[float, ...] = (0.0, 1.0, 10.0)
    dt: float = 0.01


class DStatisticCheck(BaseCheck[DStatisticParams]):
    """E[D(0, k, t)^2] = k at stationarity, within 3 standard errors for every (t, k)."""

    check_id = "d_statistic_second_moment"
    fast = DStatisticParams(replicas=2000, ks=(10, 100))
    full = DStatisticParams(replicas=10_000, ks=(10, 100, 1000))

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        t_end = max(p.times)
        spec = ModelSpec.create(
            gamma=GAMMA,
            n_particles=auto_particles(GAMMA, 0.0, t_end, extra=max(p.ks)),
            dt=p.dt,
            t_end=t_end,
            seed=ctx.seed,
        )

        def observe(_, state: ParticleState):
            return [d_statistic(state, 0, k, GAMMA) ** 2 for k in p.ks]

        result = run_ensemble(spec, p.times, observe, p.replicas, ctx.threads)

        worst = None
        lines = []
        passed = True
        for t in p.times:
            acc = EstimatorAccumulator.from_samples(np.array(result.column(t)))
            for i, k in enumerate(p.ks):
                mean = float(acc.mean[i])
                stderr = float(acc.stderr_of_mean()[i])
                target = ctx.target_scale * k
                z = abs(mean - target) / stderr
                ok = z <= 3.0
                passed = passed and ok
                lines.append(f"t={t:g} k={k}: {mean:.4g} +- {stderr:.2g}")
                if worst is None or z > worst[0]:
                    worst = (z, mean / k, stderr / k)

        _, ratio, stderr = worst
        return CheckOutcome(
            check_id=self.check_id,
            target=ctx.target_scale,
            estimate=ratio,
            ci_low=ratio - 3.0 * stderr,
            ci_high=ratio + 3.0 * stderr,
            passed=passed,
            detail="worst E[D^2]/k reported; " + "; ".join(lines),
        )


class GapParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    replicas: int
    n_gaps: int = 500
    t: float = 10.0
    dt: float = 0.01
    level: float = 0.01
    min_pass_rate: float = 0.97


class GapStationarityCheck(BaseCheck[GapParams]):
    """The lowest gaps at time t pass a KS test against Exp(2 gamma) in most replicas."""

    check_id = "gap_stationarity"
    fast = GapParams(replicas=100)
    full = GapParams(replicas=300)

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        spec = ModelSpec.create(
            gamma=GAMMA,
            n_particles=auto_particles(GAMMA, 0.0, p.t, extra=p.n_gaps),
            dt=p.dt,
            t_end=p.t,
            seed=ctx.seed,
        )
        rate = 2.0 * GAMMA * ctx.target_scale

        def observe(_, state: ParticleState) -> float:
            return ks_test(state.gaps[: p.n_gaps], lambda y: -np.expm1(-rate * y)).p_value

        p_values = np.array(run_ensemble(spec, [p.t], observe, p.replicas, ctx.threads).column(p.t))
        rate_passed = float(np.mean(p_values >= p.level))
        spread = max(rate_passed * (1 - rate_passed), 1e-12)
        halfwidth = 2.5758293035489004 * math.sqrt(spread / p.replicas)

        return CheckOutcome(
            check_id=self.check_id,
            target=p.min_pass_rate,
            estimate=rate_passed,
            ci_low=rate_passed - halfwidth,
            ci_high=rate_passed + halfwidth,
            passed=rate_passed >= p.min_pass_rate,
            detail=f"{p.n_gaps} gaps at t={p.t:g} vs Exp({rate:g}), level {p.level}, replicas={p.replicas}",
        )
