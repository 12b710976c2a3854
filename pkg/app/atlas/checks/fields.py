# -*- coding: utf-8 -*-
"""
@Desc    : Field-level checks at finite epsilon: bulk/origin ratio, increment covariance, bridge identities
"""
import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from atlas.analytic import bulk_cov, covariance_matrix, origin_cov
from atlas.checks.base import (
    BaseCheck,
    CheckContext,
    CheckOutcome,
    Tier,
    auto_particles,
    band_passed,
)
from atlas.dynamics import ParticleState, record_trajectories, run_ensemble
from atlas.observables import bridge_residual, scaled_value, smoothed_field
from atlas.stats import EstimatorAccumulator
from models import FieldGrid, ModelSpec, ScalingSpec

GAMMA = 1.0
Z_99 = 2.5758293035489004


def _spec(ctx: CheckContext, x_max: float, horizon: float, dt: float) -> ModelSpec:
    return ModelSpec.create(
        gamma=GAMMA,
        n_particles=auto_particles(GAMMA, x_max, horizon),
        dt=dt,
        t_end=horizon,
        seed=ctx.seed,
    )


class RatioParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    replicas: int
    epsilon: float = 1.0 / 64.0
    t: float = 1.0
    x_bulk: float = 8.0
    dt: float = 0.01
    band: float = 0.2


class BulkOriginRatioCheck(BaseCheck[RatioParams]):
    """Variance of the displacement field at x=0 over that deep in the bulk tends to 2."""

    check_id = "bulk_origin_ratio"
    fast = RatioParams(replicas=500)
    full = RatioParams(replicas=2000)

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        eps = p.epsilon
        horizon = p.t / eps
        spec = _spec(ctx, p.x_bulk / math.sqrt(eps), horizon, p.dt)

        def observe(_, state: ParticleState):
            return [scaled_value(state, eps, GAMMA, 0.0), scaled_value(state, eps, GAMMA, p.x_bulk)]

        result = run_ensemble(spec, [0.0, horizon], observe, p.replicas, ctx.threads)
        displacement = np.array(result.column(horizon)) - np.array(result.column(0.0))
        acc = EstimatorAccumulator.from_samples(displacement)

        variance = acc.variance
        ratio = float(variance[0] / variance[1])
        se_log = math.sqrt(4.0 / (acc.count - 1))
        ci = (ratio * math.exp(-Z_99 * se_log), ratio * math.exp(Z_99 * se_log))

        target = ctx.target_scale * origin_cov(p.t, p.t, GAMMA) / bulk_cov(p.t, p.t, GAMMA)
        return CheckOutcome(
            check_id=self.check_id,
            target=target,
            estimate=ratio,
            ci_low=ci[0],
            ci_high=ci[1],
            passed=band_passed(ctx, ratio, target * (1 - p.band), target * (1 + p.band), ci),
            detail=f"eps={eps:g}, t={p.t:g}, x_bulk={p.x_bulk:g}, replicas={p.replicas}",
        )


class FieldCovarianceParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    replicas: int
    epsilons: Tuple[float, float] = (1.0 / 64.0, 1.0 / 16.0)
    times: Tuple[float, ...] = (1.0, 2.0)
    points: Tuple[float, ...] = (0.0, 1.0)
    dt: float = 0.01
    tolerance: float = 0.15


def increment_covariance(times, points, gamma: float) -> np.ndarray:
    """Limit covariance of X_t(x) - X_0(x) on the (t, x) grid, cells in row-major order."""
    grid = FieldGrid(times=[0.0, *times], points=list(points))
    full = covariance_matrix(grid, gamma).entries
    n_points = len(points)
    n_cells = len(times) * n_points

    # rows map the (T+1) x P field onto its T x P increments
    increments = np.zeros((n_cells, grid.size))
    for a in range(len(times)):
        for b in range(n_points):
            increments[a * n_points + b, (a + 1) * n_points + b] = 1.0
            increments[a * n_points + b, b] = -1.0
    return increments @ full @ increments.T


class FieldCovarianceCheck(BaseCheck[FieldCovarianceParams]):
    """Empirical increment covariance of the scaled field against the limit, entrywise."""

    check_id = "field_covariance"
    fast = FieldCovarianceParams(replicas=300)
    full = FieldCovarianceParams(replicas=2000)

    def _empirical(self, ctx: CheckContext, p: FieldCovarianceParams, eps: float):
        horizon = max(p.times) / eps
        spec = _spec(ctx, max(p.points) / math.sqrt(eps), horizon, p.dt)

        def observe(_, state: ParticleState):
            return [scaled_value(state, eps, GAMMA, x) for x in p.points]

        observed = [t / eps for t in p.times]
        result = run_ensemble(spec, [0.0, *observed], observe, p.replicas, ctx.threads)
        start = np.array(result.column(0.0))
        samples = np.concatenate([np.array(result.column(t)) - start for t in observed], axis=1)
        acc = EstimatorAccumulator.from_samples(samples)
        return acc.covariance, acc.stderr_of_covariance()

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        target = ctx.target_scale * increment_covariance(p.times, p.points, GAMMA)
        diag = np.sqrt(np.diag(target))
        norm = np.outer(diag, diag)

        discrepancy = {}
        noise = {}
        for eps in p.epsilons:
            cov, stderr = self._empirical(ctx, p, eps)
            discrepancy[eps] = float(np.max(np.abs(cov - target) / norm))
            noise[eps] = float(np.max(stderr / norm))

        fine, coarse = p.epsilons
        estimate = discrepancy[fine]
        if ctx.tier == Tier.FULL:
            passed = estimate <= p.tolerance and estimate <= discrepancy[coarse]
        else:
            passed = estimate <= p.tolerance + 3.0 * noise[fine]

        return CheckOutcome(
            check_id=self.check_id,
            target=0.0,
            estimate=estimate,
            ci_low=0.0,
            ci_high=p.tolerance,
            passed=passed,
            detail=f"max normalised entry error {estimate:.4f} at eps={fine:g}, "
            f"{discrepancy[coarse]:.4f} at eps={coarse:g}, MC noise {noise[fine]:.4f}",
        )


class BridgeParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    replicas: int
    epsilon: float = 1.0 / 64.0
    times: Tuple[float, ...] = (0.5, 1.0)
    points: Tuple[float, ...] = (0.25, 0.5, 1.0)
    dt: float = 0.01
    tolerance: float = 1e-12


class BridgeIdentityCheck(BaseCheck[BridgeParams]):
    """G - X~ = eps^{1/4} (D(I_t, I_0) + 2 gamma rho) holds on simulated states up to rounding."""

    check_id = "bridge_identity"
    fast = BridgeParams(replicas=50)
    full = BridgeParams(replicas=200)

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        eps = p.epsilon
        observed = [t / eps for t in p.times]
        spec = _spec(ctx, max(p.points) / math.sqrt(eps), max(observed), p.dt)
        trajectories = record_trajectories(spec, observed, p.replicas, ctx.threads)

        worst = max(
            abs(bridge_residual(trajectory.initial, trajectory.at(t), eps, GAMMA, x))
            for trajectory in trajectories
            for t in observed
            for x in p.points
        )
        return CheckOutcome(
            check_id=self.check_id,
            target=0.0,
            estimate=worst,
            ci_low=0.0,
            ci_high=p.tolerance,
            passed=worst <= p.tolerance,
            detail=f"max |residual| over {len(trajectories)} replicas, eps={eps:g}",
        )


class SmoothedBridgeParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    replicas: int
    epsilons: Tuple[float, float] = (1.0 / 64.0, 1.0 / 16.0)
    delta_exponent: float = 0.6
    shift_exponent: float = 0.2
    t: float = 1.0
    points: Tuple[float, ...] = (0.5, 1.0)
    dt: float = 0.01


class SmoothedBridgeCheck(BaseCheck[SmoothedBridgeParams]):
    """RMS of F^{eps, eps^a}(x + eps^b) - X^eps(x) decreases as eps shrinks."""

    check_id = "smoothed_bridge"
    fast = SmoothedBridgeParams(replicas=300)
    full = SmoothedBridgeParams(replicas=2000)

    def _rms(self, ctx: CheckContext, p: SmoothedBridgeParams, eps: float) -> float:
        scaling = ScalingSpec(
            epsilon=eps, delta=eps**p.delta_exponent, b_exponent=p.shift_exponent
        )
        shift = eps**p.shift_exponent
        horizon = scaling.unscaled_time(p.t)
        spec = _spec(ctx, (max(p.points) + shift) / math.sqrt(eps), horizon, p.dt)

        def observe(_, state: ParticleState):
            return [
                smoothed_field(state, scaling, GAMMA, x + shift) - scaled_value(state, eps, GAMMA, x)
                for x in p.points
            ]

        result = run_ensemble(spec, [horizon], observe, p.replicas, ctx.threads)
        differences = np.array(result.column(horizon))
        return float(np.sqrt(np.mean(differences**2)))

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        fine, coarse = p.epsilons
        rms_fine = self._rms(ctx, p, fine)
        rms_coarse = self._rms(ctx, p, coarse)

        target = rms_coarse / ctx.target_scale
        return CheckOutcome(
            check_id=self.check_id,
            target=target,
            estimate=rms_fine,
            ci_low=0.0,
            ci_high=target,
            passed=rms_fine < target,
            detail=f"RMS {rms_fine:.4f} at eps={fine:g} vs {rms_coarse:.4f} at eps={coarse:g}",
        )
