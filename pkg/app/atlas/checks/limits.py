# -*- coding: utf-8 -*-
"""
@Desc    : Exact checks on the limit covariance and the Monte Carlo self-check of the limit sampler
"""
import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from atlas.analytic import cov_ic, cov_limit, cov_mg, raw_time_integral, sigma_profile
from atlas.checks.base import BaseCheck, CheckContext, CheckOutcome
from atlas.gaussian import LimitFieldSampler, draw_generator
from atlas.stats import EstimatorAccumulator
from models import FieldGrid

GAMMA = 1.0


class AnalyticParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    tolerance: float = 1e-6
    points: int = 20


class CovarianceAnchorCheck(BaseCheck[AnalyticParams]):
    """cov_limit(1, 0, 1, 0) = 4 sqrt(2/pi) at gamma = 1."""

    check_id = "analytic_cov_anchor"
    fast = full = AnalyticParams()

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        tol = self.params(ctx).tolerance
        target = ctx.target_scale * 4.0 * math.sqrt(2.0 / math.pi)
        estimate = cov_limit(1.0, 0.0, 1.0, 0.0, GAMMA)
        return CheckOutcome(
            check_id=self.check_id,
            target=target,
            estimate=estimate,
            ci_low=target - tol,
            ci_high=target + tol,
            passed=abs(estimate - target) <= tol,
        )


class SigmaAnchorCheck(BaseCheck[AnalyticParams]):
    """sigma(0) = (2/pi)^{1/4} within 1e-6 and sigma(50) = (2 pi)^{-1/4} within 1e-3."""

    check_id = "analytic_sigma_anchors"
    fast = full = AnalyticParams()

    far_tolerance: float = 1e-3

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        tol = self.params(ctx).tolerance
        target = ctx.target_scale * (2.0 / math.pi) ** 0.25
        far_target = ctx.target_scale * (2.0 * math.pi) ** -0.25
        estimate = sigma_profile(0.0, GAMMA)
        far = sigma_profile(50.0, GAMMA)
        return CheckOutcome(
            check_id=self.check_id,
            target=target,
            estimate=estimate,
            ci_low=target - tol,
            ci_high=target + tol,
            passed=abs(estimate - target) <= tol and abs(far - far_target) <= self.far_tolerance,
            detail=f"sigma(50) = {far:.6f} vs {far_target:.6f}",
        )


class DecompositionCheck(BaseCheck[AnalyticParams]):
    """cov_ic + cov_mg = cov_limit on random points."""

    check_id = "analytic_decomposition"
    fast = full = AnalyticParams(tolerance=1e-10)

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        rng = draw_generator(ctx.seed, 0)
        worst = 0.0
        for t, x, tp, xp in rng.uniform(0.0, 4.0, size=(p.points, 4)):
            limit = cov_limit(t, x, tp, xp, GAMMA)
            parts = ctx.target_scale * (cov_ic(t, x, tp, xp, GAMMA) + cov_mg(t, x, tp, xp, GAMMA))
            worst = max(worst, abs(parts - limit))
        return CheckOutcome(
            check_id=self.check_id,
            target=0.0,
            estimate=worst,
            ci_low=0.0,
            ci_high=p.tolerance,
            passed=worst <= p.tolerance,
            detail=f"max |ic + mg - limit| over {p.points} points in [0, 4]^4",
        )


class RawQuadratureCheck(BaseCheck[AnalyticParams]):
    """Nested 2-D quadrature of the time term against its 1-D reduction on random cells."""

    check_id = "analytic_raw_quadrature"
    fast = full = AnalyticParams()

    def cells(self, ctx: CheckContext) -> np.ndarray:
        """(t, x, t', x') rows: times in [0.25, 4], points in [0, 4]."""
        rng = draw_generator(ctx.seed, 2)
        n = self.params(ctx).points
        times = rng.uniform(0.25, 4.0, size=(n, 2))
        points = rng.uniform(0.0, 4.0, size=(n, 2))
        return np.column_stack([times[:, 0], points[:, 0], times[:, 1], points[:, 1]])

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        tol = self.params(ctx).tolerance
        results = []
        for cell in self.cells(ctx):
            t, x, tp, xp = (float(v) for v in cell)
            reduced = ctx.target_scale * cov_mg(t, x, tp, xp, GAMMA)
            raw = raw_time_integral(t, x, tp, xp, GAMMA)
            line = f"({t:.3f},{x:.3f},{tp:.3f},{xp:.3f}): {raw:.9f} vs {reduced:.9f}"
            results.append((abs(raw - reduced), line))
        error, line = max(results)
        return CheckOutcome(
            check_id=self.check_id,
            target=0.0,
            estimate=error,
            ci_low=0.0,
            ci_high=tol,
            passed=error <= tol,
            detail=f"worst of {self.params(ctx).points} cells {line}",
        )


class SamplerParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    draws: int
    times: Tuple[float, ...] = (1.0, 2.0)
    points: Tuple[float, ...] = (0.0, 1.0)


class LimitSamplerCheck(BaseCheck[SamplerParams]):
    """Empirical covariance of exact limit draws matches cov_limit within 3 standard errors."""

    check_id = "limit_sampler_covariance"
    fast = SamplerParams(draws=20_000)
    full = SamplerParams(draws=100_000)

    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        p = self.params(ctx)
        grid = FieldGrid(times=list(p.times), points=list(p.points))
        sampler = LimitFieldSampler(grid, GAMMA)
        acc = EstimatorAccumulator.from_samples(sampler.draws(draw_generator(ctx.seed, 0), p.draws))

        target = ctx.target_scale * sampler.covariance.entries
        z = np.abs(acc.covariance - target) / acc.stderr_of_covariance()
        i, j = np.unravel_index(int(np.argmax(z)), z.shape)
        stderr = float(acc.stderr_of_covariance()[i, j])
        estimate = float(acc.covariance[i, j])
        return CheckOutcome(
            check_id=self.check_id,
            target=float(target[i, j]),
            estimate=estimate,
            ci_low=estimate - 3.0 * stderr,
            ci_high=estimate + 3.0 * stderr,
            passed=bool(np.all(z <= 3.0)),
            detail=f"worst entry ({grid.cells()[i]}, {grid.cells()[j]}) at {float(z[i, j]):.2f} stderr, "
            f"{p.draws} draws, jitter {sampler.factorized.jitter:.1e}",
        )
