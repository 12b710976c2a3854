# -*- coding: utf-8 -*-
"""
@Desc    : Base classes for acceptance checks and the registry the verify harness draws from
"""
import math
import time
from abc import ABC, abstractmethod
from enum import StrEnum
from typing import Dict, Generic, List, Optional, Tuple, TypeVar

from loguru import logger
from pydantic import BaseModel, Field

from atlas.dynamics import default_particles


class Tier(StrEnum):
    FAST = "fast"
    """
    Desk-scale sizes; Monte Carlo bands are widened by the estimator's own CI
    """

    FULL = "full"
    """
    Acceptance sizes; bands are applied as stated
    """


class CheckContext(BaseModel):
    tier: Tier = Tier.FAST
    seed: int = 20240601
    threads: int | None = None
    target_scale: float = Field(
        default=1.0, gt=0, description="Multiplies every target; 1.5 gives the forced-failure run"
    )


class CheckOutcome(BaseModel):
    check_id: str
    target: float
    estimate: float
    ci_low: float = Field(
        description="Monte Carlo CI where the estimator has one, else the acceptance band"
    )
    ci_high: float
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    error: str | None = None

    @classmethod
    def failure(cls, check_id: str, error: str) -> "CheckOutcome":
        nan = math.nan
        return cls(
            check_id=check_id,
            target=nan,
            estimate=nan,
            ci_low=nan,
            ci_high=nan,
            passed=False,
            error=error,
        )


P = TypeVar("P", bound=BaseModel)


class BaseCheck(ABC, Generic[P]):
    """One acceptance criterion, parameterised per tier."""

    check_id: str = ""

    tiers: Tuple[Tier, ...] = (Tier.FAST, Tier.FULL)

    fast: P
    full: P

    def params(self, ctx: CheckContext) -> P:
        return self.full if ctx.tier == Tier.FULL else self.fast

    @abstractmethod
    def _evaluate(self, ctx: CheckContext) -> CheckOutcome:
        pass

    def invoke(self, ctx: CheckContext) -> CheckOutcome:
        """Run the check; any failure is recorded in the outcome instead of propagating."""
        started = time.perf_counter()
        logger.info(f"Running check {self.check_id} ({ctx.tier})")
        try:
            outcome = self._evaluate(ctx)
        except Exception as err:
            logger.exception(f"Check {self.check_id} raised: {err}")
            outcome = CheckOutcome.failure(self.check_id, f"{type(err).__name__}: {err}")

        outcome.seconds = time.perf_counter() - started
        if outcome.passed:
            logger.success(
                f"{self.check_id}: estimate={outcome.estimate:.6g} target={outcome.target:.6g}"
            )
        else:
            logger.warning(
                f"{self.check_id} FAILED: estimate={outcome.estimate:.6g} target={outcome.target:.6g} "
                f"{outcome.detail or outcome.error or ''}"
            )
        return outcome


class CheckRegistry:
    def __init__(self):
        self._checks: Dict[str, BaseCheck] = {}

    def register(self, check: BaseCheck) -> None:
        if not check.check_id:
            raise ValueError(f"Check {check.__class__.__name__} must define check_id")
        if check.check_id in self._checks:
            raise ValueError(f"Duplicate check id {check.check_id}")
        self._checks[check.check_id] = check

    def get_check(self, check_id: str) -> Optional[BaseCheck]:
        return self._checks.get(check_id)

    def get_checks(self, tier: Tier) -> List[BaseCheck]:
        """Checks of a tier in registration order."""
        return [check for check in self._checks.values() if tier in check.tiers]

    def get_check_ids(self, tier: Tier | None = None) -> List[str]:
        if tier is None:
            return list(self._checks)
        return [check.check_id for check in self.get_checks(tier)]


check_registry = CheckRegistry()


def band_passed(
    ctx: CheckContext, estimate: float, low: float, high: float, ci: Tuple[float, float]
) -> bool:
    """Full tier: the estimate lies in [low, high]. Fast tier: its CI meets [low, high]."""
    if ctx.tier == Tier.FULL:
        return low <= estimate <= high
    return ci[1] >= low and ci[0] <= high


def auto_particles(gamma: float, x_max: float, t_end: float, extra: int = 0) -> int:
    n = default_particles(gamma, x_max, t_end) + extra
    logger.info(f"N auto-selected: {n} particles (gamma={gamma}, x_max={x_max}, t_end={t_end})")
    return n
