# -*- coding: utf-8 -*-
"""
@Desc    : Acceptance check registry and auto-registration
"""

from .base import BaseCheck, CheckContext, CheckOutcome, Tier, check_registry
from .fields import (
    BridgeIdentityCheck,
    BulkOriginRatioCheck,
    FieldCovarianceCheck,
    SmoothedBridgeCheck,
)
from .limits import (
    CovarianceAnchorCheck,
    DecompositionCheck,
    LimitSamplerCheck,
    RawQuadratureCheck,
    SigmaAnchorCheck,
)
from .origin import (
    IncrementCorrelationCheck,
    LatticeOriginVarianceCheck,
    OriginVarianceCheck,
    RichardsonCheck,
    ScalingExponentCheck,
    TruncationCheck,
)
from .particles import DStatisticCheck, GapStationarityCheck, HarrisVarianceCheck


def _register_checks():
    """Register every check; the verify report follows this order."""
    checks = [
        # exact and cheap first
        CovarianceAnchorCheck(),
        SigmaAnchorCheck(),
        DecompositionCheck(),
        RawQuadratureCheck(),
        LimitSamplerCheck(),
        # Monte Carlo
        OriginVarianceCheck(),
        IncrementCorrelationCheck(),
        HarrisVarianceCheck(),
        BulkOriginRatioCheck(),
        DStatisticCheck(),
        GapStationarityCheck(),
        FieldCovarianceCheck(),
        BridgeIdentityCheck(),
        SmoothedBridgeCheck(),
        ScalingExponentCheck(),
        RichardsonCheck(),
        LatticeOriginVarianceCheck(),
        TruncationCheck(),
    ]
    for check in checks:
        check_registry.register(check)


_register_checks()

__all__ = [
    "check_registry",
    "BaseCheck",
    "CheckContext",
    "CheckOutcome",
    "Tier",
]
