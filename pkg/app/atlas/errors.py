# -*- coding: utf-8 -*-
"""
@Desc    : Exception hierarchy shared by every atlas module
"""


class AtlasLabError(Exception):
    """Base class for every error raised on purpose by atlas-lab."""


class ConfigError(AtlasLabError):
    """Unknown or malformed configuration key."""

    def __init__(self, key: str, reason: str = "unknown configuration key"):
        self.key = key
        super().__init__(f"{reason}: {key!r}")


class InvalidSpecError(AtlasLabError):
    pass


class StepBudgetError(AtlasLabError):
    pass


class TruncationError(AtlasLabError):
    """A rank index reached the number of simulated particles."""


class PreconditionError(AtlasLabError):
    pass


class QuadratureError(AtlasLabError):
    pass


class FactorizationError(AtlasLabError):
    pass


class DimensionError(AtlasLabError):
    pass


class DegenerateFitError(AtlasLabError):
    pass
