# -*- coding: utf-8 -*-
"""
@Desc    : Shared domain types: model parameters, grids, field samples, quadrature options
"""
import math
from enum import StrEnum
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from atlas.errors import InvalidSpecError


class ModelKind(StrEnum):
    ATLAS = "atlas"
    """
    Only the lowest ranked particle receives the drift gamma
    """

    HARRIS = "harris"
    """
    Independent Brownian particles on both sides of the origin, no drift
    """


class TopPolicy(StrEnum):
    FREE = "free"
    SENSITIVITY_CHECKED = "sensitivity_checked"


class InitialCondition(StrEnum):
    EQUILIBRIUM = "equilibrium"
    LATTICE = "lattice"


class FieldKind(StrEnum):
    SCALED_X = "scaled_x"
    CENTERED_COUNT = "centered_count"
    SMOOTHED = "smoothed"
    TAGGED_Z = "tagged_z"
    LIMIT = "limit"


class LimitComponent(StrEnum):
    FULL = "full"
    INITIAL_W = "initial_w"
    MARTINGALE_M = "martingale_m"


class KernelConvention(StrEnum):
    SHAPE = "shape"
    """
    p_t(x) = p(x t^{-1/2}), no t^{-1/2} prefactor
    """

    DENSITY = "density"
    """
    (2 pi t)^{-1/2} exp(-x^2 / 2t)
    """


class ModelSpec(BaseModel):
    """Physical and numerical parameters of one particle system."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(default=1.0, gt=0, description="Drift strength, density is 2*gamma")
    kind: ModelKind = Field(default=ModelKind.ATLAS)
    n_particles: int = Field(default=256, ge=2)
    dt: float = Field(default=0.01, gt=0)
    t_end: float = Field(default=1.0, ge=0)
    top_policy: TopPolicy = Field(default=TopPolicy.FREE)
    seed: int = Field(default=0, ge=0, lt=2**64, description="64-bit master seed")

    @field_validator("gamma", "dt", "t_end")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v

    @classmethod
    def create(cls, **kwargs) -> "ModelSpec":
        try:
            return cls(**kwargs)
        except ValidationError as err:
            raise InvalidSpecError(str(err)) from err

    @property
    def density(self) -> float:
        return 2.0 * self.gamma

    @property
    def mean_gap(self) -> float:
        return 1.0 / (2.0 * self.gamma)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def check_axis(v: List[float]) -> List[float]:
    """A grid axis is non-empty, finite, non-negative and strictly increasing."""
    if not v:
        raise ValueError("grid axis must not be empty")
    if any(not math.isfinite(x) or x < 0 for x in v):
        raise ValueError("grid values must be finite and non-negative")
    if any(b <= a for a, b in zip(v, v[1:])):
        raise ValueError("grid values must be strictly increasing")
    return v


class FieldGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    times: List[float]
    points: List[float]

    @field_validator("times", "points")
    @classmethod
    def _strictly_increasing(cls, v: List[float]) -> List[float]:
        return check_axis(v)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.times), len(self.points)

    @property
    def size(self) -> int:
        return len(self.times) * len(self.points)

    def cells(self) -> List[tuple[float, float]]:
        """(t, x) pairs in row-major order, time first."""
        return [(t, x) for t in self.times for x in self.points]


class FieldSample(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grid: FieldGrid
    values: np.ndarray
    kind: FieldKind

    @model_validator(mode="after")
    def _dimensions_match(self) -> "FieldSample":
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")
        return self

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


class ScalingSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(gt=0, le=1)
    delta: float = Field(default=0.0, ge=0)
    b_exponent: float = Field(default=0.2, gt=0, lt=0.25)

    def unscaled_time(self, t: float) -> float:
        return t / self.epsilon


class QuadratureSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsabs: float = Field(default=1e-10, gt=0)
    epsrel: float = Field(default=1e-10, gt=0)
    limit: int = Field(default=400, ge=1, description="Max subdivisions of the adaptive rule")
    c_tail: float = Field(default=10.0, gt=0, description="Tail truncation multiplier")
