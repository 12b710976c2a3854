# -*- coding: utf-8 -*-
"""
@Desc    : Exact Gaussian draws of the limit field, its two components and fractional Brownian motion
"""
from typing import Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict

from atlas.analytic import DEFAULT_QUADRATURE, CovarianceMatrix, covariance_matrix, fbm_cov
from atlas.errors import FactorizationError, PreconditionError
from models import FieldGrid, FieldKind, FieldSample, LimitComponent, QuadratureSpec
from settings import settings

JITTER_START = 1e-12
JITTER_BUDGET = 1e-8


class FactorizedCovariance(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grid: FieldGrid | None = None
    factor: np.ndarray
    jitter: float = 0.0

    @property
    def n(self) -> int:
        return int(self.factor.shape[0])

    def draw(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """One draw of shape (n,), or `size` draws of shape (size, n)."""
        if size is None:
            return self.factor @ rng.standard_normal(self.n)
        return rng.standard_normal((size, self.n)) @ self.factor.T


def factorize(
    cov: CovarianceMatrix | np.ndarray, limit: int | None = None
) -> FactorizedCovariance:
    """
    Cholesky factor with escalating diagonal jitter.

    Coordinates with zero variance are kept out of the factorization and come out as exact zeros.
    Jitter starts at 1e-12 trace/n and doubles up to 1e-8 trace/n.
    """
    grid = cov.grid if isinstance(cov, CovarianceMatrix) else None
    matrix = np.asarray(cov.entries if isinstance(cov, CovarianceMatrix) else cov, dtype=np.float64)
    limit = limit or settings.ATLAS_LAB_FACTORIZATION_LIMIT

    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise FactorizationError(f"covariance must be square, got {matrix.shape}")
    if n > limit:
        raise FactorizationError(f"covariance of size {n} exceeds the factorization limit {limit}")
    atol = 1e-12 * max(1.0, np.abs(matrix).max(initial=0.0))
    if not np.allclose(matrix, matrix.T, rtol=0.0, atol=atol):
        raise FactorizationError("covariance is not symmetric")

    diag = np.diag(matrix)
    if np.any(diag < 0):
        raise FactorizationError("covariance has a negative variance")
    support = diag > 0
    if np.any(np.abs(matrix[~support]) > 0):
        raise FactorizationError("zero-variance coordinate with non-zero covariance")

    factor = np.zeros((n, n))
    k = int(np.count_nonzero(support))
    if k == 0:
        return FactorizedCovariance(grid=grid, factor=factor, jitter=0.0)

    sub = matrix[np.ix_(support, support)]
    scale = float(np.trace(sub)) / k
    jitter = 0.0
    step_jitter = JITTER_START * scale
    while True:
        try:
            lower = np.linalg.cholesky(sub + jitter * np.eye(k))
            break
        except np.linalg.LinAlgError:
            jitter = step_jitter
            step_jitter *= 2.0
            if jitter > JITTER_BUDGET * scale:
                raise FactorizationError(
                    f"covariance is not positive semidefinite within jitter {JITTER_BUDGET} trace/n"
                )

    if jitter:
        logger.debug(f"Cholesky needed jitter {jitter:.3e} ({jitter / scale:.1e} trace/n)")

    factor[np.ix_(support, support)] = lower
    return FactorizedCovariance(grid=grid, factor=factor, jitter=jitter)


class LimitFieldSampler:
    """Factorizes the limit covariance on a grid once and draws from it repeatedly."""

    def __init__(
        self,
        grid: FieldGrid,
        gamma: float,
        component: LimitComponent = LimitComponent.FULL,
        quad: QuadratureSpec = DEFAULT_QUADRATURE,
    ):
        self.grid = grid
        self.gamma = gamma
        self.component = LimitComponent(component)
        self.covariance = covariance_matrix(grid, gamma, self.component, quad)
        self.factorized = factorize(self.covariance)

    def draw(self, rng: np.random.Generator) -> FieldSample:
        values = self.factorized.draw(rng).reshape(self.grid.shape)
        return FieldSample(grid=self.grid, values=values, kind=FieldKind.LIMIT)

    def draws(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """(size, grid.size) matrix of independent draws, columns in grid.cells() order."""
        return self.factorized.draw(rng, size)


def sample_limit_field(
    grid: FieldGrid,
    gamma: float,
    component: LimitComponent,
    quad: QuadratureSpec,
    rng: np.random.Generator,
) -> FieldSample:
    return LimitFieldSampler(grid, gamma, component, quad).draw(rng)


class FbmSampler:
    def __init__(self, H: float, times: Sequence[float]):
        if not 0 < H < 1:
            raise PreconditionError(f"Hurst parameter must lie in (0, 1), got {H}")
        times = np.asarray(times, dtype=np.float64)
        if times.size == 0 or times[0] < 0 or np.any(np.diff(times) < 0):
            raise PreconditionError("fBm times must be sorted and non-negative")

        self.H = H
        self.times = times
        matrix = np.array([[fbm_cov(H, s, t) for t in times] for s in times])
        self.factorized = factorize(matrix)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        return self.factorized.draw(rng)

    def draws(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.factorized.draw(rng, size)


def sample_fbm(H: float, times: Sequence[float], rng: np.random.Generator) -> np.ndarray:
    return FbmSampler(H, times).draw(rng)


def draw_generator(master_seed: int, index: int = 0) -> np.random.Generator:
    """Independent stream for the index-th batch of exact draws under one master seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=[master_seed, index]))
