# -*- coding: utf-8 -*-
"""
@Desc    : Shared fixtures: small model specs and log sink cleanup
"""
import pytest
from loguru import logger

from models import ModelKind, ModelSpec


@pytest.fixture(autouse=True)
def reset_log_sinks():
    """Commands install file sinks under tmp dirs; drop them after every test."""
    yield
    logger.remove()


@pytest.fixture
def atlas_spec() -> ModelSpec:
    return ModelSpec(gamma=1.0, kind=ModelKind.ATLAS, n_particles=60, dt=0.01, t_end=1.0, seed=7)


@pytest.fixture
def harris_spec() -> ModelSpec:
    return ModelSpec(gamma=1.0, kind=ModelKind.HARRIS, n_particles=61, dt=0.01, t_end=1.0, seed=7)
