# -*- coding: utf-8 -*-
"""
@Desc    : sample-limit: exact draws of the limit field, one of its components, or H-fBm
"""
import time
from typing import Iterator

import numpy as np
from loguru import logger

from atlas.commands.common import RunConfig, RunManifest, prepare_out_dir
from atlas.commands.simulate_command import SIMULATE_HEADER
from atlas.gaussian import FbmSampler, LimitFieldSampler, draw_generator
from models import FieldGrid
from utils import write_csv

SAMPLE_LIMIT_CSV = "sample_limit.csv"


def _field_rows(config: RunConfig, draws: np.ndarray, grid: FieldGrid) -> Iterator[tuple]:
    cells = grid.cells()
    name = config.component.value
    for index, draw in enumerate(draws):
        for (t, x), value in zip(cells, draw):
            yield index, t, x, name, value


def _fbm_rows(config: RunConfig, draws: np.ndarray) -> Iterator[tuple]:
    for index, draw in enumerate(draws):
        for t, value in zip(config.grid_times, draw):
            yield index, t, None, "fbm", value


def cmd_sample_limit(config: RunConfig) -> RunManifest:
    """`replica` holds the draw index; draws are independent and reproducible from the seed."""
    started = time.perf_counter()
    out_dir = prepare_out_dir(config)
    manifest = RunManifest.start("sample-limit", config, replicas=config.draws)
    rng = draw_generator(config.seed, 0)

    if config.hurst is not None:
        sampler = FbmSampler(config.hurst, config.grid_times)
        rows = _fbm_rows(config, sampler.draws(rng, config.draws))
        jitter = sampler.factorized.jitter
    else:
        grid = FieldGrid(times=config.grid_times, points=config.grid_points)
        sampler = LimitFieldSampler(grid, config.gamma, config.component)
        rows = _field_rows(config, sampler.draws(rng, config.draws), grid)
        jitter = sampler.factorized.jitter

    if jitter:
        manifest.notes.append(f"Cholesky factorization used diagonal jitter {jitter:.3e}")

    path = out_dir.joinpath(SAMPLE_LIMIT_CSV)
    count = write_csv(path, SIMULATE_HEADER, rows)
    manifest.outputs.append(path.name)

    manifest.wall_clock_seconds = time.perf_counter() - started
    manifest.write(out_dir)
    logger.success(f"sample-limit wrote {count} rows to {path}")
    return manifest
