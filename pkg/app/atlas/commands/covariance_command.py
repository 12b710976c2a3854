# -*- coding: utf-8 -*-
"""
@Desc    : covariance: analytic limit covariances and the sigma profile on a grid, with quadrature errors
"""
import math
import time
from typing import Callable, Iterator

from loguru import logger

from atlas.analytic import (
    CovarianceValue,
    cov_ic_with_error,
    cov_limit_with_error,
    cov_mg_with_error,
    sigma_profile,
)
from atlas.commands.common import RunConfig, RunManifest, prepare_out_dir
from atlas.errors import AtlasLabError
from models import FieldGrid
from utils import write_csv

COVARIANCE_HEADER = ("t", "x", "t_prime", "x_prime", "quantity", "value", "error", "status")
COVARIANCE_CSV = "covariance.csv"

QUANTITIES: tuple[tuple[str, Callable[..., CovarianceValue]], ...] = (
    ("cov_limit", cov_limit_with_error),
    ("cov_ic", cov_ic_with_error),
    ("cov_mg", cov_mg_with_error),
)


def covariance_rows(config: RunConfig, failures: list) -> Iterator[tuple]:
    """Upper triangle of cell pairs, then sigma at every grid point; failed cells carry nan."""
    grid = FieldGrid(times=config.grid_times, points=config.grid_points)
    cells = grid.cells()
    for i, (t, x) in enumerate(cells):
        for t_prime, x_prime in cells[i:]:
            for name, cov in QUANTITIES:
                try:
                    item = cov(t, x, t_prime, x_prime, config.gamma)
                    yield t, x, t_prime, x_prime, name, item.value, item.error, "ok"
                except AtlasLabError as err:
                    logger.error(f"{name}({t}, {x}, {t_prime}, {x_prime}) failed: {err}")
                    failures.append((name, t, x, t_prime, x_prime))
                    yield t, x, t_prime, x_prime, name, math.nan, math.nan, f"failed: {err}"

    for x in grid.points:
        try:
            yield None, x, None, None, "sigma", sigma_profile(x, config.gamma), None, "ok"
        except AtlasLabError as err:
            logger.error(f"sigma({x}) failed: {err}")
            failures.append(("sigma", x))
            yield None, x, None, None, "sigma", math.nan, None, f"failed: {err}"


def cmd_covariance(config: RunConfig) -> RunManifest:
    started = time.perf_counter()
    out_dir = prepare_out_dir(config)
    manifest = RunManifest.start("covariance", config, replicas=0)

    failures: list = []
    path = out_dir.joinpath(COVARIANCE_CSV)
    count = write_csv(path, COVARIANCE_HEADER, covariance_rows(config, failures))
    manifest.outputs.append(path.name)
    if failures:
        manifest.notes.append(f"{len(failures)} cells failed to converge, see the status column")

    manifest.wall_clock_seconds = time.perf_counter() - started
    manifest.write(out_dir)
    logger.success(f"covariance wrote {count} rows to {path}")
    return manifest
