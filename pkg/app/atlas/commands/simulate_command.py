# -*- coding: utf-8 -*-
"""
@Desc    : simulate: replicas of the particle system, observable time series as CSV
"""
import math
import time
from typing import Iterator, Sequence

from loguru import logger

from atlas.commands.common import (
    RunConfig,
    RunManifest,
    model_spec,
    prepare_out_dir,
    snapping_notes,
)
from atlas.dynamics import (
    Trajectory,
    record_trajectories,
    snap_times,
    tagged_rank_origin,
    truncation_sensitivity,
)
from atlas.observables import centered_count, scaled_value, smoothed_field, tagged_value
from models import ModelKind, ScalingSpec, TopPolicy
from utils import write_csv

SIMULATE_HEADER = ("replica", "t", "x", "observable", "value")
SIMULATE_CSV = "simulate.csv"


def _atlas_rows(
    trajectory: Trajectory, config: RunConfig, scaling: ScalingSpec, times: Sequence[float]
) -> Iterator[tuple]:
    eps, gamma = config.epsilon, config.gamma
    state0 = trajectory.initial
    r = trajectory.replica
    for t, unscaled in times:
        state = trajectory.at(unscaled)
        yield r, t, None, "lowest", state.lowest
        yield r, t, None, "origin_sup", state.origin_sup
        for x in config.grid_points:
            yield r, t, x, "scaled_x", scaled_value(state, eps, gamma, x)
            yield r, t, x, "centered_count", centered_count(state, eps, gamma, x)
            yield r, t, x, "tagged_z", tagged_value(state0, state, eps, gamma, x)
            if scaling.delta > 0:
                yield r, t, x, "smoothed", smoothed_field(state, scaling, gamma, x)


def _harris_rows(trajectory: Trajectory, times: Sequence[float]) -> Iterator[tuple]:
    k0 = tagged_rank_origin(trajectory.initial)
    for t, unscaled in times:
        yield trajectory.replica, t, None, "tagged_particle", float(trajectory.at(unscaled).ranked[k0])


def cmd_simulate(config: RunConfig) -> RunManifest:
    """Observables at the scaled grid times t, i.e. at unscaled times t/epsilon."""
    started = time.perf_counter()
    out_dir = prepare_out_dir(config)
    manifest = RunManifest.start("simulate", config)

    scaling = ScalingSpec(epsilon=config.epsilon, delta=config.delta)
    smoothing_reach = 10.0 * math.sqrt(config.delta)
    x_max = (max(config.grid_points) + smoothing_reach) / math.sqrt(config.epsilon)
    spec, notes = model_spec(config, x_max)
    manifest.notes.extend(notes)

    snapped = snap_times(spec, [scaling.unscaled_time(t) for t in config.grid_times])
    manifest.notes.extend(snapping_notes(snapped))
    times = [(t, s.snapped) for t, s in zip(config.grid_times, snapped)]

    free = spec.model_copy(update={"top_policy": TopPolicy.FREE})
    trajectories = record_trajectories(
        free, [s.snapped for s in snapped], config.replicas, config.threads_resolved, config.initial
    )

    def rows() -> Iterator[tuple]:
        for trajectory in trajectories:
            if spec.kind == ModelKind.HARRIS:
                yield from _harris_rows(trajectory, times)
            else:
                yield from _atlas_rows(trajectory, config, scaling, times)

    path = out_dir.joinpath(SIMULATE_CSV)
    count = write_csv(path, SIMULATE_HEADER, rows())
    manifest.outputs.append(path.name)

    if spec.top_policy == TopPolicy.SENSITIVITY_CHECKED:
        report = truncation_sensitivity(
            spec, list(range(config.replicas)), config.threads_resolved, config.initial
        )
        manifest.sensitivity = report
        if not report.passed:
            manifest.notes.append(
                f"truncation sensitivity: N={report.n_particles} and N={report.n_particles_doubled} "
                f"differ beyond the Monte Carlo half-width"
            )

    manifest.wall_clock_seconds = time.perf_counter() - started
    manifest.write(out_dir)
    logger.success(f"simulate wrote {count} rows to {path}")
    return manifest