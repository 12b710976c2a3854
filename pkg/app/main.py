# -*- coding: utf-8 -*-
"""
@Desc    : atlas-lab command line: simulate | covariance | sample-limit | verify | report
"""
import functools
import json
from pathlib import Path

import click
from loguru import logger

from atlas import __version__
from atlas.checks import Tier
from atlas.commands import (
    RunConfig,
    cmd_covariance,
    cmd_report,
    cmd_sample_limit,
    cmd_simulate,
    cmd_verify,
    parse_config_file,
    resolve_config,
)
from atlas.errors import AtlasLabError
from models import InitialCondition, LimitComponent, ModelKind, TopPolicy
from settings import settings


class AtlasLabCommandError(click.ClickException):
    exit_code = 2


def _choices(enum) -> click.Choice:
    return click.Choice([member.value for member in enum], case_sensitive=False)


# every flag defaults to None so that only flags actually given override the config file
RUN_OPTIONS = [
    click.option("--model", type=_choices(ModelKind), default=None, help="atlas or harris."),
    click.option("--gamma", type=float, default=None, help="Drift strength, density 2*gamma. [1.0]"),
    click.option("--epsilon", type=float, default=None, help="Scaling parameter in (0, 1]. [1/64]"),
    click.option("--delta", type=float, default=None, help="Smoothing time of the smoothed field. [0]"),
    click.option("--dt", type=float, default=None, help="Euler-Maruyama step. [0.01]"),
    click.option("--t-end", type=float, default=None, help="Unscaled horizon. [64]"),
    click.option("--replicas", type=int, default=None, help="Independent replicas. [100]"),
    click.option("--particles", type=int, default=None, help="Truncation size N. [auto]"),
    click.option("--grid-times", default=None, help="Comma-separated scaled times. [1]"),
    click.option("--grid-points", default=None, help="Comma-separated scaled points. [0,1]"),
    click.option("--seed", type=int, default=None, help="64-bit master seed. [0]"),
    click.option(
        "--threads", type=int, default=None, help="Worker threads. [ATLAS_LAB_THREADS or CPU count]"
    ),
    click.option("--out-dir", type=click.Path(path_type=Path), default=None, help="Output directory."),
    click.option("--initial", type=_choices(InitialCondition), default=None, help="Initial law."),
    click.option("--top-policy", type=_choices(TopPolicy), default=None, help="Truncation policy."),
    click.option("--component", type=_choices(LimitComponent), default=None, help="Limit component."),
    click.option("--draws", type=int, default=None, help="Exact draws for sample-limit. [1000]"),
    click.option("--hurst", type=float, default=None, help="Sample H-fBm at the grid times instead."),
    click.option(
        "--config",
        "config_path",
        type=click.Path(path_type=Path),
        default=None,
        help="Flat key = value file, or a manifest.json to replay.",
    ),
]


def run_options(func):
    for option in reversed(RUN_OPTIONS):
        func = option(func)
    return func


def build_config(config_path: Path | None, **flags) -> RunConfig:
    file_values = parse_config_file(config_path) if config_path else {}
    config = resolve_config(file_values, flags)
    logger.debug(f"Resolved configuration: {json.dumps(config.model_dump(mode='json'), indent=2)}")
    return config


def handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except AtlasLabError as err:
            logger.error(f"{type(err).__name__}: {err}")
            raise AtlasLabCommandError(str(err)) from err

    return wrapper


@click.group()
@click.version_option(__version__, prog_name="atlas-lab")
def cli():
    """Simulator and analytic-verification toolkit for the Atlas model at critical density."""


@cli.command()
@run_options
@handle_errors
def simulate(config_path, **flags):
    """Run replicas and write observable time series to simulate.csv."""
    manifest = cmd_simulate(build_config(config_path, **flags))
    click.echo(manifest.outputs[0])


@cli.command()
@run_options
@handle_errors
def covariance(config_path, **flags):
    """Evaluate cov_limit, cov_ic, cov_mg and sigma on the grid."""
    manifest = cmd_covariance(build_config(config_path, **flags))
    click.echo(manifest.outputs[0])


@cli.command("sample-limit")
@run_options
@handle_errors
def sample_limit(config_path, **flags):
    """Exact Gaussian draws of the limit field (or of H-fBm with --hurst)."""
    manifest = cmd_sample_limit(build_config(config_path, **flags))
    click.echo(manifest.outputs[0])


@cli.command()
@run_options
@click.option("--tier", type=_choices(Tier), default=None, help="fast or full. [fast]")
@click.option("--only", multiple=True, help="Run only this check id (repeatable).")
@click.option("--perturb-targets", type=float, default=None, hidden=True)
@handle_errors
def verify(config_path, only, **flags):
    """Run the acceptance checks; exit 0 iff all of them pass."""
    result = cmd_verify(build_config(config_path, **flags), only)
    click.echo(result.summary, nl=False)
    if not result.passed:
        raise click.exceptions.Exit(1)


@cli.command()
@click.option(
    "--out-dir",
    type=click.Path(path_type=Path, file_okay=False),
    default=None,
    help="Directory holding manifest.json. [ATLAS_LAB_OUT_DIR]",
)
@handle_errors
def report(out_dir):
    """Render the manifest and verify report of a run directory."""
    click.echo(cmd_report(out_dir or settings.ATLAS_LAB_OUT_DIR), nl=False)


if __name__ == "__main__":
    cli()
