# -*- coding: utf-8 -*-
"""
@Desc    : Run configuration, its resolution order, the run manifest and output-directory setup
"""
import math
from pathlib import Path
from typing import Any, Dict, List

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from atlas import __version__
from atlas.checks.base import CheckOutcome, Tier
from atlas.dynamics import SensitivityReport, SnappedTime, default_particles
from atlas.errors import ConfigError
from models import InitialCondition, LimitComponent, ModelKind, ModelSpec, TopPolicy, check_axis
from settings import LOG_DIR_NAME, settings
from utils import init_log, read_json, write_json

MANIFEST_NAME = "manifest.json"


class RunConfig(BaseModel):
    """Every knob of a command run. Keys double as config-file keys and CLI flags."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    model: ModelKind = ModelKind.ATLAS
    gamma: float = Field(default=1.0, gt=0)
    epsilon: float = Field(default=1.0 / 64.0, gt=0, le=1)
    delta: float = Field(default=0.0, ge=0)
    dt: float = Field(default=0.01, gt=0)
    t_end: float = Field(default=64.0, ge=0, description="Unscaled horizon of simulated runs")
    replicas: int = Field(default=100, ge=1)
    particles: int | None = Field(default=None, ge=2, description="None selects N automatically")
    grid_times: List[float] = Field(default_factory=lambda: [1.0], description="Scaled times")
    grid_points: List[float] = Field(default_factory=lambda: [0.0, 1.0], description="Scaled points")
    seed: int = Field(default=0, ge=0, lt=2**64)
    threads: int | None = Field(default=None, ge=1)
    out_dir: Path = Field(default_factory=lambda: settings.ATLAS_LAB_OUT_DIR)
    initial: InitialCondition = InitialCondition.EQUILIBRIUM
    top_policy: TopPolicy = TopPolicy.FREE
    component: LimitComponent = LimitComponent.FULL
    draws: int = Field(default=1000, ge=1)
    hurst: float | None = Field(default=None, gt=0, lt=1, description="Sample fBm instead of the field")
    tier: Tier = Tier.FAST
    perturb_targets: float = Field(default=1.0, gt=0)

    @field_validator("grid_times", "grid_points", mode="before")
    @classmethod
    def _split_list(cls, v: Any) -> Any:
        if isinstance(v, str):
            return [float(item) for item in v.replace(";", ",").split(",") if item.strip()]
        return v

    @field_validator("grid_times", "grid_points")
    @classmethod
    def _valid_axis(cls, v: List[float]) -> List[float]:
        return check_axis(v)

    @field_validator("gamma", "epsilon", "delta", "dt", "t_end")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v

    @property
    def threads_resolved(self) -> int:
        return self.threads or settings.ATLAS_LAB_THREADS


def normalise_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def parse_config_file(path: Path) -> Dict[str, Any]:
    """
    Flat `key = value` text, `#` starts a comment, keys may use '-' or '_'.

    A manifest JSON is accepted too: its resolved configuration is replayed.
    """
    if not path.is_file():
        raise ConfigError("config", f"file {path} does not exist")

    if path.suffix.lower() == ".json":
        payload = read_json(path)
        values = payload.get("config", payload)
        return _known({normalise_key(k): v for k, v in values.items()})

    values: Dict[str, Any] = {}
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"line {number} of {path} is not of the form key = value")
        key, value = line.split("=", 1)
        values[normalise_key(key)] = value.strip()
    return _known(values)


def _known(values: Dict[str, Any]) -> Dict[str, Any]:
    for key in values:
        if key not in RunConfig.model_fields:
            raise ConfigError(key)
    return values


def resolve_config(
    file_values: Dict[str, Any] | None = None, cli_values: Dict[str, Any] | None = None
) -> RunConfig:
    """Built-in defaults < config file < CLI flags that were actually given."""
    merged = dict(file_values or {})
    merged.update({normalise_key(k): v for k, v in (cli_values or {}).items() if v is not None})
    _known(merged)
    try:
        return RunConfig(**merged)
    except ValidationError as err:
        first = err.errors()[0]
        key = str(first["loc"][0]) if first["loc"] else "config"
        raise ConfigError(key, first["msg"]) from err


def model_spec(config: RunConfig, x_max: float = 0.0) -> tuple[ModelSpec, List[str]]:
    """ModelSpec of a run; N is auto-selected from the largest unscaled point when not given."""
    notes = []
    n_particles = config.particles
    if n_particles is None:
        n_particles = default_particles(config.gamma, x_max, config.t_end)
        if config.model == ModelKind.HARRIS:
            n_particles *= 2
        note = f"particles auto-selected: N={n_particles} (x_max={x_max:g}, t_end={config.t_end:g})"
        logger.info(note)
        notes.append(note)

    spec = ModelSpec.create(
        gamma=config.gamma,
        kind=config.model,
        n_particles=n_particles,
        dt=config.dt,
        t_end=config.t_end,
        top_policy=config.top_policy,
        seed=config.seed,
    )
    return spec, notes


def snapping_notes(snapped: List[SnappedTime]) -> List[str]:
    return [
        f"observation time {s.requested:g} snapped to {s.snapped:g} (step {s.step_index})"
        for s in snapped
        if s.distance > 1e-9 * max(1.0, abs(s.requested))
    ]


class RunManifest(BaseModel):
    tool: str = "atlas-lab"
    tool_version: str = __version__
    command: str
    master_seed: int
    config: Dict[str, Any]
    replicas: int
    wall_clock_seconds: float = 0.0
    notes: List[str] = Field(default_factory=list)
    outputs: List[str] = Field(default_factory=list)
    sensitivity: SensitivityReport | None = None
    checks: List[CheckOutcome] = Field(default_factory=list)

    @classmethod
    def start(cls, command: str, config: RunConfig, replicas: int | None = None) -> "RunManifest":
        resolved = config.model_dump(mode="json")
        resolved["threads"] = config.threads_resolved
        return cls(
            command=command,
            master_seed=config.seed,
            config=resolved,
            replicas=config.replicas if replicas is None else replicas,
        )

    def write(self, out_dir: Path) -> Path:
        path = out_dir.joinpath(MANIFEST_NAME)
        write_json(path, self.model_dump(mode="json"))
        return path


def prepare_out_dir(config: RunConfig) -> Path:
    out_dir = config.out_dir.expanduser().absolute()
    out_dir.mkdir(parents=True, exist_ok=True)
    log_dir = out_dir.joinpath(LOG_DIR_NAME)
    init_log(
        level=settings.LOG_LEVEL,
        runtime=log_dir.joinpath("runtime.log"),
        error=log_dir.joinpath("error.log"),
        serialize=log_dir.joinpath("serialize.log"),
    )
    return out_dir
