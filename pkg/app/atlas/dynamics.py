# -*- coding: utf-8 -*-
"""
@Desc    : Atlas and Harris particle systems: initial laws, Euler-Maruyama stepping and runs
"""
import math
from typing import Any, Callable, Dict, List, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from atlas.errors import PreconditionError, StepBudgetError
from atlas.stats import EstimatorAccumulator
from atlas.task_manager import run_batches_sync, split_batches
from models import InitialCondition, ModelKind, ModelSpec, TopPolicy
from settings import settings

_STEP_STREAM = 0
_INIT_STREAM = 1


def default_particles(gamma: float, x_max: float, t_end: float) -> int:
    """Truncation size covering the diffusive influence region of the largest space point."""
    return int(math.ceil(2.0 * gamma * (x_max + 10.0 * math.sqrt(max(t_end, 0.0))))) + 200


class ReplicaRng:
    """
    Counter-based Gaussian stream of one replica.

    The Philox key comes from (master seed, replica) and the counter carries the block index,
    so the increment of a given (step, particle) never depends on batching or thread scheduling.
    """

    def __init__(self, master_seed: int, replica: int, block_steps: int | None = None):
        self.master_seed = int(master_seed)
        self.replica = int(replica)
        self.block_steps = int(block_steps or settings.ATLAS_LAB_RNG_BLOCK_STEPS)
        self._key = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.replica,)
        ).generate_state(2, dtype=np.uint64)
        self._block_index = -1
        self._block: np.ndarray | None = None

    def _generator(self, block: int, stream: int) -> np.random.Generator:
        counter = np.array([0, block, stream, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(counter=counter, key=self._key))

    def initial_generator(self) -> np.random.Generator:
        return self._generator(0, _INIT_STREAM)

    def block(self, block_index: int, n_particles: int) -> np.ndarray:
        """Standard normals for steps [block_index*B, (block_index+1)*B), one row per step."""
        if (
            block_index != self._block_index
            or self._block is None
            or self._block.shape[1] != n_particles
        ):
            generator = self._generator(block_index, _STEP_STREAM)
            self._block = generator.standard_normal((self.block_steps, n_particles))
            self._block_index = block_index
        return self._block

    def normals(self, step_index: int, n_particles: int) -> np.ndarray:
        block = self.block(step_index // self.block_steps, n_particles)
        return block[step_index % self.block_steps]


class ParticleState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    time: float = 0.0
    step_index: int = 0
    positions: np.ndarray
    """Positions indexed by particle identity"""

    rank_of: np.ndarray
    """rank_of[i] is the identity of the i-th lowest particle"""

    origin_sup: float = 0.0
    """sup over s <= time of |X_(0)(s)|"""

    kind: ModelKind = ModelKind.ATLAS

    @property
    def n(self) -> int:
        return int(self.positions.shape[0])

    @property
    def ranked(self) -> np.ndarray:
        return self.positions[self.rank_of]

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.ranked)

    @property
    def lowest(self) -> float:
        return float(self.positions[self.rank_of[0]])

    def rank_is_consistent(self) -> bool:
        return bool(np.array_equal(self.rank_of, stable_rank(self.positions)))


class SnappedTime(BaseModel):
    requested: float
    snapped: float
    step_index: int

    @property
    def distance(self) -> float:
        return abs(self.snapped - self.requested)


class RunReport(BaseModel):
    replica: int
    snapped: List[SnappedTime]


class SensitivityReport(BaseModel):
    n_particles: int
    n_particles_doubled: int
    replicas: int
    mean: float
    mean_doubled: float
    variance: float
    variance_doubled: float
    mean_halfwidth: float
    variance_halfwidth: float
    passed: bool


class EnsembleResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: ModelSpec
    initial: InitialCondition
    replicas: List[int]
    snapped: List[SnappedTime]
    steps: List[int] = Field(description="Distinct observed step indices, increasing")
    payloads: Dict[int, List[Any]] = Field(description="replica -> one payload per observed step")
    sensitivity: SensitivityReport | None = None

    def column(self, t: float) -> List[Any]:
        """Payloads of every replica at the observation snapped from time t, in replica order."""
        index = self.steps.index(_nearest_step(self.spec, t))
        return [self.payloads[r][index] for r in self.replicas]


class Trajectory(BaseModel):
    """States of one replica at its observation times."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: ModelSpec
    replica: int
    states: Dict[int, ParticleState]

    def at(self, t: float) -> ParticleState:
        step_index = _nearest_step(self.spec, t)
        if step_index not in self.states:
            raise PreconditionError(f"time {t} was not observed on replica {self.replica}")
        return self.states[step_index]

    @property
    def initial(self) -> ParticleState:
        return self.at(0.0)


def stable_rank(positions: np.ndarray) -> np.ndarray:
    """Rank permutation with ties broken by the smaller identity."""
    return np.argsort(positions, kind="stable")


def positions_from_gaps(gaps: np.ndarray, origin: float = 0.0) -> np.ndarray:
    return np.concatenate([[origin], origin + np.cumsum(gaps)])


def state_from_ranked(
    ranked: np.ndarray, kind: ModelKind = ModelKind.ATLAS, time: float = 0.0
) -> ParticleState:
    """Build a state whose identities are assigned in rank order."""
    ranked = np.asarray(ranked, dtype=np.float64)
    rank_of = np.arange(ranked.shape[0], dtype=np.int64)
    return ParticleState(
        time=time,
        positions=ranked.copy(),
        rank_of=rank_of,
        origin_sup=abs(float(ranked[0])),
        kind=kind,
    )


def init_equilibrium(spec: ModelSpec, rng: ReplicaRng) -> ParticleState:
    """Poisson(2 gamma) start: X_(0)=0 and i.i.d. Exp(2 gamma) gaps, two-sided for Harris."""
    generator = rng.initial_generator()
    n = spec.n_particles
    scale = spec.mean_gap

    if spec.kind == ModelKind.HARRIS:
        n_left = n // 2
        left = generator.exponential(scale, size=n_left)
        right = generator.exponential(scale, size=n - 1 - n_left)
        ranked = np.concatenate([-np.cumsum(left)[::-1], [0.0], np.cumsum(right)])
    else:
        ranked = positions_from_gaps(generator.exponential(scale, size=n - 1))

    return state_from_ranked(ranked, spec.kind)


def init_lattice(spec: ModelSpec) -> ParticleState:
    """Equi-distant start with spacing 1/(2 gamma); Harris is centred on its particle at 0."""
    index = np.arange(spec.n_particles, dtype=np.float64)
    if spec.kind == ModelKind.HARRIS:
        index -= spec.n_particles // 2
    return state_from_ranked(index * spec.mean_gap, spec.kind)


def _rerank(positions: np.ndarray, rank_of: np.ndarray) -> np.ndarray:
    """Re-sort starting from the previous order; exact ties fall back to a full stable sort."""
    ranked = np.take_along_axis(positions, rank_of, axis=1)
    order = np.argsort(ranked, axis=1, kind="stable")
    new_rank = np.take_along_axis(rank_of, order, axis=1)

    sorted_values = np.take_along_axis(ranked, order, axis=1)
    tied = np.any(np.diff(sorted_values, axis=1) == 0.0, axis=1)
    for row in np.flatnonzero(tied):
        new_rank[row] = stable_rank(positions[row])
    return new_rank


def _advance(
    positions: np.ndarray, rank_of: np.ndarray, increments: np.ndarray, drift: float
) -> tuple[np.ndarray, np.ndarray]:
    # drift goes to the step-start minimum
    new_positions = positions + increments
    if drift:
        rows = np.arange(positions.shape[0])
        new_positions[rows, rank_of[:, 0]] += drift
    return new_positions, _rerank(new_positions, rank_of)


def _drift(spec: ModelSpec) -> float:
    return spec.gamma * spec.dt if spec.kind == ModelKind.ATLAS else 0.0


def advance(state: ParticleState, spec: ModelSpec, increments: np.ndarray) -> ParticleState:
    """One step with caller-supplied Gaussian increments (already scaled by sqrt(dt))."""
    positions, rank_of = _advance(
        state.positions[None, :], state.rank_of[None, :], increments[None, :], _drift(spec)
    )
    lowest = abs(float(positions[0, rank_of[0, 0]]))
    return ParticleState(
        time=(state.step_index + 1) * spec.dt,
        step_index=state.step_index + 1,
        positions=positions[0],
        rank_of=rank_of[0],
        origin_sup=max(state.origin_sup, lowest),
        kind=state.kind,
    )


def step(state: ParticleState, spec: ModelSpec, rng: ReplicaRng) -> ParticleState:
    increments = rng.normals(state.step_index, state.n) * math.sqrt(spec.dt)
    return advance(state, spec, increments)


def tagged_rank_origin(state0: ParticleState) -> int:
    """Rank k0 of the Harris particle started at 0: the number of particles left of it."""
    if state0.kind != ModelKind.HARRIS:
        raise PreconditionError("the tagged rank origin is defined for the Harris model only")
    if not np.any(state0.positions == 0.0):
        raise PreconditionError("no particle sits at the origin at time 0")
    return int(np.count_nonzero(state0.positions < 0.0))


def rescale_state(state: ParticleState, gamma: float) -> ParticleState:
    """Map a gamma=1 state to drift gamma: X(t) -> X(gamma^2 t)/gamma."""
    return ParticleState(
        time=state.time / gamma**2,
        step_index=state.step_index,
        positions=state.positions / gamma,
        rank_of=state.rank_of.copy(),
        origin_sup=state.origin_sup / gamma,
        kind=state.kind,
    )


def _nearest_step(spec: ModelSpec, t: float) -> int:
    return int(round(t / spec.dt))


def check_step_budget(spec: ModelSpec, max_steps: int | None = None):
    max_steps = max_steps or settings.ATLAS_LAB_MAX_STEPS
    if spec.n_steps > max_steps:
        raise StepBudgetError(
            f"t_end/dt = {spec.n_steps} steps exceeds the step budget of {max_steps}"
        )


def snap_times(spec: ModelSpec, observation_times: Sequence[float]) -> List[SnappedTime]:
    snapped = []
    previous = -math.inf
    for t in observation_times:
        t = float(t)
        if t < previous:
            raise PreconditionError("observation times must be sorted")
        if t < 0 or t > spec.t_end + 0.5 * spec.dt:
            raise PreconditionError(f"observation time {t} is outside [0, {spec.t_end}]")
        step_index = min(_nearest_step(spec, t), spec.n_steps)
        item = SnappedTime(requested=t, snapped=step_index * spec.dt, step_index=step_index)
        if item.distance > 1e-9 * max(1.0, abs(t)):
            logger.warning(f"Observation time {t} snapped to {item.snapped} (step {step_index})")
        snapped.append(item)
        previous = t
    return snapped


def _initial_state(spec: ModelSpec, rng: ReplicaRng, initial: InitialCondition) -> ParticleState:
    if initial == InitialCondition.LATTICE:
        return init_lattice(spec)
    return init_equilibrium(spec, rng)


def _simulate_batch(
    spec: ModelSpec,
    replicas: List[int],
    steps: List[int],
    observe: Callable[[int, ParticleState], Any],
    initial: InitialCondition,
) -> Dict[int, List[Any]]:
    rngs = [ReplicaRng(spec.seed, r) for r in replicas]
    starts = [_initial_state(spec, rng, initial) for rng in rngs]
    positions = np.stack([s.positions for s in starts])
    rank_of = np.stack([s.rank_of for s in starts])
    rows = np.arange(len(replicas))
    sup = np.abs(positions[rows, rank_of[:, 0]])

    payloads: Dict[int, List[Any]] = {r: [] for r in replicas}

    def emit(step_index: int):
        for i, replica in enumerate(replicas):
            state = ParticleState(
                time=step_index * spec.dt,
                step_index=step_index,
                positions=positions[i].copy(),
                rank_of=rank_of[i].copy(),
                origin_sup=float(sup[i]),
                kind=spec.kind,
            )
            payloads[replica].append(observe(replica, state))

    pending = list(steps)
    if pending and pending[0] == 0:
        emit(0)
        pending.pop(0)

    n = spec.n_particles
    block_steps = rngs[0].block_steps
    drift = _drift(spec)
    sqrt_dt = math.sqrt(spec.dt)
    last = steps[-1] if steps else 0
    increments = None

    for step_index in range(last):
        if step_index % block_steps == 0 or increments is None:
            increments = np.stack([rng.block(step_index // block_steps, n) for rng in rngs])
        positions, rank_of = _advance(
            positions, rank_of, increments[:, step_index % block_steps, :] * sqrt_dt, drift
        )
        np.maximum(sup, np.abs(positions[rows, rank_of[:, 0]]), out=sup)

        if pending and pending[0] == step_index + 1:
            emit(step_index + 1)
            pending.pop(0)

    return payloads


def run(
    spec: ModelSpec,
    observation_times: Sequence[float],
    observer: Callable[[ParticleState], Any],
    replica: int = 0,
    initial: InitialCondition = InitialCondition.EQUILIBRIUM,
) -> RunReport:
    """Advance one replica and hand the state to `observer` at every observation time."""
    check_step_budget(spec)
    snapped = snap_times(spec, observation_times)
    steps = sorted({s.step_index for s in snapped})
    _simulate_batch(spec, [replica], steps, lambda _, state: observer(state), initial)
    return RunReport(replica=replica, snapped=snapped)


def run_ensemble(
    spec: ModelSpec,
    observation_times: Sequence[float],
    observe: Callable[[int, ParticleState], Any],
    replicas: int | Sequence[int],
    threads: int | None = None,
    initial: InitialCondition = InitialCondition.EQUILIBRIUM,
) -> EnsembleResult:
    """
    Run many replicas in vectorised batches.

    `observe(replica, state)` is called from worker threads and must not touch shared state;
    its return values are collected per replica in observation order.
    """
    check_step_budget(spec)
    replica_ids = list(range(replicas)) if isinstance(replicas, int) else list(replicas)
    snapped = snap_times(spec, observation_times)
    steps = sorted({s.step_index for s in snapped})
    threads = threads or settings.ATLAS_LAB_THREADS

    batches = split_batches(replica_ids, settings.ATLAS_LAB_BATCH_SIZE)
    results = run_batches_sync(
        lambda batch: _simulate_batch(spec, batch, steps, observe, initial),
        batches,
        threads,
        label=f"{spec.kind}",
    )

    payloads: Dict[int, List[Any]] = {}
    for result in results:
        payloads.update(result)

    sensitivity = None
    if spec.top_policy == TopPolicy.SENSITIVITY_CHECKED:
        sensitivity = truncation_sensitivity(spec, replica_ids, threads, initial)

    return EnsembleResult(
        spec=spec,
        initial=initial,
        replicas=replica_ids,
        snapped=snapped,
        steps=steps,
        payloads=payloads,
        sensitivity=sensitivity,
    )


def record_trajectories(
    spec: ModelSpec,
    observation_times: Sequence[float],
    replicas: int | Sequence[int],
    threads: int | None = None,
    initial: InitialCondition = InitialCondition.EQUILIBRIUM,
) -> List[Trajectory]:
    """Keep full states at the observation times (time 0 is always included)."""
    times = sorted({0.0, *map(float, observation_times)})
    result = run_ensemble(
        spec, times, lambda _, state: state, replicas, threads=threads, initial=initial
    )
    return [
        Trajectory(
            spec=spec,
            replica=r,
            states={s.step_index: s for s in result.payloads[r]},
        )
        for r in result.replicas
    ]


def truncation_sensitivity(
    spec: ModelSpec,
    replicas: Sequence[int],
    threads: int | None = None,
    initial: InitialCondition = InitialCondition.EQUILIBRIUM,
) -> SensitivityReport:
    """Compare X_(0)(t_end) statistics at N and 2N particles."""
    if len(replicas) < 2:
        raise PreconditionError("the truncation check needs at least two replicas")

    def lowest(_, state: ParticleState) -> float:
        return state.lowest

    accumulators = []
    sizes = [spec.n_particles, 2 * spec.n_particles]
    for n in sizes:
        variant = spec.model_copy(update={"n_particles": n, "top_policy": TopPolicy.FREE})
        result = run_ensemble(variant, [spec.t_end], lowest, replicas, threads, initial)
        values = np.array([p[0] for p in (result.payloads[r] for r in result.replicas)])
        accumulators.append(EstimatorAccumulator.from_samples(values[:, None]))

    a, b = accumulators
    count = a.count
    var_a, var_b = float(a.covariance[0, 0]), float(b.covariance[0, 0])
    z = 1.959963984540054
    mean_halfwidth = z * math.sqrt((var_a + var_b) / count)
    variance_halfwidth = z * math.sqrt(2.0 / (count - 1)) * math.sqrt(var_a**2 + var_b**2)
    passed = abs(a.mean[0] - b.mean[0]) <= mean_halfwidth and abs(var_a - var_b) <= variance_halfwidth

    report = SensitivityReport(
        n_particles=sizes[0],
        n_particles_doubled=sizes[1],
        replicas=count,
        mean=float(a.mean[0]),
        mean_doubled=float(b.mean[0]),
        variance=var_a,
        variance_doubled=var_b,
        mean_halfwidth=mean_halfwidth,
        variance_halfwidth=variance_halfwidth,
        passed=passed,
    )
    if passed:
        logger.info(f"Truncation at N={sizes[0]} is insensitive to doubling")
    else:
        logger.warning(f"Truncation at N={sizes[0]} changes X_(0)(t_end) statistics: {report}")
    return report
