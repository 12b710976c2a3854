# -*- coding: utf-8 -*-
"""
@Desc    : Scaled fluctuation fields and diagnostics computed from simulated states.

Scaled time t corresponds to unscaled time t/epsilon, scaled space x to x/sqrt(epsilon).
All observables carry the density 2*gamma explicitly.
"""
import math
from typing import Callable, Dict, List, Sequence

import numpy as np

from atlas.analytic import gauss_tail_integral, psi
from atlas.dynamics import ParticleState, Trajectory
from atlas.errors import PreconditionError, TruncationError
from atlas.stats import loglog_slope
from models import FieldGrid, FieldKind, FieldSample, ScalingSpec


def field_index(x: float, epsilon: float, gamma: float) -> int:
    """i^eps(x) = floor(2 gamma x / sqrt(eps)), the expected number of particles left of x/sqrt(eps)."""
    return int(math.floor(2.0 * gamma * x / math.sqrt(epsilon)))


def _ranked_at(state: ParticleState, index: int) -> float:
    if index >= state.n:
        raise TruncationError(
            f"rank index {index} is not below N={state.n}; increase the number of particles"
        )
    return float(state.ranked[index])


def scaled_value(state: ParticleState, epsilon: float, gamma: float, x: float) -> float:
    index = field_index(x, epsilon, gamma)
    return epsilon**0.25 * (index - 2.0 * gamma * _ranked_at(state, index))


def scaled_field(
    trajectory: Trajectory, scaling: ScalingSpec, grid: FieldGrid, gamma: float
) -> FieldSample:
    values = np.empty(grid.shape)
    for a, t in enumerate(grid.times):
        state = trajectory.at(scaling.unscaled_time(t))
        for b, x in enumerate(grid.points):
            values[a, b] = scaled_value(state, scaling.epsilon, gamma, x)
    return FieldSample(grid=grid, values=values, kind=FieldKind.SCALED_X)


def counting(state: ParticleState, epsilon: float, x: float) -> int:
    """I(x) = #{i : X_(i) <= x / sqrt(eps)}"""
    # compared in unscaled units, the same units right_gap subtracts in
    return int(np.searchsorted(state.ranked, x / math.sqrt(epsilon), side="right"))


def centered_count(state: ParticleState, epsilon: float, gamma: float, x: float) -> float:
    return epsilon**0.25 * (counting(state, epsilon, x) - 2.0 * gamma * x / math.sqrt(epsilon))


def pair_fluctuation(
    state: ParticleState,
    epsilon: float,
    gamma: float,
    phi: Callable[[np.ndarray], np.ndarray],
    phi_halfline_integral: float,
) -> float:
    """<Q_t, phi> = eps^{1/4} (sum_i phi(sqrt(eps) X_i) - 2 gamma eps^{-1/2} int_0^inf phi)"""
    total = float(np.sum(phi(math.sqrt(epsilon) * state.positions)))
    return epsilon**0.25 * (total - 2.0 * gamma * phi_halfline_integral / math.sqrt(epsilon))


def psi_halfline_integral(delta: float, x: float) -> float:
    """int_0^inf Psi_delta(y, x) dy, which tends to x as delta -> 0."""
    if delta == 0:
        return float(x)
    s = math.sqrt(delta)
    return s * (gauss_tail_integral(x / s) + gauss_tail_integral(-x / s))


def smoothed_field(state: ParticleState, scaling: ScalingSpec, gamma: float, x: float) -> float:
    if scaling.delta <= 0:
        raise PreconditionError("the smoothed field needs delta > 0")
    delta = scaling.delta
    return pair_fluctuation(
        state,
        scaling.epsilon,
        gamma,
        lambda y: psi(delta, y, x),
        psi_halfline_integral(delta, x),
    )


def tagged_value(
    state0: ParticleState, state: ParticleState, epsilon: float, gamma: float, x: float
) -> float:
    index = counting(state0, epsilon, x)
    return epsilon**0.25 * (index - 2.0 * gamma * _ranked_at(state, index))


def tagged_field(
    trajectory: Trajectory, scaling: ScalingSpec, gamma: float, grid: FieldGrid
) -> FieldSample:
    """Displacement field of the ranks frozen at time 0."""
    state0 = trajectory.initial
    values = np.empty(grid.shape)
    for a, t in enumerate(grid.times):
        state = trajectory.at(scaling.unscaled_time(t))
        for b, x in enumerate(grid.points):
            values[a, b] = tagged_value(state0, state, scaling.epsilon, gamma, x)
    return FieldSample(grid=grid, values=values, kind=FieldKind.TAGGED_Z)


def right_gap(state: ParticleState, epsilon: float, x: float) -> float:
    """Distance from eps^{-1/2} x to the first particle strictly to its right (unscaled)."""
    position = x / math.sqrt(epsilon)
    if position < state.lowest:
        raise PreconditionError(f"x={x} lies left of the lowest particle")
    index = counting(state, epsilon, x)
    return _ranked_at(state, index) - position


def d_statistic(state: ParticleState, j: int, j_prime: int, gamma: float = 1.0) -> float:
    """sign(j - j') * sum over i in [min, max) of (1 - 2 gamma Y_i)"""
    if not (0 <= j < state.n and 0 <= j_prime < state.n):
        raise PreconditionError(f"rank indices ({j}, {j_prime}) outside [0, {state.n})")
    if j == j_prime:
        return 0.0
    lo, hi = min(j, j_prime), max(j, j_prime)
    total = float(np.sum(1.0 - 2.0 * gamma * state.gaps[lo:hi]))
    return total if j > j_prime else -total


def bridge_residual(
    state0: ParticleState, state: ParticleState, epsilon: float, gamma: float, x: float
) -> float:
    """G_t(x) - Z_t(x) - eps^{1/4} (D(I_t, I_0) + 2 gamma rho_t(x)); zero up to rounding."""
    i_t = counting(state, epsilon, x)
    i_0 = counting(state0, epsilon, x)
    # rho without the right_gap precondition: the identity also holds left of X_(0)
    rho = _ranked_at(state, i_t) - x / math.sqrt(epsilon)
    lhs = centered_count(state, epsilon, gamma, x) - tagged_value(state0, state, epsilon, gamma, x)
    rhs = epsilon**0.25 * (d_statistic(state, i_t, i_0, gamma) + 2.0 * gamma * rho)
    return lhs - rhs


def dyadic_times(t_max: float, t_min: float = 1.0) -> List[float]:
    times = []
    t = t_min
    while t <= t_max * (1 + 1e-12):
        times.append(t)
        t *= 2.0
    return times


def fit_origin_exponent(profile: Dict[float, float]) -> float:
    """Slope of log sup|X_(0)| against log t."""
    return loglog_slope(sorted(profile.items()))


def spread_exponent(times: Sequence[float], samples: np.ndarray) -> float:
    """
    Slope of log std against log t, half the growth exponent of the variance.

    Column k of `samples` holds one value per replica at times[k].
    """
    spread = np.std(np.asarray(samples, dtype=np.float64), axis=0, ddof=1)
    return loglog_slope(zip(times, spread))


def origin_sup_profile(trajectories: Sequence[Trajectory], T: float) -> Dict[float, float]:
    """Replica mean of sup_{s<=t} |X_(0)(s)| at dyadic t <= T."""
    return {
        t: float(np.mean([trajectory.at(t).origin_sup for trajectory in trajectories]))
        for t in dyadic_times(T)
    }


def origin_scaling_exponent(trajectories: Sequence[Trajectory], T: float) -> float:
    return fit_origin_exponent(origin_sup_profile(trajectories, T))


def origin_spread_exponent(
    trajectories: Sequence[Trajectory], T: float, t_min: float = 16.0
) -> float:
    """spread_exponent of X_(0) over the dyadic window [t_min, T]."""
    times = dyadic_times(T, t_min)
    samples = [[trajectory.at(t).lowest for t in times] for trajectory in trajectories]
    return spread_exponent(times, np.array(samples))
