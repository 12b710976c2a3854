# -*- coding: utf-8 -*-
"""
@Desc    : Closed-form and quadrature quantities of the limiting Gaussian field.

Covariance integrals always use the normalized heat-kernel density; the literal shape kernel
p(x t^{-1/2}) is available through KernelConvention.SHAPE for formula-level checks.
"""
import math
import warnings
from typing import Callable, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import integrate
from scipy.special import ndtr

from atlas.errors import PreconditionError, QuadratureError
from models import FieldGrid, KernelConvention, LimitComponent, QuadratureSpec

SQRT_2PI = math.sqrt(2.0 * math.pi)
DEFAULT_QUADRATURE = QuadratureSpec()


def std_pdf(z):
    return np.exp(-0.5 * np.square(z)) / SQRT_2PI


def gauss_tail_integral(a: float) -> float:
    """G(a) = int_a^inf (1 - Phi(u)) du = phi(a) - a (1 - Phi(a))"""
    return float(std_pdf(a) - a * ndtr(-a))


def psi(t: float, y, x: float):
    """Psi_t(y, x) = 2 - Phi_t(y - x) - Phi_t(y + x); t = 0 is the step-function limit."""
    if t < 0:
        raise PreconditionError(f"psi needs t >= 0, got {t}")
    if t == 0:
        return 2.0 - np.heaviside(np.subtract(y, x), 0.5) - np.heaviside(np.add(y, x), 0.5)
    s = math.sqrt(t)
    return ndtr(-(np.subtract(y, x)) / s) + ndtr(-(np.add(y, x)) / s)


def heat_kernel(t: float, z, convention: KernelConvention = KernelConvention.DENSITY):
    if t <= 0:
        raise PreconditionError(f"heat kernel needs t > 0, got {t}")
    shape = std_pdf(np.asarray(z) / math.sqrt(t))
    if convention == KernelConvention.SHAPE:
        return shape
    return shape / math.sqrt(t)


def neumann_kernel(
    t: float, y, x: float, convention: KernelConvention = KernelConvention.DENSITY
):
    """p_t(y - x) + p_t(y + x)"""
    return heat_kernel(t, np.subtract(y, x), convention) + heat_kernel(
        t, np.add(y, x), convention
    )


class CovarianceValue(BaseModel):
    value: float
    error: float


def _quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    quad: QuadratureSpec,
    points=None,
) -> Tuple[float, float]:
    if b <= a:
        return 0.0, 0.0
    inner = [p for p in (points or ()) if a < p < b]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, error = integrate.quad(
            func,
            a,
            b,
            epsabs=quad.epsabs,
            epsrel=quad.epsrel,
            limit=quad.limit,
            points=inner or None,
        )

    for item in caught:
        message = str(item.message)
        if "subdivisions" in message:
            raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {message}")
        # roundoff notices at tight tolerances keep the estimate, the error column reports it
        logger.debug(f"quadrature on [{a}, {b}]: {message.strip()}")
    return float(value), float(error)


def _check_point(t: float, x: float):
    if t < 0 or x < 0:
        raise PreconditionError(f"covariance needs t, x >= 0, got t={t}, x={x}")


def _psi_overlap(
    t: float, x: float, t_prime: float, x_prime: float, quad: QuadratureSpec
) -> CovarianceValue:
    """int_0^inf Psi_t(y, x) Psi_t'(y, x') dy"""
    if t == 0 and t_prime == 0:
        return CovarianceValue(value=min(x, x_prime), error=0.0)

    # Psi_0(., x) is the indicator of [0, x)
    if t_prime == 0:
        value, error = _quad(lambda y: float(psi(t, y, x)), 0.0, x_prime, quad, points=[x])
        return CovarianceValue(value=value, error=error)
    if t == 0:
        return _psi_overlap(t_prime, x_prime, t, x, quad)

    longest = max(t, t_prime)
    farthest = max(x, x_prime)
    y_max = farthest + quad.c_tail * math.sqrt(max(longest, 1.0))
    value, error = _quad(
        lambda y: float(psi(t, y, x) * psi(t_prime, y, x_prime)),
        0.0,
        y_max,
        quad,
        points=[x, x_prime],
    )
    # Psi_t <= 2, and beyond the farthest point Psi_T(y, x) <= 2 (1 - Phi((y - x)/sqrt(T)))
    s = math.sqrt(longest)
    tail = 4.0 * s * gauss_tail_integral((y_max - farthest) / s)
    return CovarianceValue(value=value, error=error + tail)


def _gauss_factor(a: float, v: float) -> float:
    if v == 0:
        return 1.0 if a == 0 else 0.0
    return math.exp(-0.5 * (a / v) ** 2)


def _neumann_time_integral(
    t: float, x: float, t_prime: float, x_prime: float, quad: QuadratureSpec
) -> CovarianceValue:
    """
    int_0^{t^t'} int_0^inf pN_{t-s}(y,x) pN_{t'-s}(y,x') dy ds
      = 1/2 int_{|t-t'|}^{t+t'} [phi_u(x-x') + phi_u(x+x')] du
      = (2 pi)^{-1/2} int_{sqrt|t-t'|}^{sqrt(t+t')} [e^{-(x-x')^2/2v^2} + e^{-(x+x')^2/2v^2}] dv
    """
    if min(t, t_prime) == 0:
        return CovarianceValue(value=0.0, error=0.0)
    a, b = x - x_prime, x + x_prime
    lo, hi = math.sqrt(abs(t - t_prime)), math.sqrt(t + t_prime)
    value, error = _quad(lambda v: _gauss_factor(a, v) + _gauss_factor(b, v), lo, hi, quad)
    return CovarianceValue(value=value / SQRT_2PI, error=error / SQRT_2PI)


def cov_ic_with_error(
    t: float,
    x: float,
    t_prime: float,
    x_prime: float,
    gamma: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> CovarianceValue:
    _check_point(t, x)
    _check_point(t_prime, x_prime)
    part = _psi_overlap(t, x, t_prime, x_prime, quad)
    return CovarianceValue(value=2.0 * gamma * part.value, error=2.0 * gamma * part.error)


def cov_mg_with_error(
    t: float,
    x: float,
    t_prime: float,
    x_prime: float,
    gamma: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> CovarianceValue:
    _check_point(t, x)
    _check_point(t_prime, x_prime)
    part = _neumann_time_integral(t, x, t_prime, x_prime, quad)
    return CovarianceValue(value=2.0 * gamma * part.value, error=2.0 * gamma * part.error)


def cov_limit_with_error(
    t: float,
    x: float,
    t_prime: float,
    x_prime: float,
    gamma: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> CovarianceValue:
    ic = cov_ic_with_error(t, x, t_prime, x_prime, gamma, quad)
    mg = cov_mg_with_error(t, x, t_prime, x_prime, gamma, quad)
    return CovarianceValue(value=ic.value + mg.value, error=ic.error + mg.error)


def cov_ic(t, x, t_prime, x_prime, gamma, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    return cov_ic_with_error(t, x, t_prime, x_prime, gamma, quad).value


def cov_mg(t, x, t_prime, x_prime, gamma, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    return cov_mg_with_error(t, x, t_prime, x_prime, gamma, quad).value


def cov_limit(t, x, t_prime, x_prime, gamma, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    return cov_limit_with_error(t, x, t_prime, x_prime, gamma, quad).value


def cov_limit_lattice(
    t, x, t_prime, x_prime, gamma, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Limit covariance for the equi-distant start, whose initial field vanishes."""
    return cov_mg(t, x, t_prime, x_prime, gamma, quad)


def component_cov(component: LimitComponent) -> Callable[..., CovarianceValue]:
    return {
        LimitComponent.FULL: cov_limit_with_error,
        LimitComponent.INITIAL_W: cov_ic_with_error,
        LimitComponent.MARTINGALE_M: cov_mg_with_error,
    }[LimitComponent(component)]


def raw_time_integral(
    t: float,
    x: float,
    t_prime: float,
    x_prime: float,
    gamma: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    convention: KernelConvention = KernelConvention.DENSITY,
) -> float:
    """2 gamma times the time term of the covariance, by direct nested quadrature."""
    _check_point(t, x)
    _check_point(t_prime, x_prime)
    upper = min(t, t_prime)
    if upper == 0:
        return 0.0
    y_max = max(x, x_prime) + quad.c_tail * math.sqrt(max(t, t_prime, 1.0))

    def inner(s: float) -> float:
        if s >= upper:
            s = math.nextafter(upper, 0.0)
        value, _ = _quad(
            lambda y: float(
                neumann_kernel(t - s, y, x, convention)
                * neumann_kernel(t_prime - s, y, x_prime, convention)
            ),
            0.0,
            y_max,
            quad,
            points=[x, x_prime],
        )
        return value

    value, _ = _quad(inner, 0.0, upper, quad)
    return 2.0 * gamma * value


def origin_cov(t: float, t_prime: float, gamma: float) -> float:
    """Covariance of (2 gamma)^{-1} (X_t(0) - X_0(0))."""
    return (math.sqrt(t) + math.sqrt(t_prime) - math.sqrt(abs(t - t_prime))) / (gamma * SQRT_2PI)


def bulk_cov(t: float, t_prime: float, gamma: float) -> float:
    return (math.sqrt(t) + math.sqrt(t_prime) - math.sqrt(abs(t - t_prime))) / (
        gamma * math.sqrt(8.0 * math.pi)
    )


def harris_cov(t: float, t_prime: float, gamma: float) -> float:
    """Tagged Harris particle: (2 pi)^{-1/2} gamma^{-1} times the H=1/4 fBm covariance."""
    return fbm_cov(0.25, t, t_prime) / (gamma * SQRT_2PI)


def fbm_cov(H: float, t: float, t_prime: float) -> float:
    two_h = 2.0 * H
    return 0.5 * (t**two_h + t_prime**two_h - abs(t - t_prime) ** two_h)


def sigma_profile(x: float, gamma: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Long-time standard deviation of t^{-1/4} (X_(i(x))(t) - X_(i(x))(0))."""
    variance = (
        cov_limit(1.0, x, 1.0, x, gamma, quad)
        - 2.0 * cov_limit(1.0, x, 0.0, x, gamma, quad)
        + cov_limit(0.0, x, 0.0, x, gamma, quad)
    ) / (2.0 * gamma) ** 2
    if variance < -1e-10:
        raise QuadratureError(f"negative variance {variance} at x={x}")
    return math.sqrt(max(variance, 0.0))


class CovarianceMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grid: FieldGrid
    entries: np.ndarray
    gamma: float
    component: LimitComponent = LimitComponent.FULL
    max_error: float = 0.0

    @model_validator(mode="after")
    def _square_and_symmetric(self) -> "CovarianceMatrix":
        n = self.grid.size
        if self.entries.shape != (n, n):
            raise ValueError(f"entries shape {self.entries.shape} does not match grid size {n}")
        if not np.allclose(self.entries, self.entries.T, rtol=0.0, atol=1e-12):
            raise ValueError("covariance entries must be symmetric")
        return self

    @property
    def n(self) -> int:
        return self.grid.size

    def is_psd(self, jitter_fraction: float = 1e-10) -> bool:
        trace = float(np.trace(self.entries))
        floor = -jitter_fraction * trace / max(self.n, 1)
        return bool(np.linalg.eigvalsh(self.entries).min() >= floor)


def covariance_matrix(
    grid: FieldGrid,
    gamma: float,
    component: LimitComponent = LimitComponent.FULL,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> CovarianceMatrix:
    cov = component_cov(component)
    cells = grid.cells()
    n = len(cells)
    entries = np.zeros((n, n))
    max_error = 0.0
    for i in range(n):
        for j in range(i, n):
            (t, x), (tp, xp) = cells[i], cells[j]
            item = cov(t, x, tp, xp, gamma, quad)
            entries[i, j] = entries[j, i] = item.value
            max_error = max(max_error, item.error)
    return CovarianceMatrix(
        grid=grid, entries=entries, gamma=gamma, component=component, max_error=max_error
    )
