# -*- coding: utf-8 -*-
"""
@Desc    : Tests for the limit covariance, its components, sigma profile and closed forms
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate

from atlas.analytic import (
    CovarianceMatrix,
    bulk_cov,
    cov_ic,
    cov_limit,
    cov_limit_lattice,
    cov_limit_with_error,
    cov_mg,
    covariance_matrix,
    fbm_cov,
    harris_cov,
    heat_kernel,
    neumann_kernel,
    origin_cov,
    psi,
    raw_time_integral,
    sigma_profile,
)
from atlas.errors import PreconditionError
from models import FieldGrid, KernelConvention, LimitComponent


@pytest.mark.unit
class TestAnchors:
    def test_cov_limit_at_origin(self):
        assert cov_limit(1.0, 0.0, 1.0, 0.0, 1.0) == pytest.approx(3.191538, abs=1e-6)
        assert cov_limit(1.0, 0.0, 1.0, 0.0, 1.0) == pytest.approx(
            4.0 * math.sqrt(2.0 / math.pi), abs=1e-8
        )

    def test_initial_time_is_poisson_variance(self):
        assert cov_limit(0.0, 2.0, 0.0, 2.0, 1.5) == pytest.approx(6.0)
        assert cov_limit(0.0, 1.0, 0.0, 3.0, 1.0) == pytest.approx(2.0)

    def test_martingale_part_vanishes_at_time_zero(self):
        assert cov_mg(0.0, 1.0, 2.0, 1.0, 1.0) == 0.0

    def test_sigma_at_origin_and_far_away(self):
        assert sigma_profile(0.0, 1.0) == pytest.approx((2.0 / math.pi) ** 0.25, abs=1e-6)
        assert sigma_profile(0.0, 1.0) == pytest.approx(0.893244, abs=1e-6)
        assert sigma_profile(50.0, 1.0) == pytest.approx((2.0 * math.pi) ** -0.25, abs=1e-3)

    def test_closed_forms(self):
        assert origin_cov(1.0, 1.0, 1.0) == pytest.approx(math.sqrt(2.0 / math.pi), abs=1e-12)
        assert harris_cov(1.0, 1.0, 1.0) == pytest.approx(0.398942, abs=1e-6)
        assert origin_cov(2.0, 3.0, 1.0) / bulk_cov(2.0, 3.0, 1.0) == pytest.approx(2.0)

    def test_origin_cov_matches_cov_limit_increment(self):
        gamma = 1.0
        increment = (
            cov_limit(1.0, 0.0, 1.0, 0.0, gamma)
            - 2.0 * cov_limit(1.0, 0.0, 0.0, 0.0, gamma)
            + cov_limit(0.0, 0.0, 0.0, 0.0, gamma)
        ) / (2.0 * gamma) ** 2
        assert increment == pytest.approx(origin_cov(1.0, 1.0, gamma), abs=1e-8)

    def test_lattice_target(self):
        gamma = 2.0
        target = cov_limit_lattice(1.0, 0.0, 1.0, 0.0, gamma) / (2.0 * gamma) ** 2
        assert target == pytest.approx(1.0 / (gamma * math.sqrt(math.pi)), abs=1e-8)

    def test_harris_equals_bulk(self):
        for t, tp in ((1.0, 1.0), (2.0, 5.0), (0.5, 0.0)):
            assert harris_cov(t, tp, 1.5) == pytest.approx(bulk_cov(t, tp, 1.5), abs=1e-14)

    def test_poisson_initial_row(self):
        expected, _ = integrate.quad(lambda y: float(psi(1.0, y, 0.5)), 0.0, 1.0, points=[0.5])
        assert cov_limit(1.0, 0.5, 0.0, 1.0, 1.0) == pytest.approx(2.0 * expected, abs=1e-9)

    @pytest.mark.parametrize("a", [4.0, 0.25, 9.0])
    def test_scaling_invariance(self, a):
        base = cov_limit(1.0, 0.5, 2.0, 1.0, 1.0)
        scaled = cov_limit(a * 1.0, math.sqrt(a) * 0.5, a * 2.0, math.sqrt(a) * 1.0, 1.0)
        assert scaled == pytest.approx(math.sqrt(a) * base, rel=1e-8)

    def test_fbm_cov(self):
        assert fbm_cov(0.5, 2.0, 3.0) == pytest.approx(2.0)
        assert fbm_cov(0.25, 1.0, 1.0) == pytest.approx(1.0)


@pytest.mark.unit
class TestDecomposition:
    @pytest.mark.parametrize(
        "t, x, tp, xp",
        [(1.0, 0.0, 1.0, 0.0), (0.5, 1.2, 2.0, 0.3), (3.0, 2.0, 3.0, 2.0), (0.0, 1.0, 1.0, 0.5)],
    )
    def test_components_add_up(self, t, x, tp, xp):
        total = cov_ic(t, x, tp, xp, 1.0) + cov_mg(t, x, tp, xp, 1.0)
        assert cov_limit(t, x, tp, xp, 1.0) == pytest.approx(total, abs=1e-10)

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(17)
        times = rng.uniform(0.0, 3.0, size=(12, 2))
        points = rng.uniform(0.0, 3.0, size=(12, 2))
        for (t, tp), (x, xp) in zip(times, points):
            assert cov_limit(t, x, tp, xp, 1.0) == pytest.approx(
                cov_limit(tp, xp, t, x, 1.0), abs=1e-9
            )
            assert cov_ic(t, x, tp, xp, 1.0) == pytest.approx(cov_ic(tp, xp, t, x, 1.0), abs=1e-9)

    def test_linear_in_gamma_at_fixed_arguments(self):
        assert cov_limit(1.0, 0.5, 2.0, 1.0, 2.0) == pytest.approx(
            2.0 * cov_limit(1.0, 0.5, 2.0, 1.0, 1.0), rel=1e-9
        )

    def test_error_estimate_is_reported(self):
        value = cov_limit_with_error(1.0, 0.5, 2.0, 1.0, 1.0)
        assert 0.0 <= value.error < 1e-6

    @pytest.mark.slow
    @pytest.mark.parametrize("t, x, tp, xp", [(1.0, 0.5, 2.0, 1.0), (2.0, 1.0, 0.5, 0.25)])
    def test_raw_time_integral_matches_reduction(self, t, x, tp, xp):
        assert raw_time_integral(t, x, tp, xp, 1.0) == pytest.approx(
            cov_mg(t, x, tp, xp, 1.0), abs=1e-6
        )


@pytest.mark.unit
class TestKernels:
    def test_psi_step_limit(self):
        assert psi(0.0, 0.5, 1.0) == pytest.approx(1.0)
        assert psi(0.0, 2.0, 1.0) == pytest.approx(0.0)

    def test_psi_at_origin_point(self):
        assert psi(1.0, 0.0, 0.0) == pytest.approx(1.0)

    def test_psi_rejects_negative_time(self):
        with pytest.raises(PreconditionError):
            psi(-1.0, 0.0, 0.0)

    def test_kernel_conventions(self):
        t = 4.0
        shape = heat_kernel(t, 1.0, KernelConvention.SHAPE)
        density = heat_kernel(t, 1.0, KernelConvention.DENSITY)
        assert density == pytest.approx(shape / 2.0)
        assert density == pytest.approx(math.exp(-1.0 / 8.0) / math.sqrt(8.0 * math.pi))

    @pytest.mark.parametrize("t, y, x", [(0.5, 0.3, 0.8), (1.0, 1.7, 0.8), (2.0, 0.9, 0.0)])
    def test_psi_derivative_is_minus_neumann(self, t, y, x):
        h = 1e-5
        slope = (psi(t, y + h, x) - psi(t, y - h, x)) / (2.0 * h)
        density = neumann_kernel(t, y, x, KernelConvention.DENSITY)
        shape = neumann_kernel(t, y, x, KernelConvention.SHAPE)

        assert slope == pytest.approx(-density, abs=1e-6)
        assert slope == pytest.approx(-shape / math.sqrt(t), abs=1e-6)

    @pytest.mark.parametrize("a, b, x, xp", [(0.5, 1.0, 0.3, 1.1), (2.0, 0.25, 0.0, 0.7)])
    def test_halfline_product_of_neumann_kernels(self, a, b, x, xp):
        product, _ = integrate.quad(
            lambda y: float(neumann_kernel(a, y, x) * neumann_kernel(b, y, xp)),
            0.0,
            40.0,
            epsabs=1e-13,
            epsrel=1e-12,
            limit=200,
        )
        expected = heat_kernel(a + b, x - xp) + heat_kernel(a + b, x + xp)
        assert product == pytest.approx(expected, abs=1e-8)

    def test_neumann_kernel_symmetries(self):
        for y, x in ((0.4, 1.3), (2.0, 0.1)):
            assert neumann_kernel(1.5, y, x) == pytest.approx(neumann_kernel(1.5, -y, x), abs=1e-14)
            assert neumann_kernel(1.5, y, x) == pytest.approx(neumann_kernel(1.5, x, y), abs=1e-14)

    def test_negative_arguments_are_rejected(self):
        with pytest.raises(PreconditionError):
            cov_limit(-1.0, 0.0, 1.0, 0.0, 1.0)
        with pytest.raises(PreconditionError):
            cov_mg(1.0, 0.0, 1.0, -0.5, 1.0)


@pytest.mark.unit
class TestCovarianceMatrix:
    @pytest.fixture
    def grid(self) -> FieldGrid:
        return FieldGrid(times=[0.5, 1.0], points=[0.0, 1.0])

    def test_full_matrix_is_symmetric_and_psd(self, grid):
        cov = covariance_matrix(grid, 1.0)

        assert cov.entries.shape == (4, 4)
        np.testing.assert_array_equal(cov.entries, cov.entries.T)
        assert cov.is_psd()
        assert cov.entries[0, 0] == pytest.approx(cov_limit(0.5, 0.0, 0.5, 0.0, 1.0))

    def test_components_sum_to_full(self, grid):
        full = covariance_matrix(grid, 1.0, LimitComponent.FULL)
        ic = covariance_matrix(grid, 1.0, LimitComponent.INITIAL_W)
        mg = covariance_matrix(grid, 1.0, LimitComponent.MARTINGALE_M)
        np.testing.assert_allclose(ic.entries + mg.entries, full.entries, atol=1e-10)

    def test_rejects_asymmetric_entries(self, grid):
        entries = np.eye(4)
        entries[0, 1] = 0.5
        with pytest.raises(ValidationError):
            CovarianceMatrix(grid=grid, entries=entries, gamma=1.0)

    def test_rejects_wrong_shape(self, grid):
        with pytest.raises(ValidationError):
            CovarianceMatrix(grid=grid, entries=np.eye(3), gamma=1.0)
