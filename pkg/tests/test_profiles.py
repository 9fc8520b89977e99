"""Tests for initial data: normalisation, moments, cumulative mass."""
from __future__ import annotations

import math

import numpy as np
import pytest

from app.core.errors import DegenerateDomain, NonPositiveDensity, OutOfDomain
from app.lab.profiles import (
    Cosine,
    Interval,
    Linear,
    Tabulated,
    Uniform,
    Zero,
    build_initial_data,
    cosine_data,
    cumulative_mass,
    describe,
    normalize_mass,
    quadrature_mass,
    steady_data,
    v0_prime,
    with_mass,
)

DOMAIN = Interval(-0.75, 0.75)


# ---------------------------------------------------------------------------
# Domain and profile validation
# ---------------------------------------------------------------------------

class TestInterval:
    def test_degenerate_interval_rejected(self):
        with pytest.raises(DegenerateDomain):
            Interval(1.0, 1.0)
        with pytest.raises(DegenerateDomain):
            Interval(0.5, -0.5)

    def test_width_and_center(self):
        assert DOMAIN.width == pytest.approx(1.5)
        assert DOMAIN.center == pytest.approx(0.0)

    def test_degenerate_domain_is_a_value_error(self):
        with pytest.raises(ValueError):
            Interval(0.0, float("inf"))


class TestNormalizeMass:
    def test_cosine_normalisation_constant(self):
        rho = normalize_mass(Cosine(gamma_norm=1.0), 0.2, DOMAIN)
        assert rho.gamma_norm == pytest.approx(3.0 / (math.pi * 0.2))
        assert rho.gamma_norm == pytest.approx(4.7746483, rel=1e-7)

    def test_uniform_height(self):
        rho = normalize_mass(Uniform(height=3.0), 0.2, Interval(-1.0, 1.0))
        assert rho.height == pytest.approx(0.1)

    def test_idempotent(self):
        once = normalize_mass(Cosine(gamma_norm=1.0), 0.2, DOMAIN)
        twice = normalize_mass(once, 0.2, DOMAIN)
        assert twice.gamma_norm == pytest.approx(once.gamma_norm, rel=1e-15)

    def test_tabulated_scaled_to_target(self):
        grid = tuple(np.linspace(-0.75, 0.75, 41).tolist())
        values = tuple((1.0 + 0.5 * np.asarray(grid) ** 2).tolist())
        rho = normalize_mass(Tabulated(grid, values), 0.3, DOMAIN)
        data = build_initial_data(DOMAIN, rho, Zero())
        assert data.m0 == pytest.approx(0.3, rel=1e-12)

    def test_nonpositive_target_rejected(self):
        with pytest.raises(NonPositiveDensity):
            normalize_mass(Cosine(gamma_norm=1.0), 0.0, DOMAIN)


class TestBuildInitialData:
    def test_negative_uniform_rejected(self):
        with pytest.raises(NonPositiveDensity):
            build_initial_data(DOMAIN, Uniform(height=-1.0), Zero())

    def test_interior_zero_rejected(self):
        grid = (-0.75, 0.0, 0.75)
        with pytest.raises(NonPositiveDensity):
            build_initial_data(DOMAIN, Tabulated(grid, (1.0, 0.0, 1.0)), Zero())

    def test_tabulated_grid_must_span_domain(self):
        grid = (-0.5, 0.0, 0.75)
        with pytest.raises(DegenerateDomain):
            build_initial_data(DOMAIN, Tabulated(grid, (1.0, 1.0, 1.0)), Zero())

    def test_velocity_table_must_span_domain(self):
        rho = normalize_mass(Cosine(gamma_norm=1.0), 0.2, DOMAIN)
        short = Tabulated((-0.25, 0.0, 0.25), (0.0, 0.0, -1.0))
        with pytest.raises(DegenerateDomain):
            build_initial_data(DOMAIN, rho, short)

    def test_velocity_table_over_domain_accepted(self):
        table = Tabulated((-0.75, 0.0, 0.75), (0.75, 0.0, -0.75))
        data = build_initial_data(DOMAIN, Uniform(height=0.1), table)
        assert data.u(0.75) == pytest.approx(-0.75)

    def test_quadrature_panels_rounded_to_even(self):
        data = cosine_data(quadrature_n=101)
        assert data.quadrature_n == 102

    def test_too_few_panels_rejected(self):
        with pytest.raises(ValueError):
            cosine_data(quadrature_n=4)

    def test_cosine_boundary_zeros_detected(self):
        assert cosine_data().boundary_zeros == ("a0", "b0")
        assert steady_data().boundary_zeros == ()


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------

class TestMoments:
    def test_mass_matches_quadrature(self):
        data = cosine_data(m0=0.2, slope=-0.6)
        assert data.m0 == pytest.approx(0.2, rel=1e-12)
        assert quadrature_mass(data) == pytest.approx(0.2, rel=1e-10)

    def test_odd_velocity_has_zero_momentum(self):
        data = cosine_data(m0=0.2, slope=-0.6)
        assert data.m1 == pytest.approx(0.0, abs=1e-15)
        assert data.gamma_cap == pytest.approx(0.0, abs=1e-14)

    def test_intercept_carries_momentum(self):
        data = cosine_data(m0=0.2, slope=-0.6, intercept=0.3)
        assert data.m1 == pytest.approx(0.06, rel=1e-12)
        assert data.gamma_cap == pytest.approx(0.3, rel=1e-12)

    def test_steady_centre(self):
        data = steady_data(m0=0.2, center=0.4)
        assert data.first_moment == pytest.approx(0.08)
        assert data.gamma_cap == pytest.approx(0.4)

    def test_tabulated_mass_matches_quadrature(self):
        grid = tuple(np.linspace(-0.75, 0.75, 41).tolist())
        values = tuple((1.0 + 0.5 * np.asarray(grid) ** 2).tolist())
        data = build_initial_data(DOMAIN, Tabulated(grid, values), Linear(0.0, -1.0))
        assert quadrature_mass(data) == pytest.approx(data.m0, rel=1e-6)

    def test_tabulated_linear_velocity_has_exact_slope(self):
        grid = tuple(np.linspace(-0.75, 0.75, 11).tolist())
        values = tuple((0.2 - 0.5 * np.asarray(grid)).tolist())
        data = build_initial_data(DOMAIN, Uniform(height=0.1), Tabulated(grid, values))
        xs = np.linspace(-0.7, 0.7, 9)
        assert np.allclose(data.du(xs), -0.5, atol=1e-12)

    def test_with_mass_keeps_shapes(self):
        data = cosine_data(m0=0.2, slope=-1.0)
        heavier = with_mass(data, 0.5)
        assert heavier.m0 == pytest.approx(0.5, rel=1e-12)
        assert heavier.u0 == data.u0
        assert heavier.domain == data.domain

    def test_describe_is_plain(self):
        summary = describe(cosine_data())
        assert summary["a0"] == -0.75
        assert summary["boundary_zeros"] == ["a0", "b0"]


# ---------------------------------------------------------------------------
# Cumulative mass and initial acceleration
# ---------------------------------------------------------------------------

class TestCumulativeMass:
    def test_cosine_half_mass_at_centre(self):
        data = cosine_data(m0=0.2)
        assert cumulative_mass(data, 0.0) == pytest.approx(0.1, rel=1e-12)

    def test_symmetry(self):
        data = cosine_data(m0=0.2)
        total = cumulative_mass(data, 0.375) + cumulative_mass(data, -0.375)
        assert total == pytest.approx(0.2, rel=1e-12)

    def test_endpoints(self):
        data = cosine_data(m0=0.2)
        assert cumulative_mass(data, -0.75) == pytest.approx(0.0, abs=1e-15)
        assert cumulative_mass(data, 0.75) == pytest.approx(0.2, rel=1e-12)

    def test_steady_is_linear(self):
        data = steady_data(m0=0.2)
        assert cumulative_mass(data, 0.0) == pytest.approx(0.1, abs=1e-15)
        assert cumulative_mass(data, 0.5) == pytest.approx(0.15, abs=1e-15)

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            cumulative_mass(cosine_data(), 2.0)

    def test_tabulated_monotone(self):
        grid = tuple(np.linspace(-0.75, 0.75, 21).tolist())
        values = tuple((1.0 + np.cos(np.asarray(grid))).tolist())
        data = build_initial_data(DOMAIN, Tabulated(grid, values), Zero())
        f = np.asarray(cumulative_mass(data, np.linspace(-0.75, 0.75, 201)))
        assert np.all(np.diff(f) > 0)
        assert f[-1] == pytest.approx(data.m0, rel=1e-12)


class TestV0Prime:
    def test_steady_is_at_rest(self):
        data = steady_data(m0=0.2)
        xs = np.linspace(-1.0, 1.0, 101)
        assert np.allclose(v0_prime(data, xs), 0.0, atol=1e-12)

    def test_compressive_cosine_at_boundary(self):
        data = cosine_data(m0=0.2, slope=-1.0)
        # -u0(b0) - (b0 + 1) M0 + 0 + 2 M0
        assert v0_prime(data, 0.75) == pytest.approx(0.75 - 1.75 * 0.2 + 0.4, rel=1e-12)
        assert v0_prime(data, 0.75) == pytest.approx(0.8, rel=1e-12)

    def test_compressive_cosine_at_centre(self):
        data = cosine_data(m0=0.2, slope=-1.0)
        assert v0_prime(data, 0.0) == pytest.approx(0.0, abs=1e-15)
