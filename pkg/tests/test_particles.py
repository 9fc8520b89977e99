"""Tests for the Lagrangian particle method."""
from __future__ import annotations

import math

import numpy as np
import pytest

from app.core.errors import DegenerateSpacing, TooFewParticles, UnsortedPositions
from app.lab.asymptotics import fit_rate
from app.lab.particles import (
    ParticleSystem,
    SimConfig,
    Snapshot,
    density_left_cell,
    discretize,
    l1_to_limit,
    lagrangian_velocity_error,
    reconstruct_density,
    run,
    steady_system,
    total_force,
    two_body,
)
from app.lab.profiles import Interval, Uniform, Zero, build_initial_data, cosine_data, steady_data

FIRST_ZERO_C1 = math.log(0.5 * (3.0 + math.sqrt(5.0))) / math.sqrt(0.2)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

class TestDiscretize:
    def test_uniform_nodes(self):
        system = discretize(cosine_data(), 4)
        assert np.allclose(system.positions, [-0.75, -0.25, 0.25, 0.75], atol=1e-15)

    def test_two_particle_steady(self):
        system = discretize(steady_data(m0=0.2), 2)
        assert np.allclose(system.positions, [-1.0, 1.0])
        assert np.allclose(system.masses, [0.1, 0.1], atol=1e-15)

    def test_total_mass_preserved(self):
        system = discretize(cosine_data(m0=0.2), 800)
        assert system.total_mass == pytest.approx(0.2, rel=1e-14)
        assert np.all(system.masses > 0)

    def test_velocities_sampled(self):
        system = discretize(cosine_data(slope=-0.6, intercept=0.3), 5)
        assert np.allclose(system.velocities, 0.3 - 0.6 * system.positions)

    def test_too_few(self):
        with pytest.raises(TooFewParticles):
            discretize(cosine_data(), 1)

    def test_masses_are_read_only(self):
        system = two_body(0.1, 1.0)
        with pytest.raises(ValueError):
            system.masses[0] = 1.0

    def test_steady_system_centre(self):
        system = steady_system(0.2, 0.4, 11)
        assert system.positions[0] == pytest.approx(-0.6)
        assert system.gamma_cap == pytest.approx(0.4, abs=1e-14)


# ---------------------------------------------------------------------------
# Forces
# ---------------------------------------------------------------------------

class TestTotalForce:
    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
    def test_two_body_force(self, s):
        acc = total_force(two_body(0.1, s))
        # attraction m s pulls in, repulsion m pushes out
        assert acc[1] == pytest.approx(0.1 * (1.0 - s), abs=1e-15)
        assert acc[0] == pytest.approx(-acc[1], abs=1e-15)

    def test_unsorted_rejected(self):
        system = ParticleSystem([0.5, -0.5], [0.0, 0.0], [0.1, 0.1])
        with pytest.raises(UnsortedPositions):
            total_force(system)

    def test_momentum_law(self):
        data = cosine_data(m0=0.2, slope=-0.6, intercept=0.3)
        system = discretize(data, 50)
        acc = total_force(system)
        assert np.dot(system.masses, acc) == pytest.approx(-system.momentum, abs=1e-15)

    @pytest.mark.parametrize("n", [100, 200, 400])
    def test_steady_discretisation_is_nearly_at_rest(self, n):
        acc = total_force(steady_system(0.2, 0.0, n))
        # only the half cells at the ends feel a residual force, of size M0 / (2 (n - 1))
        assert np.max(np.abs(acc[1:-1])) < 1e-12
        assert abs(acc[0]) == pytest.approx(0.1 / (n - 1), rel=1e-6)
        assert acc[-1] == pytest.approx(-acc[0], rel=1e-9)


# ---------------------------------------------------------------------------
# Density reconstruction
# ---------------------------------------------------------------------------

class TestReconstruction:
    def test_uniform_profile_is_flat(self):
        domain = Interval(-1.0, 1.0)
        data = build_initial_data(domain, Uniform(0.1), Zero())
        pairs = reconstruct_density(discretize(data, 101))
        assert len(pairs) == 100
        assert np.allclose([d for _, d in pairs], 0.1, atol=1e-12)

    def test_two_particles_carry_half_the_mass(self):
        pairs = reconstruct_density(discretize(steady_data(m0=0.2), 2))
        assert len(pairs) == 1
        mid, density = pairs[0]
        assert mid == pytest.approx(0.0, abs=1e-15)
        assert density == pytest.approx(0.1, abs=1e-15)

    def test_degenerate_spacing(self):
        system = ParticleSystem([0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [0.1, 0.1, 0.1])
        with pytest.raises(DegenerateSpacing):
            reconstruct_density(system)

    def test_steady_matches_limit(self):
        system = steady_system(0.2, 0.0, 101)
        assert l1_to_limit(system.positions, system.masses, system.gamma_cap) == pytest.approx(0.0, abs=1e-12)

    def test_shifted_limit_distance(self):
        system = steady_system(0.2, 0.0, 101)
        # shifting the target by 0.5 leaves two slabs of width 0.5 uncovered
        assert l1_to_limit(system.positions, system.masses, 0.5) == pytest.approx(0.1, abs=1e-12)

    def test_left_cell_density(self):
        snap = Snapshot(0.0, np.array([0.0, 0.5, 1.0]), np.zeros(3))
        masses = np.array([0.1, 0.2, 0.1])
        out = density_left_cell(snap, masses)
        assert out[0] is None
        assert out[1] == pytest.approx(0.4)
        assert out[2] == pytest.approx(0.4)


# ---------------------------------------------------------------------------
# Time integration
# ---------------------------------------------------------------------------

class TestSimConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            SimConfig(dt=0.0)
        with pytest.raises(ValueError):
            SimConfig(scheme="Euler")
        with pytest.raises(ValueError):
            SimConfig(dt=1.0, t_end=0.5)


class TestTwoBody:
    def test_equilibrium_does_not_drift(self):
        outcome = run(two_body(0.1, 1.0), SimConfig(dt=1e-3, t_end=10.0))
        assert outcome.status == "Completed"
        assert np.allclose(outcome.final.positions, [-0.5, 0.5], atol=1e-9)
        assert outcome.final.time == pytest.approx(10.0)

    def test_relaxes_to_unit_separation(self):
        outcome = run(two_body(0.5, 1.5), SimConfig(dt=1e-3, t_end=30.0))
        sep = outcome.final.positions[1] - outcome.final.positions[0]
        assert sep == pytest.approx(1.0, abs=1e-6)

    def test_velocities_decay(self):
        outcome = run(two_body(0.5, 1.5), SimConfig(dt=1e-3, t_end=40.0))
        assert np.max(np.abs(outcome.final.velocities)) < 1e-8

    def test_semi_implicit_scheme_relaxes(self):
        outcome = run(two_body(0.5, 1.5), SimConfig(dt=1e-3, t_end=30.0, scheme="SemiImplicitEuler"))
        sep = outcome.final.positions[1] - outcome.final.positions[0]
        assert sep == pytest.approx(1.0, abs=1e-4)

    def test_head_on_collision_crosses(self):
        outcome = run(two_body(0.1, 1.0, velocities=(5.0, -5.0)), SimConfig(dt=1e-3, t_end=5.0))
        assert outcome.crossed
        assert outcome.index == 0
        assert 0.0 < outcome.t_cross < 1.0

    def test_recording_cadence(self):
        outcome = run(two_body(0.1, 1.0), SimConfig(dt=1e-3, t_end=1.0, record_every=100))
        assert len(outcome.trajectory) == 11
        assert outcome.trajectory[0].t == 0.0
        assert outcome.observables[-1].t == pytest.approx(1.0)


class TestContinuumAgreement:
    def test_momentum_decays_exponentially(self):
        data = cosine_data(m0=0.2, slope=-0.6, intercept=0.3)
        system = discretize(data, 200)
        p0 = system.momentum
        outcome = run(system, SimConfig(dt=1e-3, t_end=10.0, record_every=500))
        for obs in outcome.observables:
            assert obs.momentum == pytest.approx(p0 * math.exp(-obs.t), abs=1e-6)

    def test_centre_of_mass_plus_momentum_is_conserved(self):
        data = cosine_data(m0=0.2, slope=-0.6, intercept=0.3)
        system = discretize(data, 100)
        outcome = run(system, SimConfig(dt=1e-3, t_end=5.0))
        assert outcome.final.gamma_cap == pytest.approx(system.gamma_cap, abs=1e-10)

    @pytest.mark.slow
    def test_velocity_matches_closed_form(self):
        data = cosine_data(m0=0.2, slope=-0.6)
        outcome = run(discretize(data, 800), SimConfig(dt=1e-3, t_end=10.0, record_every=1000))
        errors = lagrangian_velocity_error(outcome, data)
        assert max(err for _, err in errors) <= 1e-2

    @pytest.mark.slow
    def test_compressive_data_crosses_near_continuum_time(self):
        outcome = run(discretize(cosine_data(m0=0.2, slope=-1.0), 800), SimConfig(dt=1e-3, t_end=3.0))
        assert outcome.crossed
        assert 2.10 <= outcome.t_cross <= 2.25
        assert outcome.index in (0, 798)

    @pytest.mark.slow
    def test_crossing_time_converges_in_n(self):
        data = cosine_data(m0=0.2, slope=-1.0)
        coarse = run(discretize(data, 200), SimConfig(dt=1e-3, t_end=3.0))
        fine = run(discretize(data, 1600), SimConfig(dt=1e-3, t_end=3.0))
        assert abs(fine.t_cross - FIRST_ZERO_C1) < abs(coarse.t_cross - FIRST_ZERO_C1)

    @pytest.mark.slow
    def test_mild_data_settles_on_steady_state(self):
        data = cosine_data(m0=0.2, slope=-0.6)
        outcome = run(discretize(data, 800), SimConfig(dt=1e-3, t_end=30.0, record_every=1000))
        assert outcome.status == "Completed"
        final = outcome.final
        assert final.positions[0] == pytest.approx(-1.0, abs=0.02)
        assert final.positions[-1] == pytest.approx(1.0, abs=0.02)
        interior = [d for x, d in reconstruct_density(final) if -0.8 < x < 0.8]
        assert np.all(np.abs(np.asarray(interior) - 0.1) <= 0.005)
        assert outcome.observables[-1].l1_to_limit < 0.01

    @pytest.mark.slow
    def test_endpoint_relaxes_at_the_slow_rate(self):
        # ordered particles obey the same damped linear law, so the outermost one
        # settles like e^{-lambda t}; increments avoid needing its discrete limit
        data = cosine_data(m0=0.2, slope=-0.6)
        outcome = run(discretize(data, 800), SimConfig(dt=1e-3, t_end=30.0, record_every=500))
        assert outcome.status == "Completed"
        t = np.array([o.t for o in outcome.observables])
        right = np.array([o.right for o in outcome.observables])
        left = np.array([o.left for o in outcome.observables])
        for edge in (right, left):
            report = fit_rate(t[:-1], np.abs(np.diff(edge)), window=(10.0, 28.0), m0=data.m0)
            assert report.lambda_fit == pytest.approx(report.lambda_theory, rel=0.05)
