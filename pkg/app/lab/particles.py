"""Lagrangian particle method for the damped attractive-repulsive system.

Particle i carries a fixed mass m_i and moves by
    eta_i' = v_i,   v_i' = -v_i - sum_j m_j dW(eta_i - eta_j),   dW(x) = -sgn(x) + x.
While the particles stay ordered the sign sum is (mass below) - (mass above),
so one force evaluation is O(n).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from app.core.errors import DegenerateSpacing, NonFiniteState, TooFewParticles, UnsortedPositions
from app.lab.closed_form import evaluate_grid
from app.lab.profiles import InitialData, steady_data

logger = logging.getLogger(__name__)

SCHEMES = ("RK4", "SemiImplicitEuler")


# ---------------------------
# State and configuration
# ---------------------------

@dataclass
class ParticleSystem:
    positions: np.ndarray
    velocities: np.ndarray
    masses: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        self.positions = np.asarray(self.positions, dtype=float).copy()
        self.velocities = np.asarray(self.velocities, dtype=float).copy()
        self.masses = np.asarray(self.masses, dtype=float).copy()
        n = self.positions.size
        if n < 2:
            raise TooFewParticles(f"need at least 2 particles, got {n}")
        if self.velocities.size != n or self.masses.size != n:
            raise ValueError("positions, velocities and masses must have equal lengths")
        if np.any(self.masses <= 0):
            raise ValueError("particle masses must be positive")
        self.masses.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.positions.size)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def momentum(self) -> float:
        return float(np.dot(self.masses, self.velocities))

    @property
    def gamma_cap(self) -> float:
        """(sum m eta + sum m v) / M, conserved by the dynamics."""
        return float(np.dot(self.masses, self.positions + self.velocities)) / self.total_mass


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_end: float = 10.0
    scheme: str = "RK4"
    crossing_tol: float = 0.0
    record_every: int = 100

    def __post_init__(self) -> None:
        if not (self.dt > 0 and self.t_end > 0):
            raise ValueError("dt and t_end must be positive")
        if self.dt > self.t_end:
            raise ValueError("dt must not exceed t_end")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.crossing_tol < 0:
            raise ValueError("crossing_tol must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")


@dataclass(frozen=True)
class Snapshot:
    t: float
    positions: np.ndarray
    velocities: np.ndarray


@dataclass(frozen=True)
class Observables:
    t: float
    momentum: float
    left: float
    right: float
    l1_to_limit: float
    min_spacing: float


@dataclass
class SimOutcome:
    status: str  # "Completed" or "Crossed"
    final: ParticleSystem
    t_cross: Optional[float] = None
    index: Optional[int] = None
    trajectory: List[Snapshot] = field(default_factory=list)
    observables: List[Observables] = field(default_factory=list)

    @property
    def crossed(self) -> bool:
        return self.status == "Crossed"


# ---------------------------
# Construction
# ---------------------------

def discretize(data: InitialData, n: int) -> ParticleSystem:
    """Uniform nodes on the closed domain; each particle owns its dual cell (half cells at the ends)."""
    if n < 2:
        raise TooFewParticles(f"need at least 2 particles, got {n}")
    a0, b0 = data.domain.a0, data.domain.b0
    nodes = a0 + (b0 - a0) * np.arange(n) / (n - 1)
    nodes[-1] = b0
    edges = np.concatenate(([a0], 0.5 * (nodes[:-1] + nodes[1:]), [b0]))
    widths = np.diff(edges)
    masses = np.asarray(data.rho(0.5 * (edges[:-1] + edges[1:]))) * widths
    masses *= data.m0 / masses.sum()
    return ParticleSystem(nodes, np.asarray(data.u(nodes), dtype=float), masses, 0.0)


def two_body(mass: float, separation: float, velocities: Tuple[float, float] = (0.0, 0.0), center: float = 0.0) -> ParticleSystem:
    if separation <= 0:
        raise ValueError("separation must be positive")
    half = 0.5 * separation
    return ParticleSystem([center - half, center + half], list(velocities), [mass, mass])


def steady_system(m0: float, center: float, n: int) -> ParticleSystem:
    """Discretisation of the stationary profile (height m0/2 on center -/+ 1, at rest)."""
    return discretize(steady_data(m0, center), n)


# ---------------------------
# Forces
# ---------------------------

def _sign_sums(masses: np.ndarray) -> np.ndarray:
    below = np.cumsum(masses) - masses
    above = masses.sum() - below - masses
    return below - above


def _accelerations(eta: np.ndarray, v: np.ndarray, masses: np.ndarray, signs: np.ndarray, total: float) -> np.ndarray:
    return -v + signs - total * eta + np.dot(masses, eta)


def total_force(system: ParticleSystem) -> np.ndarray:
    if np.any(np.diff(system.positions) < 0):
        raise UnsortedPositions("positions must be sorted ascending")
    return _accelerations(
        system.positions, system.velocities, system.masses, _sign_sums(system.masses), system.total_mass
    )


# ---------------------------
# Density reconstruction
# ---------------------------

def cell_masses(masses: np.ndarray) -> np.ndarray:
    """Mass of each of the n-1 cells: interior particles split evenly, end particles give all."""
    m = np.asarray(masses, dtype=float)
    cells = 0.5 * (m[:-1] + m[1:])
    cells[0] += 0.5 * m[0]
    cells[-1] += 0.5 * m[-1]
    return cells


def _cell_density(positions: np.ndarray, masses: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    spacing = np.diff(positions)
    if np.any(spacing <= 0):
        raise DegenerateSpacing("positions must be strictly increasing")
    return 0.5 * (positions[:-1] + positions[1:]), cell_masses(masses) / spacing


def reconstruct_density(system: ParticleSystem) -> List[Tuple[float, float]]:
    mids, dens = _cell_density(system.positions, system.masses)
    return list(zip(mids.tolist(), dens.tolist()))


def l1_to_limit(positions: np.ndarray, masses: np.ndarray, gamma_cap: float) -> float:
    """Exact L1 distance between the piecewise-constant reconstruction and the limit profile."""
    _, dens = _cell_density(positions, masses)
    height = 0.5 * float(masses.sum())
    lo, hi = gamma_cap - 1.0, gamma_cap + 1.0
    breaks = np.union1d(positions, [lo, hi])
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    idx = np.searchsorted(positions, mids, side="right") - 1
    inside = (idx >= 0) & (idx < dens.size)
    rec = np.where(inside, dens[np.clip(idx, 0, dens.size - 1)], 0.0)
    lim = np.where((mids > lo) & (mids < hi), height, 0.0)
    return float(np.sum(np.abs(rec - lim) * np.diff(breaks)))


# ---------------------------
# Time integration
# ---------------------------

def _rk4(eta, v, dt, masses, signs, total):
    k1x, k1v = v, _accelerations(eta, v, masses, signs, total)
    e2, v2 = eta + 0.5 * dt * k1x, v + 0.5 * dt * k1v
    k2x, k2v = v2, _accelerations(e2, v2, masses, signs, total)
    e3, v3 = eta + 0.5 * dt * k2x, v + 0.5 * dt * k2v
    k3x, k3v = v3, _accelerations(e3, v3, masses, signs, total)
    e4, v4 = eta + dt * k3x, v + dt * k3v
    k4x, k4v = v4, _accelerations(e4, v4, masses, signs, total)
    return (
        eta + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x),
        v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v),
    )


def _semi_implicit(eta, v, dt, masses, signs, total):
    # damping implicit, interaction explicit
    interaction = signs - total * eta + np.dot(masses, eta)
    v_next = (v + dt * interaction) / (1.0 + dt)
    return eta + dt * v_next, v_next


_STEPPERS = {"RK4": _rk4, "SemiImplicitEuler": _semi_implicit}


def _observe(t: float, eta: np.ndarray, v: np.ndarray, masses: np.ndarray, gamma_cap: float) -> Observables:
    spacing = np.diff(eta)
    min_spacing = float(spacing.min())
    l1 = l1_to_limit(eta, masses, gamma_cap) if min_spacing > 0 else float("nan")
    return Observables(
        t=t,
        momentum=float(np.dot(masses, v)),
        left=float(eta[0]),
        right=float(eta[-1]),
        l1_to_limit=l1,
        min_spacing=min_spacing,
    )


def run(system: ParticleSystem, config: SimConfig) -> SimOutcome:
    masses = system.masses
    total = system.total_mass
    signs = _sign_sums(masses)
    gamma_cap = system.gamma_cap
    step = _STEPPERS[config.scheme]

    eta = system.positions.copy()
    v = system.velocities.copy()
    t0 = system.time
    n_steps = int(math.ceil(config.t_end / config.dt - 1e-9))

    trajectory = [Snapshot(t0, eta.copy(), v.copy())]
    observables = [_observe(t0, eta, v, masses, gamma_cap)]
    t = t0

    for k in range(1, n_steps + 1):
        t_next = t0 + min(k * config.dt, config.t_end)
        h = t_next - t
        eta_next, v_next = step(eta, v, h, masses, signs, total)

        if not (np.all(np.isfinite(eta_next)) and np.all(np.isfinite(v_next))):
            raise NonFiniteState("particle state overflowed", last_finite_time=t)

        gaps_prev = np.diff(eta)
        gaps = np.diff(eta_next)
        hit = np.nonzero(gaps <= config.crossing_tol)[0]
        if hit.size:
            frac = (gaps_prev[hit] - config.crossing_tol) / (gaps_prev[hit] - gaps[hit])
            frac = np.clip(np.nan_to_num(frac, nan=1.0), 0.0, 1.0)
            j = int(np.argmin(frac))
            t_cross = t + float(frac[j]) * h
            index = int(hit[j])
            trajectory.append(Snapshot(t_next, eta_next.copy(), v_next.copy()))
            observables.append(_observe(t_next, eta_next, v_next, masses, gamma_cap))
            logger.info("particles crossed at t=%.6g between %d and %d", t_cross, index, index + 1)
            return SimOutcome(
                status="Crossed",
                final=ParticleSystem(eta_next, v_next, masses, t_next),
                t_cross=t_cross,
                index=index,
                trajectory=trajectory,
                observables=observables,
            )

        eta, v, t = eta_next, v_next, t_next
        if k % config.record_every == 0 or k == n_steps:
            trajectory.append(Snapshot(t, eta.copy(), v.copy()))
            observables.append(_observe(t, eta, v, masses, gamma_cap))

    logger.info("particle run completed at t=%.6g (n=%d, %s)", t, masses.size, config.scheme)
    return SimOutcome(
        status="Completed",
        final=ParticleSystem(eta, v, masses, t),
        trajectory=trajectory,
        observables=observables,
    )


# ---------------------------
# Diagnostics
# ---------------------------

def density_left_cell(snapshot: Snapshot, masses: np.ndarray) -> List[Optional[float]]:
    """Per particle, density of the cell to its left (None for the first particle or a collapsed cell)."""
    spacing = np.diff(snapshot.positions)
    cells = cell_masses(masses)
    out: List[Optional[float]] = [None]
    for mass, gap in zip(cells, spacing):
        out.append(float(mass / gap) if gap > 0 else None)
    return out


def lagrangian_velocity_error(outcome: SimOutcome, data: InitialData) -> List[Tuple[float, float]]:
    """Sup-norm gap between particle velocities and the closed form at the same labels, per snapshot."""
    if not outcome.trajectory:
        return []
    labels = np.clip(outcome.trajectory[0].positions, data.domain.a0, data.domain.b0)
    times = np.array([s.t for s in outcome.trajectory])
    exact = evaluate_grid(data, times, labels).v
    return [
        (float(s.t), float(np.max(np.abs(s.velocities - exact[k]))))
        for k, s in enumerate(outcome.trajectory)
    ]
