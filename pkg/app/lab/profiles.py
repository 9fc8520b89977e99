"""Initial data (rho0, u0) on a bounded interval, with moments and cumulative mass.

Closed-form profiles (cosine, uniform, linear velocity) integrate exactly;
tabulated profiles go through a PCHIP interpolant so that the density never
changes sign between nodes and the velocity slope is available pointwise.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import PchipInterpolator

from app.core.errors import DegenerateDomain, NonPositiveDensity, OutOfDomain

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

MIN_QUADRATURE_N = 16
DEFAULT_QUADRATURE_N = 2048

# Relative slack when testing x against the closed interval.
_DOMAIN_SLACK = 1e-12


# ---------------------------
# Domain types
# ---------------------------

@dataclass(frozen=True)
class Interval:
    a0: float
    b0: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a0) and math.isfinite(self.b0)):
            raise DegenerateDomain(f"interval endpoints must be finite, got ({self.a0}, {self.b0})")
        if self.a0 >= self.b0:
            raise DegenerateDomain(f"need a0 < b0, got ({self.a0}, {self.b0})")

    @property
    def width(self) -> float:
        return self.b0 - self.a0

    @property
    def center(self) -> float:
        return 0.5 * (self.a0 + self.b0)

    def grid(self, panels: int) -> np.ndarray:
        return np.linspace(self.a0, self.b0, panels + 1)


@dataclass(frozen=True)
class Cosine:
    """rho0(x) = cos(pi (x - center) / width) / gamma_norm."""
    gamma_norm: float


@dataclass(frozen=True)
class Uniform:
    height: float


@dataclass(frozen=True)
class Tabulated:
    grid: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or g.size < 2 or g.size != len(self.values):
            raise ValueError("tabulated grid and values must be 1-D of equal length >= 2")
        if np.any(np.diff(g) <= 0):
            raise ValueError("tabulated grid must be strictly increasing")


@dataclass(frozen=True)
class Linear:
    intercept: float
    slope: float


@dataclass(frozen=True)
class Zero:
    pass


DensityProfile = Union[Cosine, Uniform, Tabulated]
VelocityProfile = Union[Linear, Zero, Tabulated]


@lru_cache(maxsize=64)
def _pchip(table: Tabulated) -> PchipInterpolator:
    return PchipInterpolator(np.asarray(table.grid), np.asarray(table.values), extrapolate=True)


# ---------------------------
# Pointwise evaluation
# ---------------------------

def density_value(rho: DensityProfile, domain: Interval, x: ArrayLike) -> ArrayLike:
    if isinstance(rho, Cosine):
        return np.cos(math.pi * (np.asarray(x) - domain.center) / domain.width) / rho.gamma_norm
    if isinstance(rho, Uniform):
        return np.full_like(np.asarray(x, dtype=float), rho.height)[()]
    return _pchip(rho)(x)[()]


def density_derivative(rho: DensityProfile, domain: Interval, x: ArrayLike, order: int = 1) -> ArrayLike:
    if isinstance(rho, Cosine):
        k = math.pi / domain.width
        phase = k * (np.asarray(x) - domain.center)
        if order == 1:
            return -k * np.sin(phase) / rho.gamma_norm
        if order == 2:
            return -k * k * np.cos(phase) / rho.gamma_norm
        raise ValueError("only first and second derivatives are supported")
    if isinstance(rho, Uniform):
        return np.zeros_like(np.asarray(x, dtype=float))[()]
    return _pchip(rho).derivative(order)(x)[()]


def velocity_value(u: VelocityProfile, x: ArrayLike) -> ArrayLike:
    if isinstance(u, Linear):
        return u.intercept + u.slope * np.asarray(x, dtype=float)
    if isinstance(u, Zero):
        return np.zeros_like(np.asarray(x, dtype=float))[()]
    return _pchip(u)(x)[()]


def velocity_slope(u: VelocityProfile, x: ArrayLike) -> ArrayLike:
    if isinstance(u, Linear):
        return np.full_like(np.asarray(x, dtype=float), u.slope)[()]
    if isinstance(u, Zero):
        return np.zeros_like(np.asarray(x, dtype=float))[()]
    return _pchip(u).derivative()(x)[()]


def profile_mass(rho: DensityProfile, domain: Interval) -> float:
    if isinstance(rho, Cosine):
        return 2.0 * domain.width / (math.pi * rho.gamma_norm)
    if isinstance(rho, Uniform):
        return rho.height * domain.width
    anti = _pchip(rho).antiderivative()
    return float(anti(domain.b0) - anti(domain.a0))


def _check_span(table: Tabulated, domain: Interval, what: str) -> None:
    g = np.asarray(table.grid)
    tol = _DOMAIN_SLACK * domain.width
    if abs(g[0] - domain.a0) > tol or abs(g[-1] - domain.b0) > tol:
        raise DegenerateDomain(
            f"tabulated {what} grid [{g[0]:.6g}, {g[-1]:.6g}] must span exactly "
            f"[{domain.a0:.6g}, {domain.b0:.6g}]"
        )


def _check_positive(rho: DensityProfile, domain: Interval, panels: int) -> None:
    if isinstance(rho, Cosine) and not rho.gamma_norm > 0:
        raise NonPositiveDensity(f"gamma_norm must be positive, got {rho.gamma_norm}")
    if isinstance(rho, Uniform) and not rho.height > 0:
        raise NonPositiveDensity(f"uniform height must be positive, got {rho.height}")
    if isinstance(rho, Tabulated):
        _check_span(rho, domain, "density")
        if np.any(np.asarray(rho.values) < 0):
            raise NonPositiveDensity("tabulated density has negative values")
    interior = domain.grid(panels)[1:-1]
    samples = np.asarray(density_value(rho, domain, interior))
    if np.any(samples <= 0):
        bad = float(interior[np.argmax(samples <= 0)])
        raise NonPositiveDensity(f"density is not positive at interior point x={bad:.6g}")


def normalize_mass(rho: DensityProfile, target_mass: float, domain: Interval) -> DensityProfile:
    """Rescale rho by one scalar factor so that it carries target_mass on domain."""
    if not target_mass > 0:
        raise NonPositiveDensity(f"target mass must be positive, got {target_mass}")
    _check_positive(rho, domain, MIN_QUADRATURE_N * 4)
    if isinstance(rho, Cosine):
        return Cosine(gamma_norm=2.0 * domain.width / (math.pi * target_mass))
    if isinstance(rho, Uniform):
        return Uniform(height=target_mass / domain.width)
    factor = target_mass / profile_mass(rho, domain)
    if abs(factor - 1.0) < 1e-15:
        return rho
    return Tabulated(grid=rho.grid, values=tuple(float(v) * factor for v in rho.values))


# ---------------------------
# Initial data
# ---------------------------

@dataclass(frozen=True)
class InitialData:
    domain: Interval
    rho0: DensityProfile
    u0: VelocityProfile
    m0: float
    m1: float
    first_moment: float
    gamma_cap: float
    quadrature_n: int = DEFAULT_QUADRATURE_N
    boundary_zeros: Tuple[str, ...] = field(default=())

    # pointwise accessors, vectorised over x
    def rho(self, x: ArrayLike) -> ArrayLike:
        return density_value(self.rho0, self.domain, x)

    def drho(self, x: ArrayLike, order: int = 1) -> ArrayLike:
        return density_derivative(self.rho0, self.domain, x, order)

    def u(self, x: ArrayLike) -> ArrayLike:
        return velocity_value(self.u0, x)

    def du(self, x: ArrayLike) -> ArrayLike:
        return velocity_slope(self.u0, x)

    def quadrature_grid(self) -> np.ndarray:
        return self.domain.grid(self.quadrature_n)


def _even(n: int) -> int:
    return n if n % 2 == 0 else n + 1


def build_initial_data(
    domain: Interval,
    rho: DensityProfile,
    u: VelocityProfile,
    quadrature_n: int = DEFAULT_QUADRATURE_N,
) -> InitialData:
    if quadrature_n < MIN_QUADRATURE_N:
        raise ValueError(f"quadrature_n must be >= {MIN_QUADRATURE_N}, got {quadrature_n}")
    panels = _even(int(quadrature_n))
    _check_positive(rho, domain, panels)
    if isinstance(u, Tabulated):
        # the interpolant extrapolates, so a short table would invent u outside it
        _check_span(u, domain, "velocity")

    x = domain.grid(panels)
    rho_x = np.asarray(density_value(rho, domain, x))

    m0 = profile_mass(rho, domain)
    if isinstance(rho, (Cosine, Uniform)):
        first_moment = domain.center * m0
    else:
        first_moment = float(simpson(x * rho_x, x=x))

    if isinstance(u, Linear):
        m1 = u.intercept * m0 + u.slope * first_moment
    elif isinstance(u, Zero):
        m1 = 0.0
    else:
        m1 = float(simpson(rho_x * np.asarray(velocity_value(u, x)), x=x))

    zeros = tuple(
        name for name, end in (("a0", domain.a0), ("b0", domain.b0))
        if abs(float(density_value(rho, domain, end))) <= 1e-14
    )
    if zeros:
        logger.debug("density vanishes at %s; endpoints are treated as limits", ", ".join(zeros))

    return InitialData(
        domain=domain,
        rho0=rho,
        u0=u,
        m0=m0,
        m1=m1,
        first_moment=first_moment,
        gamma_cap=(first_moment + m1) / m0,
        quadrature_n=panels,
        boundary_zeros=zeros,
    )


def with_mass(data: InitialData, m0: float) -> InitialData:
    """Same shapes, density renormalised to total mass m0."""
    rho = normalize_mass(data.rho0, m0, data.domain)
    return build_initial_data(data.domain, rho, data.u0, data.quadrature_n)


def with_velocity(data: InitialData, u: VelocityProfile) -> InitialData:
    return build_initial_data(data.domain, data.rho0, u, data.quadrature_n)


def cosine_data(
    m0: float = 0.2,
    slope: float = -1.0,
    intercept: float = 0.0,
    domain: Interval = Interval(-0.75, 0.75),
    quadrature_n: int = DEFAULT_QUADRATURE_N,
) -> InitialData:
    """Cosine bump normalised to m0 with linear velocity intercept + slope * x."""
    rho = normalize_mass(Cosine(gamma_norm=1.0), m0, domain)
    return build_initial_data(domain, rho, Linear(intercept, slope), quadrature_n)


def steady_data(m0: float = 0.2, center: float = 0.0, quadrature_n: int = DEFAULT_QUADRATURE_N) -> InitialData:
    """The stationary state: height m0/2 on (center - 1, center + 1), at rest."""
    domain = Interval(center - 1.0, center + 1.0)
    return build_initial_data(domain, Uniform(height=0.5 * m0), Zero(), quadrature_n)


# ---------------------------
# Operations on initial data
# ---------------------------

def check_in_domain(domain: Interval, x: ArrayLike) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    tol = _DOMAIN_SLACK * domain.width
    if np.any(~np.isfinite(arr)) or np.any(arr < domain.a0 - tol) or np.any(arr > domain.b0 + tol):
        raise OutOfDomain(f"x outside [{domain.a0}, {domain.b0}]")
    return np.clip(arr, domain.a0, domain.b0)


def cumulative_mass(data: InitialData, x: ArrayLike) -> ArrayLike:
    """F(x) = integral of rho0 from a0 to x."""
    xs = check_in_domain(data.domain, x)
    dom, rho = data.domain, data.rho0
    if isinstance(rho, Cosine):
        k = math.pi / dom.width
        out = (np.sin(k * (xs - dom.center)) + 1.0) / (k * rho.gamma_norm)
    elif isinstance(rho, Uniform):
        out = rho.height * (xs - dom.a0)
    else:
        anti = _pchip(rho).antiderivative()
        out = anti(xs) - anti(dom.a0)
    return np.clip(out, 0.0, data.m0)[()]


def v0_prime(data: InitialData, x: ArrayLike) -> ArrayLike:
    """Initial acceleration along characteristics: -u0 - (x+1) M0 + int y rho0 + 2 F(x)."""
    xs = check_in_domain(data.domain, x)
    return (
        -np.asarray(data.u(xs))
        - (xs + 1.0) * data.m0
        + data.first_moment
        + 2.0 * np.asarray(cumulative_mass(data, xs))
    )[()]


def quadrature_mass(data: InitialData) -> float:
    """Independent Simpson recomputation of M0 (consistency check)."""
    x = data.quadrature_grid()
    return float(simpson(np.asarray(data.rho(x)), x=x))


def describe(data: InitialData) -> dict:
    return {
        "a0": data.domain.a0,
        "b0": data.domain.b0,
        "m0": data.m0,
        "m1": data.m1,
        "first_moment": data.first_moment,
        "gamma_cap": data.gamma_cap,
        "boundary_zeros": list(data.boundary_zeros),
    }


__all__ = [
    "Interval", "Cosine", "Uniform", "Tabulated", "Linear", "Zero",
    "DensityProfile", "VelocityProfile", "InitialData",
    "build_initial_data", "normalize_mass", "cumulative_mass", "v0_prime",
    "cosine_data", "steady_data", "with_mass", "with_velocity",
    "density_value", "density_derivative", "velocity_value", "velocity_slope",
    "profile_mass", "quadrature_mass", "describe", "check_in_domain",
]
