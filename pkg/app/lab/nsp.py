"""Boundary blow-up for the viscous, pressured system through its Riccati reduction.

At a vacuum endpoint the slope d = d_x u obeys d' = -(d^2 + d + M0)
= -(d - d_plus)(d - d_minus). Starting below d_minus it reaches -inf in
finite time; w = (d - d_plus) / (d - d_minus) decays like e^{-sqrt(1-4M0) t}
and the blow-up is where w reaches 1.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.core.errors import ComplexRoots, HypothesisViolated, NonPositiveMass
from app.lab.profiles import InitialData

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-4
DEFAULT_BLOW_THRESHOLD = -1e6


def _admissible_exponent(value: float) -> bool:
    return value == 2.0 or value >= 3.0


@dataclass(frozen=True)
class RiccatiSetup:
    m0: float
    d_plus: float
    d_minus: float
    gamma_adiabatic: float = 2.0
    alpha_viscosity: float = 2.0

    def __post_init__(self) -> None:
        for name in ("gamma_adiabatic", "alpha_viscosity"):
            value = getattr(self, name)
            if not _admissible_exponent(value):
                raise ValueError(f"{name} must be 2 or >= 3, got {value}")

    @property
    def sqrt_xi(self) -> float:
        return self.d_plus - self.d_minus


@dataclass(frozen=True)
class BoundReport:
    d0: float
    bound: float
    exact_blowup: float
    numeric_blowup: float


def d_roots(m0: float) -> Tuple[float, float]:
    if not m0 > 0:
        raise NonPositiveMass(f"total mass must be positive, got {m0}")
    disc = 1.0 - 4.0 * m0
    if disc <= 0:
        raise ComplexRoots(f"d^2 + d + M0 has no distinct real roots for M0={m0}")
    root = math.sqrt(disc)
    return 0.5 * (-1.0 + root), 0.5 * (-1.0 - root)


def make_setup(m0: float, gamma_adiabatic: float = 2.0, alpha_viscosity: float = 2.0) -> RiccatiSetup:
    d_plus, d_minus = d_roots(m0)
    return RiccatiSetup(m0, d_plus, d_minus, gamma_adiabatic, alpha_viscosity)


def _require_below(setup: RiccatiSetup, d0: float) -> None:
    if not (math.isfinite(d0) and d0 < setup.d_minus):
        raise HypothesisViolated(f"need d0 < d_minus = {setup.d_minus:.10g}, got {d0}")


def exact_blowup(setup: RiccatiSetup, d0: float) -> float:
    _require_below(setup, d0)
    return math.log((d0 - setup.d_plus) / (d0 - setup.d_minus)) / setup.sqrt_xi


def riccati_profile(setup: RiccatiSetup, d0: float, t):
    """Exact d(t) from the separated solution, valid for t below the blow-up time."""
    _require_below(setup, d0)
    t = np.asarray(t, dtype=float)
    if np.any(t >= exact_blowup(setup, d0)):
        raise ValueError("t must precede the blow-up time")
    w = (d0 - setup.d_plus) / (d0 - setup.d_minus) * np.exp(-setup.sqrt_xi * t)
    return ((setup.d_plus - w * setup.d_minus) / (1.0 - w))[()]


def _rhs(d: float, setup: RiccatiSetup) -> float:
    return -(d - setup.d_plus) * (d - setup.d_minus)


def riccati_run(
    setup: RiccatiSetup,
    d0: float,
    dt: float = DEFAULT_DT,
    blow_threshold: float = DEFAULT_BLOW_THRESHOLD,
) -> float:
    """RK4 until d <= blow_threshold, then add the remaining time of the 1/(t* - t) tail."""
    _require_below(setup, d0)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if blow_threshold > -1e3:
        raise ValueError("blow_threshold must be <= -1e3")

    t, d = 0.0, float(d0)
    while d > blow_threshold:
        # the step shrinks like 1/|d| so the quadratic tail stays resolved
        h = min(dt, 0.01 / (1.0 + abs(d)))
        k1 = _rhs(d, setup)
        k2 = _rhs(d + 0.5 * h * k1, setup)
        k3 = _rhs(d + 0.5 * h * k2, setup)
        k4 = _rhs(d + h * k3, setup)
        d += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        if not math.isfinite(d):
            break
    if not math.isfinite(d):
        return t
    return t - 1.0 / (d + 0.5)


def blowup_bound(
    setup: RiccatiSetup,
    d0: float,
    dt: float = DEFAULT_DT,
    blow_threshold: float = DEFAULT_BLOW_THRESHOLD,
) -> BoundReport:
    _require_below(setup, d0)
    report = BoundReport(
        d0=d0,
        bound=1.0 / (setup.d_minus - d0),
        exact_blowup=exact_blowup(setup, d0),
        numeric_blowup=riccati_run(setup, d0, dt, blow_threshold),
    )
    logger.info(
        "nsp: d0=%.6g bound=%.6g exact=%.6g numeric=%.6g",
        d0, report.bound, report.exact_blowup, report.numeric_blowup,
    )
    return report


def boundary_vacuum(data: InitialData, tol: float = 1e-10) -> Tuple[str, ...]:
    """Endpoints where rho0 and its first two derivatives all vanish."""
    found = []
    for name, x in (("a0", data.domain.a0), ("b0", data.domain.b0)):
        values = (data.rho(x), data.drho(x, 1), data.drho(x, 2))
        if all(abs(float(v)) <= tol for v in values):
            found.append(name)
    return tuple(found)
