"""Long-time behaviour: limit profile, L1 distances and their decay rates."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson

from app.core.errors import NonPositiveDensity, NonPositiveMass, NonPositiveValues, SupercriticalData
from app.lab.closed_form import evaluate_grid, regime, roots
from app.lab.profiles import InitialData, Interval, cumulative_mass
from app.lab.thresholds import DEFAULT_SCAN_N, BlowUp, classify

logger = logging.getLogger(__name__)

CASE_B_EPSILON = 1e-3
MIN_FIT_SAMPLES = 8


@dataclass(frozen=True)
class AsymptoticProfile:
    gamma_cap: float
    omega_inf: Interval
    height: float

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where((x > self.omega_inf.a0) & (x < self.omega_inf.b0), self.height, 0.0)


@dataclass(frozen=True)
class L1Row:
    t: float
    to_tilde: float
    tilde_to_inf: float
    total_bound: float


@dataclass(frozen=True)
class RateReport:
    lambda_theory: Optional[float]
    lambda_fit: float
    fit_window: Tuple[float, float]
    residual: float


def limit_profile(data: InitialData) -> AsymptoticProfile:
    g = data.gamma_cap
    return AsymptoticProfile(gamma_cap=g, omega_inf=Interval(g - 1.0, g + 1.0), height=0.5 * data.m0)


def eta_infinity(data: InitialData, x):
    """Limit of the characteristic flow: (int y rho0 + int rho0 u0 + 2 F(x) - M0) / M0."""
    f = np.asarray(cumulative_mass(data, x))
    return ((data.first_moment + data.m1 + 2.0 * f - data.m0) / data.m0)[()]


def _ensure_subcritical(data: InitialData, scan_n: int) -> None:
    verdict = classify(data, scan_n)
    if isinstance(verdict, BlowUp):
        raise SupercriticalData(
            f"data blows up at t={verdict.t_first_zero:.6g} (x={verdict.x_star:.6g}); no long-time limit"
        )


def _support_gap(left: float, right: float, target: Interval) -> float:
    overlap = max(0.0, min(right, target.b0) - max(left, target.a0))
    return (right - left) + target.width - 2.0 * overlap


def _l1_rows(data: InitialData, times: np.ndarray) -> List[L1Row]:
    x = data.quadrature_grid()
    grid = evaluate_grid(data, times, x)
    rho = np.asarray(data.rho(x), dtype=float)
    half = 0.5 * data.m0
    to_tilde = simpson(np.abs(rho[None, :] - half * grid.etax), x=x, axis=1)
    target = limit_profile(data).omega_inf
    rows = []
    for k, t in enumerate(grid.t):
        tail = half * _support_gap(float(grid.eta[k, 0]), float(grid.eta[k, -1]), target)
        rows.append(L1Row(float(t), float(to_tilde[k]), float(tail), float(to_tilde[k] + tail)))
    return rows


def l1_distance(data: InitialData, t: float, scan_n: int = DEFAULT_SCAN_N) -> L1Row:
    """Triangle-inequality bound on ||rho(t) - rho_inf||_1 through the intermediate profile."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    _ensure_subcritical(data, scan_n)
    return _l1_rows(data, np.array([t]))[0]


def l1_series(data: InitialData, times: Sequence[float], scan_n: int = DEFAULT_SCAN_N) -> List[L1Row]:
    ts = np.asarray(times, dtype=float)
    if ts.size == 0:
        return []
    if np.any(ts < 0):
        raise ValueError("times must be nonnegative")
    _ensure_subcritical(data, scan_n)
    return _l1_rows(data, ts)


def intermediate_l1(data: InitialData, t: float) -> float:
    """L1 distance to the flat profile M0 / |Omega(t)| carried on the current support."""
    x = data.quadrature_grid()
    grid = evaluate_grid(data, t, x)
    width = float(grid.eta[0, -1] - grid.eta[0, 0])
    if width <= 0:
        raise SupercriticalData("support has collapsed")
    rho = np.asarray(data.rho(x), dtype=float)
    return float(simpson(np.abs(rho - (data.m0 / width) * grid.etax[0]), x=x))


def endpoint_series(data: InitialData, times: Sequence[float]) -> List[Tuple[float, float, float]]:
    """(t, |eta(t, a0) - (G - 1)|, |eta(t, b0) - (G + 1)|)."""
    ts = np.asarray(times, dtype=float)
    target = limit_profile(data).omega_inf
    grid = evaluate_grid(data, ts, [data.domain.a0, data.domain.b0])
    return [
        (float(t), abs(float(grid.eta[k, 0]) - target.a0), abs(float(grid.eta[k, 1]) - target.b0))
        for k, t in enumerate(ts)
    ]


def decay_rate(m0: float) -> float:
    reg = regime(m0)
    if reg.variant == "A":
        return -roots(m0)[0]
    if reg.variant == "B":
        return 0.5 - CASE_B_EPSILON
    return 0.5


def fit_rate(
    times: Sequence[float],
    values: Sequence[float],
    window: Optional[Tuple[float, float]] = None,
    m0: Optional[float] = None,
) -> RateReport:
    """Least squares on (t, ln value); lambda_fit is minus the slope."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape:
        raise ValueError("times and values must have the same length")
    if window is not None:
        keep = (t >= window[0]) & (t <= window[1])
        t, y = t[keep], y[keep]
    if t.size < MIN_FIT_SAMPLES:
        raise ValueError(f"need at least {MIN_FIT_SAMPLES} samples in the fit window, got {t.size}")
    if np.any(~(y > 0)):
        raise NonPositiveValues("rate fitting needs strictly positive values")
    slope, intercept = np.polyfit(t, np.log(y), 1)
    resid = np.log(y) - (slope * t + intercept)
    return RateReport(
        lambda_theory=decay_rate(m0) if m0 is not None else None,
        lambda_fit=float(-slope),
        fit_window=(float(t[0]), float(t[-1])),
        residual=float(math.sqrt(np.mean(resid * resid))),
    )


def endpoint_rate(data: InitialData, times: Sequence[float]) -> RateReport:
    rows = endpoint_series(data, times)
    gaps = [max(left, right) for _, left, right in rows]
    return fit_rate([r[0] for r in rows], gaps, m0=data.m0)


def aggregation_density(m0: float, rho0_at_x: float, t: float) -> float:
    """Density along a characteristic of the aggregation limit (no inertia)."""
    if not m0 > 0:
        raise NonPositiveMass(f"total mass must be positive, got {m0}")
    if not rho0_at_x > 0:
        raise NonPositiveDensity(f"rho0 must be positive, got {rho0_at_x}")
    return m0 * rho0_at_x / ((m0 - 2.0 * rho0_at_x) * math.exp(-m0 * t) + 2.0 * rho0_at_x)
