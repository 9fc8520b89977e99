"""Explicit Lagrangian solution of the damped pressureless system.

Along a characteristic the velocity solves v'' + v' + M0 v = M1 e^{-t}. Write
v = h + (M1/M0) e^{-t}; the homogeneous part h obeys h'' + h' + M0 h = 0, so
its time integral is (h(0) + h'(0) - h(t) - h'(t)) / M0. That identity gives
eta and its x-derivative for every regime from the pair (h, h') alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from app.core.errors import NonPositiveMass
from app.lab.profiles import InitialData, check_in_domain, cumulative_mass

ArrayLike = Union[float, np.ndarray]

REGIME_TOL = 1e-10


# ---------------------------
# Regimes
# ---------------------------

@dataclass(frozen=True)
class MassRegime:
    variant: str  # "A" overdamped, "B" critical, "C" oscillatory
    xi: float
    sqrt_abs: float

    @property
    def omega(self) -> float:
        """Angular frequency of the oscillatory regime (sqrt(-xi) / 2)."""
        return 0.5 * self.sqrt_abs


def regime(m0: float) -> MassRegime:
    if not (m0 > 0 and math.isfinite(m0)):
        raise NonPositiveMass(f"total mass must be positive, got {m0}")
    xi = 1.0 - 4.0 * m0
    if xi > REGIME_TOL:
        return MassRegime("A", xi, math.sqrt(xi))
    if xi < -REGIME_TOL:
        return MassRegime("C", xi, math.sqrt(-xi))
    return MassRegime("B", xi, 0.0)


def roots(m0: float) -> Tuple[float, float]:
    """(lambda1, lambda2) of s^2 + s + M0 with lambda1 >= lambda2; real part only in regime C."""
    reg = regime(m0)
    if reg.variant == "A":
        return 0.5 * (-1.0 + reg.sqrt_abs), 0.5 * (-1.0 - reg.sqrt_abs)
    return -0.5, -0.5


# ---------------------------
# Coefficients
# ---------------------------

@dataclass(frozen=True)
class Coefficients:
    regime: MassRegime
    m0: float
    m1: float
    rho0: float
    h0: float
    h0_prime: float
    dh0: float
    dh0_prime: float
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    c1: Optional[float] = None
    c2: Optional[float] = None
    c3: Optional[float] = None
    c4: Optional[float] = None
    c5: Optional[float] = None
    c6: Optional[float] = None
    dc1: Optional[float] = None
    dc2: Optional[float] = None
    dc3: Optional[float] = None
    dc4: Optional[float] = None
    dc5: Optional[float] = None
    dc6: Optional[float] = None


def _pair(reg: MassRegime, m0: float, h0: ArrayLike, h0p: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """The two regime coefficients of the homogeneous solution with h(0)=h0, h'(0)=h0p."""
    if reg.variant == "A":
        l1, l2 = roots(m0)
        return (h0p - l2 * h0) / reg.sqrt_abs, (l1 * h0 - h0p) / reg.sqrt_abs
    if reg.variant == "B":
        return h0, h0p + 0.5 * h0
    return h0, (h0p + 0.5 * h0) / reg.omega


def _initial_values(data: InitialData, x: ArrayLike):
    """(rho0, h0, h0', d_x h0, d_x h0') at x, vectorised."""
    xs = check_in_domain(data.domain, x)
    m0, m1 = data.m0, data.m1
    rho = np.asarray(data.rho(xs), dtype=float)
    u = np.asarray(data.u(xs), dtype=float)
    ux = np.asarray(data.du(xs), dtype=float)
    vp = -u - (xs + 1.0) * m0 + data.first_moment + 2.0 * np.asarray(cumulative_mass(data, xs))
    h0 = u - m1 / m0
    h0p = vp + m1 / m0
    return xs, rho, h0, h0p, ux, -ux - m0 + 2.0 * rho


def coefficients_at(data: InitialData, x: float) -> Coefficients:
    reg = regime(data.m0)
    _, rho, h0, h0p, dh0, dh0p = (float(a) for a in _initial_values(data, x))
    a, b = _pair(reg, data.m0, h0, h0p)
    da, db = _pair(reg, data.m0, dh0, dh0p)
    base = dict(
        regime=reg, m0=data.m0, m1=data.m1, rho0=rho,
        h0=h0, h0_prime=h0p, dh0=dh0, dh0_prime=dh0p,
    )
    if reg.variant == "A":
        l1, l2 = roots(data.m0)
        return Coefficients(**base, lambda1=l1, lambda2=l2, c1=a, c2=b, dc1=da, dc2=db)
    if reg.variant == "B":
        return Coefficients(**base, lambda1=-0.5, lambda2=-0.5, c3=a, c4=b, dc3=da, dc4=db)
    return Coefficients(**base, c5=a, c6=b, dc5=da, dc6=db)


# ---------------------------
# Homogeneous part
# ---------------------------

def homogeneous(reg: MassRegime, m0: float, h0: ArrayLike, h0p: ArrayLike, t: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """(h(t), h'(t)) for h'' + h' + M0 h = 0, broadcasting t against the initial values."""
    t = np.asarray(t, dtype=float)
    a, b = _pair(reg, m0, np.asarray(h0, dtype=float), np.asarray(h0p, dtype=float))
    if reg.variant == "A":
        l1, l2 = roots(m0)
        e1, e2 = np.exp(l1 * t), np.exp(l2 * t)
        return a * e1 + b * e2, l1 * a * e1 + l2 * b * e2
    damp = np.exp(-0.5 * t)
    if reg.variant == "B":
        h = damp * (a + b * t)
        return h, damp * b - 0.5 * h
    wt = reg.omega * t
    cos, sin = np.cos(wt), np.sin(wt)
    h = damp * (a * cos + b * sin)
    return h, -0.5 * h + reg.omega * damp * (b * cos - a * sin)


# ---------------------------
# Flow evaluation
# ---------------------------

@dataclass(frozen=True)
class FlowState:
    v: float
    vx: float
    eta: float
    etax: float
    f: Optional[float]  # None when etax <= 0

    @property
    def degenerate(self) -> bool:
        return self.f is None


@dataclass(frozen=True)
class FlowGrid:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    vx: np.ndarray
    eta: np.ndarray
    etax: np.ndarray
    f: np.ndarray  # NaN where etax <= 0


def _flow(data: InitialData, t: ArrayLike, x: ArrayLike):
    xs, rho, h0, h0p, dh0, dh0p = _initial_values(data, x)
    m0, m1 = data.m0, data.m1
    reg = regime(m0)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("time must be finite and nonnegative")
    h, hp = homogeneous(reg, m0, h0, h0p, t)
    hx, hxp = homogeneous(reg, m0, dh0, dh0p, t)
    decay = np.exp(-t)
    v = h + (m1 / m0) * decay
    eta = xs + (h0 + h0p - h - hp) / m0 + (m1 / m0) * (1.0 - decay)
    etax = (2.0 * rho - hx - hxp) / m0
    return xs, rho, v, hx, eta, etax


def evaluate(data: InitialData, x: float, t: float) -> FlowState:
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    _, rho, v, vx, eta, etax = (float(a) for a in _flow(data, t, x))
    f = rho / etax if etax > 0 else None
    return FlowState(v=v, vx=vx, eta=eta, etax=etax, f=f)


def evaluate_grid(data: InitialData, t: ArrayLike, x: ArrayLike) -> FlowGrid:
    """Vectorised evaluate on the outer product t x x; arrays have shape (len(t), len(x))."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    xs, rho, v, vx, eta, etax = _flow(data, tt[:, None], xx[None, :])
    rho_b = np.broadcast_to(rho, etax.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(etax > 0, rho_b / np.where(etax > 0, etax, 1.0), np.nan)
    shape = etax.shape
    return FlowGrid(
        t=tt, x=xx,
        v=np.broadcast_to(v, shape).copy(),
        vx=np.broadcast_to(vx, shape).copy(),
        eta=np.broadcast_to(eta, shape).copy(),
        etax=etax, f=f,
    )


def etax_along(data: InitialData, x: float):
    """t -> d_x eta(t, x) with the x-dependent inputs computed once."""
    _, rho, _, _, dh0, dh0p = (float(a) for a in _initial_values(data, x))
    reg = regime(data.m0)
    m0 = data.m0

    def fn(t: ArrayLike) -> ArrayLike:
        hx, hxp = homogeneous(reg, m0, dh0, dh0p, t)
        return ((2.0 * rho - hx - hxp) / m0)[()]

    return fn


def momentum(data: InitialData, t: ArrayLike) -> ArrayLike:
    return data.m1 * np.exp(-np.asarray(t, dtype=float))[()]


def xi_deviation(data: InitialData, x: ArrayLike, t: float) -> ArrayLike:
    """2 rho0 / M0 - d_x eta: the part of the flow gradient that decays in time."""
    grid = evaluate_grid(data, t, x)
    limit = 2.0 * np.asarray(data.rho(grid.x)) / data.m0
    return (limit - grid.etax[0])[()]
