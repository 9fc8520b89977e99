"""Fixed-point iteration for the Lagrangian system on a short time window.

Given v^n on a (t, x) grid:
    eta^{n+1} = x + int_0^t v^n ds
    v^{n+1}   = u0 e^{-t} + int_0^t e^{-(t-s)} g(s, x) ds,
    g(s, x)   = 2 F(x) - M0 - M0 eta^{n+1}(s, x) + int eta^{n+1}(s, y) rho0(y) dy.
Time integrals use cumulative Simpson, the y-integral composite Simpson.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from app.core.errors import GridMismatch, NoConvergence
from app.lab.profiles import InitialData, cumulative_mass

logger = logging.getLogger(__name__)

MAX_WINDOW = 0.5


@dataclass(frozen=True)
class GridFunction:
    t_grid: np.ndarray
    x_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.t_grid.size < 2 or self.x_grid.size < 2:
            raise GridMismatch("grids need at least 2 points each")
        if self.values.shape != (self.t_grid.size, self.x_grid.size):
            raise GridMismatch(
                f"values shape {self.values.shape} does not match grids ({self.t_grid.size}, {self.x_grid.size})"
            )
        if not np.all(np.isfinite(self.values)):
            raise GridMismatch("grid values must be finite")


@dataclass(frozen=True)
class IterateReport:
    n: int
    sup_delta: float
    l2_delta: float


class PicardResult(NamedTuple):
    eta: GridFunction
    v: GridFunction
    reports: List[IterateReport]


def make_grids(data: InitialData, T0: float, nt: int, nx: int):
    return np.linspace(0.0, T0, nt), np.linspace(data.domain.a0, data.domain.b0, nx)


def initial_iterate(data: InitialData, t_grid: np.ndarray, x_grid: np.ndarray) -> GridFunction:
    """v^0(t, x) = u0(x) for every t."""
    u = np.asarray(data.u(x_grid), dtype=float)
    return GridFunction(t_grid, x_grid, np.tile(u, (t_grid.size, 1)))


def _check_grids(data: InitialData, v_n: GridFunction) -> None:
    t, x = v_n.t_grid, v_n.x_grid
    scale = data.domain.width
    if abs(t[0]) > 0 or np.any(np.diff(t) <= 0):
        raise GridMismatch("time grid must start at 0 and increase")
    if abs(x[0] - data.domain.a0) > 1e-12 * scale or abs(x[-1] - data.domain.b0) > 1e-12 * scale:
        raise GridMismatch("x grid must span the initial domain")
    if np.any(np.diff(x) <= 0):
        raise GridMismatch("x grid must increase")


def iterate_once(data: InitialData, v_n: GridFunction):
    _check_grids(data, v_n)
    t, x = v_n.t_grid, v_n.x_grid
    eta = x[None, :] + cumulative_simpson(v_n.values, x=t, axis=0, initial=0.0)

    rho = np.asarray(data.rho(x), dtype=float)
    pull = simpson(eta * rho[None, :], x=x, axis=1)
    source = (2.0 * np.asarray(cumulative_mass(data, x)) - data.m0)[None, :]
    g = source - data.m0 * eta + pull[:, None]

    growth = np.exp(t)[:, None]
    integral = cumulative_simpson(growth * g, x=t, axis=0, initial=0.0)
    u = np.asarray(data.u(x), dtype=float)[None, :]
    v_next = (u + integral) / growth
    return GridFunction(t, x, eta), GridFunction(t, x, v_next)


def _deltas(n: int, old: GridFunction, new: GridFunction) -> IterateReport:
    diff = new.values - old.values
    sup = float(np.max(np.abs(diff)))
    l2 = float(np.max(np.sqrt(simpson(diff * diff, x=new.x_grid, axis=1))))
    return IterateReport(n=n, sup_delta=sup, l2_delta=l2)


def solve(
    data: InitialData,
    T0: float = 0.1,
    nt: int = 101,
    nx: int = 101,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> PicardResult:
    if not 0 < T0 <= MAX_WINDOW:
        raise ValueError(f"T0 must lie in (0, {MAX_WINDOW}], got {T0}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if nt < 3 or nx < 3:
        raise GridMismatch("Simpson quadrature needs at least 3 points per axis")

    t_grid, x_grid = make_grids(data, T0, nt, nx)
    v = initial_iterate(data, t_grid, x_grid)
    reports: List[IterateReport] = []
    eta = None
    for n in range(1, max_iter + 1):
        eta, v_next = iterate_once(data, v)
        report = _deltas(n, v, v_next)
        reports.append(report)
        logger.debug("picard n=%d sup_delta=%.3e l2_delta=%.3e", n, report.sup_delta, report.l2_delta)
        v = v_next
        if report.sup_delta <= tol:
            logger.info("picard converged after %d iterations (sup_delta=%.3e)", n, report.sup_delta)
            return PicardResult(eta, v, reports)

    raise NoConvergence(
        f"no convergence within {max_iter} iterations", sup_delta=reports[-1].sup_delta
    )


def contraction_ratios(reports: List[IterateReport]) -> List[float]:
    """sup_delta(n+1) / sup_delta(n), skipping steps where the previous delta is zero."""
    return [
        b.sup_delta / a.sup_delta
        for a, b in zip(reports, reports[1:])
        if a.sup_delta > 0
    ]


def flow_positivity(eta: GridFunction) -> float:
    """Minimum of d_x eta over the grid by centred differences."""
    return float(np.min(np.gradient(eta.values, eta.x_grid, axis=1, edge_order=2)))
