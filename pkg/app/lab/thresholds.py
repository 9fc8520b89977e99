"""Sharp global-existence / blow-up classification of initial data.

Each point x is tested with the exact regime predicate: the flow gradient
d_x eta(., x) has at most one relevant interior minimum, and blow-up happens
iff its value there is <= 0. The data blows up iff some x triggers.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from app.core.errors import NotBracketed, ScanTooCoarse
from app.lab.closed_form import coefficients_at, etax_along, evaluate, evaluate_grid, regime, roots
from app.lab.profiles import InitialData

logger = logging.getLogger(__name__)

DEFAULT_SCAN_N = 1024
MIN_SCAN_N = 64
X_RESOLUTION = 1e-10


# ---------------------------
# Records
# ---------------------------

@dataclass(frozen=True)
class PointCondition:
    x: float
    case_tag: str  # A, B, C1i, C1ii, C2i, C2ii
    triggers_blowup: bool
    min_etax: float
    t_min: Optional[float]
    c7: Optional[float] = None
    c8: Optional[float] = None


@dataclass(frozen=True)
class Global:
    points_scanned: int = 0

    @property
    def name(self) -> str:
        return "Global"


@dataclass(frozen=True)
class BlowUp:
    x_star: float
    t_star_min: float
    t_first_zero: float
    witness: PointCondition
    points_scanned: int = 0

    @property
    def name(self) -> str:
        return "BlowUp"


Verdict = Union[Global, BlowUp]


@dataclass(frozen=True)
class BruteMinimum:
    value: float
    t: float
    x: float


@dataclass(frozen=True)
class CriticalReport:
    param: float
    lo: float
    hi: float
    lo_verdict: str
    hi_verdict: str
    iterations: int


# ---------------------------
# Pointwise predicates
# ---------------------------

def _no_interior_minimum(x: float, tag: str, rho: float, m0: float, **extra) -> PointCondition:
    # d_x eta is monotone or has only a maximum: the infimum is at t = 0 or t -> inf.
    limit = 2.0 * rho / m0
    if limit < 1.0:
        return PointCondition(x, tag, False, limit, None, **extra)
    return PointCondition(x, tag, False, 1.0, 0.0, **extra)


def _with_minimum(x: float, tag: str, value: float, t_star: float, **extra) -> PointCondition:
    if value >= 1.0:
        return PointCondition(x, tag, False, 1.0, 0.0, **extra)
    return PointCondition(x, tag, value <= 0.0, value, t_star, **extra)


def _case_a(x: float, co) -> PointCondition:
    m0, rho, ux = co.m0, co.rho0, co.dh0
    l1, l2 = co.lambda1, co.lambda2
    sq = co.regime.sqrt_abs
    a = l1 * ux - m0 + 2.0 * rho
    b = l2 * ux - m0 + 2.0 * rho
    if not (ux < 0 and a > 0):
        return _no_interior_minimum(x, "A", rho, m0)
    # 2 rho0 <= A^{-l2/sq} B^{l1/sq} is the sign of the stationary value below.
    product = math.exp((-l2 * math.log(a) + l1 * math.log(b)) / sq)
    t_star = math.log(b / a) / sq
    return _with_minimum(x, "A", (2.0 * rho - product) / m0, t_star)


def _case_b(x: float, co) -> PointCondition:
    m0, rho = co.m0, co.rho0
    d3, d4 = co.dc3, co.dc4
    if not (d3 < 0 and d4 > 0):
        return _no_interior_minimum(x, "B", rho, m0)
    t_star = -d3 / d4
    return _with_minimum(x, "B", (2.0 * rho - d4 * math.exp(-0.5 * t_star)) / m0, t_star)


_SHIFTS = {"C1i": 0.0, "C1ii": -math.pi, "C2i": -math.pi, "C2ii": -2.0 * math.pi}


def _case_c(data: InitialData, x: float, co) -> PointCondition:
    m0, rho = co.m0, co.rho0
    d5, d6 = co.dc5, co.dc6
    sq = co.regime.sqrt_abs
    omega = co.regime.omega
    tag = ("C1" if (d5 < 0) != (d6 < 0) else "C2") + ("i" if d5 < 0 else "ii")
    c7 = (2.0 * sq / (1.0 + sq * sq)) * math.hypot(d5, d6)
    if d5 == 0.0 and d6 == 0.0:
        return _no_interior_minimum(x, tag, rho, m0, c7=0.0, c8=None)
    if d5 == 0.0 or d6 == 0.0:
        c8 = math.atan(d5 / d6) if d6 != 0.0 else None
        t_star, value = _minimize_first_period(etax_along(data, x), 2.0 * math.pi / omega)
        return _with_minimum(x, tag, value, t_star, c7=c7, c8=c8)
    c8 = math.atan(d5 / d6)
    shift = _SHIFTS[tag]
    t_star = (-c8 - shift) / omega
    value = 2.0 * rho / m0 - c7 * math.exp((c8 + shift) / sq)
    return _with_minimum(x, tag, value, t_star, c7=c7, c8=c8)


def _minimize_first_period(fn: Callable[[float], float], period: float) -> Tuple[float, float]:
    """Direct minimisation of d_x eta over (0, period] for sign patterns the sets do not cover."""
    ts = np.linspace(0.0, period, 513)[1:]
    vals = np.asarray(fn(ts))
    i = int(np.argmin(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
    res = minimize_scalar(lambda s: float(fn(s)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    if res.fun < vals[i]:
        return float(res.x), float(res.fun)
    return float(ts[i]), float(vals[i])


def classify_point(data: InitialData, x: float) -> PointCondition:
    co = coefficients_at(data, x)
    variant = co.regime.variant
    if variant == "A":
        return _case_a(x, co)
    if variant == "B":
        return _case_b(x, co)
    return _case_c(data, x, co)


# ---------------------------
# Whole-domain classification
# ---------------------------

def scan(data: InitialData, scan_n: int = DEFAULT_SCAN_N) -> List[PointCondition]:
    """classify_point on both endpoints and scan_n interior points, in x order."""
    if scan_n < MIN_SCAN_N:
        raise ValueError(f"scan_n must be >= {MIN_SCAN_N}, got {scan_n}")
    xs = np.linspace(data.domain.a0, data.domain.b0, scan_n + 2)
    return [classify_point(data, float(x)) for x in xs]


def _bisect_boundary(data: InitialData, lo: PointCondition, hi: PointCondition) -> PointCondition:
    """Narrow a predicate flip between lo.x and hi.x; returns the triggering side."""
    left, right = lo, hi
    while right.x - left.x > X_RESOLUTION:
        mid = classify_point(data, 0.5 * (left.x + right.x))
        if mid.triggers_blowup == left.triggers_blowup:
            left = mid
        else:
            right = mid
    return left if left.triggers_blowup else right


def first_zero_time(data: InitialData, point: PointCondition) -> float:
    """First t in (0, t_min] where d_x eta(t, x) vanishes."""
    if not point.triggers_blowup or point.t_min is None:
        raise ValueError("point does not trigger blow-up")
    fn = etax_along(data, point.x)
    if fn(point.t_min) >= 0.0:
        return point.t_min
    return float(brentq(fn, 0.0, point.t_min, xtol=1e-14, rtol=4 * np.finfo(float).eps))


def _refine_witness(data: InitialData, lo: float, hi: float, start: float) -> Optional[Tuple[float, float]]:
    def objective(x: float) -> float:
        pc = classify_point(data, x)
        return first_zero_time(data, pc) if pc.triggers_blowup else start + 1.0

    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": X_RESOLUTION})
    if res.fun < start:
        return float(res.x), float(res.fun)
    return None


def classify(
    data: InitialData,
    scan_n: int = DEFAULT_SCAN_N,
    points: Optional[List[PointCondition]] = None,
) -> Verdict:
    pts = points if points is not None else scan(data, scan_n)
    flags = [p.triggers_blowup for p in pts]

    candidates = [p for p in pts if p.triggers_blowup]
    for i in range(len(pts) - 1):
        if flags[i] != flags[i + 1]:
            candidates.append(_bisect_boundary(data, pts[i], pts[i + 1]))
    for i in range(1, len(pts) - 1):
        if flags[i] != flags[i - 1] and flags[i] != flags[i + 1]:
            msg = f"blow-up predicate flips at a single scan cell near x={pts[i].x:.6g}"
            logger.warning(msg)
            warnings.warn(msg, ScanTooCoarse, stacklevel=2)
            break

    if not candidates:
        logger.info("classify: Global over %d points", len(pts))
        return Global(points_scanned=len(pts))

    timed = sorted(((first_zero_time(data, p), p.x, p) for p in candidates), key=lambda r: (r[0], r[1]))
    t_zero, _, witness = timed[0]

    step = (data.domain.b0 - data.domain.a0) / max(len(pts) - 1, 1)
    lo = max(data.domain.a0, witness.x - step)
    hi = min(data.domain.b0, witness.x + step)
    refined = _refine_witness(data, lo, hi, t_zero)
    if refined is not None:
        witness = classify_point(data, refined[0])
        t_zero = refined[1]

    logger.info("classify: BlowUp at x=%.10g, first zero t=%.10g", witness.x, t_zero)
    return BlowUp(
        x_star=witness.x,
        t_star_min=float(witness.t_min),
        t_first_zero=t_zero,
        witness=witness,
        points_scanned=len(pts),
    )


# ---------------------------
# Independent oracle
# ---------------------------

def brute_min_etax(data: InitialData, t_max: float, nt: int = 256, nx: int = 256) -> BruteMinimum:
    """Dense scan of d_x eta over [0, t_max] x domain, then a bounded local polish."""
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    if nt < MIN_SCAN_N or nx < MIN_SCAN_N:
        raise ValueError(f"nt and nx must be >= {MIN_SCAN_N}")
    ts = np.linspace(0.0, t_max, nt)
    xs = np.linspace(data.domain.a0, data.domain.b0, nx)
    grid = evaluate_grid(data, ts, xs)
    i, j = np.unravel_index(int(np.argmin(grid.etax)), grid.etax.shape)
    best = BruteMinimum(float(grid.etax[i, j]), float(ts[i]), float(xs[j]))

    a0, b0 = data.domain.a0, data.domain.b0
    res = minimize(
        lambda p: evaluate(data, float(np.clip(p[1], a0, b0)), float(np.clip(p[0], 0.0, t_max))).etax,
        x0=np.array([best.t, best.x]),
        method="L-BFGS-B",
        bounds=[(0.0, t_max), (a0, b0)],
    )
    if res.success and float(res.fun) < best.value:
        best = BruteMinimum(float(res.fun), float(res.x[0]), float(res.x[1]))
    return best


# ---------------------------
# Phase boundary
# ---------------------------

def critical_slope(m0: float) -> Optional[float]:
    """Steepest compression -d_x u0 a vacuum endpoint tolerates without blow-up.

    Returns None when M0 > 1/4: d_x eta then oscillates at a vacuum endpoint
    and reaches zero for every slope, so no threshold exists.
    """
    reg = regime(m0)
    if reg.variant == "C":
        return None
    return -roots(m0)[1]


def sweep_critical(
    family: Callable[[float], InitialData],
    param_lo: float,
    param_hi: float,
    tol: float = 1e-6,
    scan_n: int = DEFAULT_SCAN_N,
) -> CriticalReport:
    """Bisect the family parameter on the classifier verdict down to width tol."""
    if not tol > 0:
        raise ValueError("tol must be positive")

    def blows_up(p: float) -> bool:
        return isinstance(classify(family(p), scan_n), BlowUp)

    lo, hi = float(param_lo), float(param_hi)
    lo_blow, hi_blow = blows_up(lo), blows_up(hi)
    names = {True: "BlowUp", False: "Global"}
    if lo_blow == hi_blow:
        raise NotBracketed(f"both ends of [{lo}, {hi}] classify as {names[lo_blow]}")

    iterations = 0
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if blows_up(mid) == lo_blow:
            lo = mid
        else:
            hi = mid
        iterations += 1
    logger.info("sweep_critical: boundary in [%.10g, %.10g] after %d bisections", lo, hi, iterations)
    return CriticalReport(
        param=0.5 * (lo + hi),
        lo=lo,
        hi=hi,
        lo_verdict=names[lo_blow],
        hi_verdict=names[hi_blow],
        iterations=iterations,
    )
