from __future__ import annotations

from typing import Optional


class LabError(Exception):
    """Base class for every error raised by the lab modules."""


# ---------------------------
# Validation / domain errors
# ---------------------------

class DegenerateDomain(LabError, ValueError):
    pass


class NonPositiveDensity(LabError, ValueError):
    pass


class NonPositiveMass(LabError, ValueError):
    pass


class OutOfDomain(LabError, ValueError):
    pass


class UnsortedPositions(LabError, ValueError):
    pass


class TooFewParticles(LabError, ValueError):
    pass


class DegenerateSpacing(LabError, ValueError):
    pass


class GridMismatch(LabError, ValueError):
    pass


class NotBracketed(LabError, ValueError):
    pass


class SupercriticalData(LabError, ValueError):
    pass


class HypothesisViolated(LabError, ValueError):
    pass


class ComplexRoots(LabError, ValueError):
    pass


class NonPositiveValues(LabError, ValueError):
    pass


class ConfigInvalid(LabError, ValueError):
    pass


class IoFailure(LabError, OSError):
    pass


# ---------------------------
# Numerical failures
# ---------------------------

class NumericalFailure(LabError):
    pass


class NonFiniteState(NumericalFailure):
    def __init__(self, message: str, *, last_finite_time: float) -> None:
        super().__init__(f"{message} (last finite time {last_finite_time:.6g})")
        self.last_finite_time = last_finite_time


class NoConvergence(NumericalFailure):
    def __init__(self, message: str, *, sup_delta: Optional[float] = None) -> None:
        super().__init__(message)
        self.sup_delta = sup_delta


# ---------------------------
# Advisories
# ---------------------------

class ScanTooCoarse(UserWarning):
    """Issued when the blow-up predicate flips between neighbouring scan cells."""
