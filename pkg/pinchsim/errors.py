"""Exception hierarchy shared by the simulation services and the CLI."""
from __future__ import annotations

from typing import Optional, Tuple

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_INFEASIBLE = 4


class PinchSimError(Exception):
    """Base class for every error raised by pinchsim."""

    exit_code: int = EXIT_CONFIG


class ParameterDomainError(PinchSimError, ValueError):
    """A physical or numerical parameter lies outside its admissible domain."""


class GeometryError(PinchSimError, ValueError):
    """A point or antenna violates the waveguide/deployment geometry."""


class ShapeError(PinchSimError, ValueError):
    """Array-valued inputs disagree in length."""


class DegenerateInputError(PinchSimError, ValueError):
    """An input is zero where a direction is required (e.g. a zero channel)."""


class ConfigurationError(PinchSimError, ValueError):
    """A scenario configuration is inconsistent with the requested run."""

    def __init__(self, message: str, *, key_path: Optional[str] = None) -> None:
        super().__init__(message)
        self.key_path = key_path


class SingularityError(PinchSimError, ArithmeticError):
    """Zero-forcing is impossible because the user channels are collinear."""

    exit_code = EXIT_INFEASIBLE


class SearchFailureError(PinchSimError, RuntimeError):
    """Every candidate cell of a placement search was rejected."""

    exit_code = EXIT_INFEASIBLE


class CapacityError(PinchSimError, RuntimeError):
    """The waveguide span cannot host the requested number of antennas."""

    exit_code = EXIT_INFEASIBLE

    def __init__(self, message: str, *, max_feasible: int) -> None:
        super().__init__(message)
        self.max_feasible = max_feasible


class InfeasiblePlacementError(PinchSimError, RuntimeError):
    """No odd-multiple solution of the orthogonality condition is reachable."""

    exit_code = EXIT_INFEASIBLE

    def __init__(self, message: str, *, achievable_range: Tuple[float, float]) -> None:
        super().__init__(message)
        self.achievable_range = achievable_range


class ValidationFailure(PinchSimError):
    """One or more oracle checks exceeded their tolerance."""

    exit_code = EXIT_VALIDATION


__all__ = [
    "EXIT_CONFIG",
    "EXIT_INFEASIBLE",
    "EXIT_OK",
    "EXIT_VALIDATION",
    "CapacityError",
    "ConfigurationError",
    "DegenerateInputError",
    "GeometryError",
    "InfeasiblePlacementError",
    "ParameterDomainError",
    "PinchSimError",
    "SearchFailureError",
    "ShapeError",
    "SingularityError",
    "ValidationFailure",
]
