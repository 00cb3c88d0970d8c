"""
Exception hierarchy

Every failure raised by the library derives from EpigainError and carries the
structured values a caller needs to report or recover, not only a message.
"""

from typing import Any, Dict, Optional, Tuple


class EpigainError(Exception):
    """Base class for all library errors."""
    pass


class DomainRangeError(EpigainError):
    """A quantity left its representable or mathematical domain."""

    def __init__(self, quantity: str, value: Any, location: Optional[Any] = None):
        self.quantity = quantity
        self.value = value
        self.location = location
        where = f" at {location}" if location is not None else ""
        super().__init__(f"{quantity} is out of range{where}: {value!r}")


class QuadratureError(EpigainError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, message: str, estimate: float, error_bound: float, subdivisions: int):
        self.estimate = estimate
        self.error_bound = error_bound
        self.subdivisions = subdivisions
        super().__init__(
            f"Quadrature failed after {subdivisions} subdivisions: {message} "
            f"(estimate={estimate:.12g}, error bound={error_bound:.3g})"
        )


class NegativeDivergenceError(EpigainError):
    """A KL divergence came out below the numerical slack."""

    def __init__(self, name: str, value: float):
        self.name = name
        self.value = value
        super().__init__(f"{name} = {value:.3e} is negative beyond quadrature slack")


class OptimizerError(EpigainError):
    """The objective returned a non-finite value."""

    def __init__(self, delta: float, value: float):
        self.delta = delta
        self.value = value
        super().__init__(f"Objective is not finite at delta={delta!r}: {value!r}")


class SimulationRefusedError(EpigainError):
    """An inquiry simulation needs converged optima."""

    def __init__(self, converged: Dict[str, bool]):
        self.converged = converged
        failed = ", ".join(name for name, ok in converged.items() if not ok)
        super().__init__(f"Optima did not converge for: {failed}")


class ModelValidationError(EpigainError):
    """A discrete policy model document violates its schema."""
    pass


class IdentityViolationError(EpigainError):
    """A decomposition identity does not hold within tolerance."""

    def __init__(self, identity: str, expected: float, actual: float, tolerance: float):
        self.identity = identity
        self.expected = expected
        self.actual = actual
        self.tolerance = tolerance
        super().__init__(
            f"{identity} violated: expected {expected:.15g}, got {actual:.15g} "
            f"(|diff|={abs(expected - actual):.3e} > {tolerance:.1e})"
        )


class ExportError(EpigainError):
    """Writing an export to its destination failed."""

    def __init__(self, destination: Any, reason: str):
        self.destination = destination
        super().__init__(f"Cannot write {destination}: {reason}")


def describe(error: BaseException) -> Tuple[str, str]:
    """Return (error type, message) for a one-line CLI report."""
    return type(error).__name__, str(error)


def check_divergence(name: str, value: float, slack: float = 1e-9) -> float:
    """
    Clamp numerical jitter on a KL divergence.

    Values in (−slack, 0) become 0; anything lower raises.

    Raises:
        NegativeDivergenceError: If value < −slack
    """
    if value >= 0.0:
        return value
    if value < -slack:
        raise NegativeDivergenceError(name, value)
    return 0.0
