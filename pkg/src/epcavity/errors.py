"""Exception types raised by epcavity."""

from __future__ import annotations


class DomainError(ValueError):
    """An input lies outside the domain of the operation."""


class InfeasibleCoupling(DomainError):
    """g_2 is below the minimum coupling that admits a real detuning.

    ``deficit`` is ``g2_min - g_2`` (positive).
    """

    def __init__(self, g_2: float, g2_min: float):
        self.g_2 = g_2
        self.g2_min = g2_min
        self.deficit = g2_min - g_2
        super().__init__(
            f"g_2={g_2!r} is below the minimum coupling {g2_min!r} "
            f"(deficit {self.deficit:.6g})"
        )


class ConstraintViolation(DomainError):
    """The mirror/loss split does not reproduce the required effective gain."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(message)


class ClassificationError(ValueError):
    """A spectrum has no consistent pseudo-Hermitian phase label."""


class PoleError(ZeroDivisionError):
    """A self-energy denominator vanished exactly."""


class NotConverged(RuntimeError):
    def __init__(self, message: str, drift: float):
        self.drift = drift
        super().__init__(message)


class StabilityError(RuntimeError):
    pass
