"""Errors raised by the spectral-pair services.

Failed verdicts (a non-unitary matrix, a Parseval sum far from 1, ...) are
reported as data. Exceptions are reserved for inputs the services cannot
work with at all.
"""


class SpectralError(Exception):
    """Base class for every error raised by the IFS app."""


class ValidationError(SpectralError, ValueError):
    """A problem or argument violates a standing assumption."""


class ParseError(SpectralError):
    """A problem file could not be read as structured text."""


class DimensionMismatch(ValidationError):
    pass


class NotExpanding(ValidationError):
    pass


class NonUnimodular(ValidationError):
    pass


class RankDeficient(SpectralError):
    def __init__(self, rank: int, dim: int):
        self.rank = rank
        self.dim = dim
        super().__init__(f"digits span a rank-{rank} lattice in dimension {dim}; the dual is not a lattice")


class BudgetExceeded(SpectralError):
    def __init__(self, what: str, requested: int, budget: int):
        self.requested = requested
        self.budget = budget
        super().__init__(f"{what}: {requested} exceeds the configured budget {budget}")


class NotWbCycle(SpectralError):
    pass


class NotInvariant(SpectralError):
    pass


class NoFixedDigit(SpectralError):
    pass


class ConditionsNotMet(SpectralError):
    pass


class UnequalFibers(SpectralError):
    pass


class DegenerateWeights(SpectralError):
    pass


class Inconclusive(SpectralError):
    pass
