"""Exception taxonomy.

Two families: validation errors (bad inputs, unmet preconditions, budget
limits; raised before heavy computation starts) and numeric errors
(solver or quadrature failures discovered mid-computation).  The CLI maps
the first family to exit code 2 and the second to exit code 3.
"""


class ValidationError(ValueError):
    """Input rejected before any computation started."""


class DomainError(ValidationError):
    """Parameter outside the mathematical domain of the operation."""


class InputError(ValidationError):
    """Malformed or inconsistent data (grids, samples, state arrays)."""


class MissingInputError(ValidationError):
    """A required caller-supplied quantity was not provided."""


class ResourceLimitError(ValidationError):
    """Requested computation exceeds the configured enumeration budget."""


class NumericError(RuntimeError):
    """A solver or quadrature failed to reach its target accuracy."""


class TruncationError(NumericError):
    """A spectral sum needs levels beyond the computed truncation."""


class ConsistencyError(NumericError):
    """Two independent routes to the same quantity disagree."""

    def __init__(self, message, first=None, second=None):
        super().__init__(message)
        self.first = first
        self.second = second
