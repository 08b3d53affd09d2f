"""Exception types raised across the toolkit.

Every error that callers are expected to branch on gets its own class;
all of them derive from :class:`RingPairsError` so a bare pipeline can
catch one thing.
"""


class RingPairsError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(RingPairsError, ValueError):
    """Input data violates a documented invariant."""


class MalformedInputError(ValidationError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class DuplicateAbscissaError(ValidationError):
    """Two samples share the same wavelength."""


class ParameterError(RingPairsError, ValueError):
    """A function argument is outside its documented domain."""


class FitFailureError(RingPairsError):
    """Nonlinear fit did not converge; carries the last residual."""

    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class RejectedFitError(RingPairsError):
    """Fit converged to an unphysical parameter set."""


class InsufficientDataError(RingPairsError):
    """Too few samples / dips / modes for the requested operation."""


class PumpNotResonantError(RingPairsError):
    """No resonance dip within half a free spectral range of the pump."""


class AmbiguousLadderError(RingPairsError):
    """Two dips map to the same relative mode index."""

    def __init__(self, message, collisions=()):
        super().__init__(message)
        self.collisions = tuple(collisions)


class IllConditionedFitError(RingPairsError):
    """Dispersion design matrix is rank deficient or one-sided."""


class IncompleteLadderError(RingPairsError):
    """A required mode index is missing from the ladder."""


class IntegrationError(RingPairsError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved_tolerance=None):
        super().__init__(message)
        self.achieved_tolerance = achieved_tolerance


class DegenerateBudgetError(RingPairsError):
    """A loss budget with zero total efficiency cannot be inverted."""
