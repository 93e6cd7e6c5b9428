"""Exception types shared across the solver modules."""


class ConvergenceError(RuntimeError):
    """A Newton refinement or continuation step failed to converge.

    Carries the last iterate so callers can diagnose the failure.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class PairingError(RuntimeError):
    """Eigenvalues of the dynamical matrix could not be matched into +/- pairs.

    Signals an invalid stationary point or a numerical breakdown.
    """


class WindingUndefinedError(ValueError):
    """A spin vector is too short for its angle to be meaningful."""


class AmbiguousWindingError(ValueError):
    """Two neighboring spin vectors are antipodal, so the angle step
    between them is exactly pi and the winding direction is undefined."""


class InsufficientPointsError(ValueError):
    """A power-law fit was requested on fewer valid points than required."""


class SingularDenominatorError(ZeroDivisionError):
    """A closed-form expression hit a vanishing denominator."""
