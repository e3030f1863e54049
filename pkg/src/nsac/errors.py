"""Exception hierarchy shared by all nsac modules."""


class NSACError(Exception):
    """Base class for every error raised by the package."""


class DomainError(NSACError, ValueError):
    """Argument outside the admissible physical range (e.g. rho <= 0)."""


class ParameterError(NSACError, ValueError):
    """Invalid numerical parameter (step size, quadrature size, ...)."""


class ShapeError(NSACError, ValueError):
    """Field array does not match its grid."""


class UnsupportedError(NSACError):
    """Operation not available for the requested model kind."""


class VacuumError(DomainError):
    pass


class NegativeTemperatureError(DomainError):
    pass


class PreconditionError(NSACError):
    pass


class InvariantViolation(NSACError):
    """A state field left its admissible range after a step."""

    def __init__(self, field, cell, value, message=None):
        self.field = field
        self.cell = cell
        self.value = value
        super().__init__(message or f"field '{field}' violates invariant at cell {cell}: value {value!r}")


class SimulationError(NSACError):
    """Step failure annotated with the simulation time."""

    def __init__(self, t, cause):
        self.t = t
        self.cause = cause
        super().__init__(f"t={t:.6g}: {cause}")


class NoInterfaceError(NSACError):
    pass


class DegenerateGradientError(NSACError):
    pass


class DisplacementTooLargeError(NSACError):
    pass


class OutOfBandError(NSACError):
    pass


class EmptyMaskError(NSACError):
    pass


class BubbleVanishedError(NSACError):
    pass


class ConfigError(NSACError, ValueError):
    pass


class SnapshotError(NSACError, IOError):
    pass


class MagicMismatchError(SnapshotError):
    pass


class TruncationError(SnapshotError):
    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or f"snapshot truncated while reading field '{field}'")
