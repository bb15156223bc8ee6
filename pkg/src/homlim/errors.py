"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point or region lies outside the map's domain."""


class InvalidAddressError(ValueError):
    """An address word contains a letter outside its construction's alphabet."""


class InfeasibleScheduleError(ValueError):
    """A parameter schedule violates one of the ordering constraints."""


class NotInitializedError(RuntimeError):
    """A stage map was used before its parameters were solved."""


class UnsupportedDimensionError(ValueError):
    """The requested dimension is outside the supported range for this operation."""


class IndeterminateDegreeError(RuntimeError):
    """The target point is too close to the image mesh to certify a degree."""
