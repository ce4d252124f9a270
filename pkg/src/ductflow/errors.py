"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """A documented precondition does not hold; ``witness`` locates the violation."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConfigError(ValueError):
    """A run configuration is malformed or physically inadmissible."""


class SolverAbort(RuntimeError):
    """The time integrator stopped early.

    ``last_snapshot`` is the last state that passed every check, ``location``
    is the offending position (if any).
    """

    def __init__(self, message, last_snapshot=None, location=None):
        super().__init__(message)
        self.last_snapshot = last_snapshot
        self.location = location
