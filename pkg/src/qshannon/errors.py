"""Exception types raised across the package."""


class QShannonError(ValueError):
    """Base class for all errors raised by qshannon."""


class NonHermitian(QShannonError):
    pass


class DomainError(QShannonError):
    pass


class DimMismatch(QShannonError):
    pass


class NotPSD(QShannonError):
    pass


class NotPure(QShannonError):
    pass


class NotState(QShannonError):
    pass


class BadShape(QShannonError):
    pass


class OperatorOutOfRange(QShannonError):
    """An operator was expected to satisfy 0 <= X <= 1."""


class LambdaViolated(QShannonError):
    """The error parameter does not dominate 1 - Tr(rho X)."""


class OverlappingSets(QShannonError):
    pass


class SizeMismatch(QShannonError):
    pass


class ThetaOutOfRange(QShannonError):
    pass


class FlagMissing(QShannonError):
    """A factor used as a classical register is not flagged classical."""


class EmptyProjector(QShannonError):
    pass


class ScaleError(QShannonError):
    """Neither the symbolic nor the dense evaluation path applies."""


class InfeasibleScale(QShannonError):
    """A dense computation would exceed the configured dimension guard."""


class TooLarge(InfeasibleScale):
    pass


class NoConvergence(QShannonError):
    pass


class ConfigError(QShannonError):
    pass


class InvariantViolation(QShannonError):
    """A checked theorem-level inequality failed on a concrete instance."""
