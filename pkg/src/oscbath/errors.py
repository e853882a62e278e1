"""Exception hierarchy shared by every oscbath module."""


class OscBathError(Exception):
    """Base class for all errors raised by oscbath."""


class ParameterError(OscBathError, ValueError):
    """Invalid physical or numerical input."""


class NonPositiveError(ParameterError):
    pass


class StrongCouplingError(ParameterError):
    """omega_bar**2 - pi**2 g**2 / 4 <= 0, outside the weak-coupling regime."""


class DomainError(ParameterError):
    pass


class IndexOutOfRangeError(ParameterError, IndexError):
    pass


class NumericalError(OscBathError, ArithmeticError):
    """A numerical procedure could not deliver its contract."""


class BracketFailure(NumericalError):
    pass


class DegenerateModeError(NumericalError):
    pass


class DegeneratePoleError(NumericalError):
    pass


class UnstableSystemError(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class NonFiniteIntegrand(NumericalError):
    pass


class PoleOnBoundary(ParameterError):
    pass


class ConfigError(OscBathError, ValueError):
    pass
