"""Exception hierarchy shared by every module in the package."""


class HpqfimError(Exception):
    """Base class for all package errors."""


class DimMismatch(HpqfimError, ValueError):
    pass


class NotSymmetric(HpqfimError, ValueError):
    pass


class SingularBlock(HpqfimError, ArithmeticError):
    """An information block that must be inverted is (numerically) singular."""

    def __init__(self, message, min_eig=None):
        super().__init__(message)
        self.min_eig = min_eig


class NonPhysical(HpqfimError, ValueError):
    """Bloch vector outside the unit ball, or an invalid POVM."""


class PureStateBoundary(HpqfimError, ArithmeticError):
    """The 1/(1-|s|^2) term of the SLD metric diverges."""


class DomainViolation(HpqfimError, ValueError):
    pass


class QuadratureDivergence(HpqfimError, ArithmeticError):
    pass


class ZeroProbabilityOutcome(HpqfimError, ArithmeticError):
    pass


class ConfigError(HpqfimError, ValueError):
    pass


class NumericalError(HpqfimError, ArithmeticError):
    """Wraps a numerical failure with the grid point where it happened."""

    def __init__(self, message, theta_I=None):
        super().__init__(message)
        self.theta_I = theta_I
