"""Exception hierarchy shared by the package."""


class TwoCompError(Exception):
    """Base class for all errors raised by twocomp."""


class ConfigurationError(TwoCompError, ValueError):
    """Invalid grid, solver or run configuration."""


class UsageError(TwoCompError, ValueError):
    """Operands that cannot be combined (e.g. fields on different grids)."""


class InvalidParameterError(TwoCompError, ValueError):
    """Exact-solution parameters that violate their constraints."""


class DomainViolationError(TwoCompError, ValueError):
    """A traveling wave or test function too close to the periodic seam."""


class HypothesisNotMetError(TwoCompError, ValueError):
    """Inputs outside the hypotheses of the blow-up predictor."""


class NumericFailure(TwoCompError, ArithmeticError):
    """Non-finite values produced during a computation."""


class OutOfBandError(TwoCompError, IndexError):
    """Dyadic index outside the range representable on the grid."""
