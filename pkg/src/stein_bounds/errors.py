"""Exception hierarchy.

Every numeric failure derives from :class:`NumericalError` so the CLI can map
it to exit code 2; caller mistakes derive from :class:`InvalidInput` (exit 1).
"""


class SteinBoundsError(Exception):
    pass


class InvalidInput(SteinBoundsError, ValueError):
    pass


class InvalidParams(InvalidInput):
    pass


class OutOfRange(InvalidInput):
    pass


class InvalidData(InvalidInput):
    pass


class SupportNotNested(InvalidInput):
    pass


class NotMonotone(InvalidInput):
    pass


class NumericalError(SteinBoundsError, ArithmeticError):
    pass


class NonIntegrable(NumericalError):
    pass


class NaNDensity(NumericalError):
    pass


class QuadratureDivergent(NumericalError):
    pass


class NonConvergent(NumericalError):
    pass


class KernelUnstable(NumericalError):
    pass


class KernelZero(NumericalError):
    pass


class ImproperPosterior(NumericalError):
    pass


class MeanUnattainable(NumericalError):
    pass


class MgfDivergent(NumericalError):
    pass


class UnboundedDerivative(NumericalError):
    pass


class NonIntegrableTestFunction(NumericalError):
    pass
