"""Exception hierarchy shared by all quadromech modules."""


class QuadromechError(Exception):
    """Base class for every error raised by the library."""


class InvalidParams(QuadromechError, ValueError):
    """A physical parameter violates its domain (e.g. epsilon <= 0)."""


class NumericalError(QuadromechError, ArithmeticError):
    """Base class for failures of a numerical procedure."""


class NoConvergence(NumericalError):
    """An iterative solver exhausted its iteration budget."""


class DegenerateBranch(NumericalError):
    """The mechanical bracket vanishes, so Q_s is not pinned to zero."""


class SingularDenominator(NumericalError, ZeroDivisionError):
    """The atomic response denominator (gamma/2 + i Delta_e) is zero with g > 0."""


class StepUnderflow(NumericalError):
    """The adaptive integrator shrank the step below machine resolution."""
