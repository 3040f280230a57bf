"""Exception hierarchy for mortau."""


class MortauError(Exception):
    """Base class for all mortau errors."""


class DimensionMismatch(MortauError, ValueError):
    """Matrix or vector dimensions are inconsistent."""


class SingularShift(MortauError):
    """A shifted operator sigma*I - A is numerically singular.

    Signals that the shift coincides with (or is extremely close to) a
    point of the spectrum of A.
    """


class OverflowRisk(MortauError):
    """A matrix exponential would overflow double precision.

    Callers hitting this on a product form e^{-sigma*tau} * e^{A*tau}
    should evaluate the combined exponential e^{(A - sigma*I)*tau}
    instead; see `mortau.linalg`.
    """


class NonDiagonalizable(MortauError):
    """Eigenvector matrix is too ill conditioned to trust the spectral form."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class DegenerateShift(MortauError):
    """A closed-form expression is singular for this shift (e.g. Re(mu) = 0)."""


class InvalidInterpolationData(MortauError, ValueError):
    """Interpolation data violates closure or distinctness requirements."""


class RankCollapse(MortauError):
    """A projection basis lost numerical rank after realification."""

    def __init__(self, message, retained_rank=None):
        super().__init__(message)
        self.retained_rank = retained_rank


class IllConditionedProjection(MortauError):
    """The oblique projection W^T V is too ill conditioned to invert."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SylvesterFailure(MortauError):
    """A time-limited Sylvester solve failed or left a large residual."""


class NoConvergence(MortauError):
    """An iteration hit its iteration cap before meeting the tolerance.

    Attributes
    ----------
    trace : IterationTrace
        Per-iteration records up to the cap.
    best_model : ReducedModel or None
        Iterate with the smallest shift-change metric seen so far.
    """

    def __init__(self, message, trace=None, best_model=None):
        super().__init__(message)
        self.trace = trace
        self.best_model = best_model


class ParseError(MortauError):
    """A model file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        super().__init__(message)
        self.path = path
        self.line = line


class BenchmarkUnavailable(MortauError):
    """A named benchmark model's data files are not present."""
