"""Exception types raised across the package.

The CLI maps these onto process exit codes: configuration problems
(ParseError, ValidationError and subclasses) exit 2, numerical failures
(NumericalError and subclasses, grid misuse) exit 3, and reciprocity
failures exit 4.
"""


class ContagionError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ContagionError):
    """A model environment or scenario config failed validation."""


class NonPositiveWeight(ValidationError):
    pass


class WeightsDoNotSumToOne(ValidationError):
    pass


class NegativeParameter(ValidationError):
    pass


class NonFiniteParameter(ValidationError):
    pass


class DuplicateClassConflict(ValidationError):
    """Two classes share (alpha, beta, gamma) but disagree on exposure."""


class ReciprocityError(ContagionError):
    """Base for failures of the proportional-sensitivity structure."""


class ReciprocityViolated(ReciprocityError):
    def __init__(self, max_residual: float):
        self.max_residual = max_residual
        super().__init__(
            f"beta is not proportional to alpha (max residual {max_residual:g})"
        )


class AllAlphasZero(ReciprocityError):
    pass


class ReciprocityRequired(ReciprocityError):
    """A variance computation was requested without a certificate."""


class NumericalError(ContagionError):
    """Base for solver accuracy failures."""


class StepTooCoarse(NumericalError):
    """Halving the step moved the endpoint by more than the tolerance."""


class ClampExceeded(NumericalError):
    """The solution left [0, 1] by more than the tolerance."""


class GridOutOfRange(ContagionError):
    """An evaluation grid reaches outside the simulated horizon."""


class DimensionMismatch(ContagionError):
    """A solution and an environment disagree on the number of classes."""


class NotAGridPoint(ContagionError):
    """A requested time does not lie on the solution grid."""


class ParseError(ContagionError):
    """A scenario config document could not be parsed."""
