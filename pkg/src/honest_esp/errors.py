"""Exception taxonomy.

Two families: ValidationError for structurally invalid input or requests
(CLI exit code 2, HTTP 400) and NumericalError for data-driven numerical
failure during estimation or inference (CLI exit code 3, HTTP 422).
"""


class HonestEspError(Exception):
    """Base class for all package errors."""


class ValidationError(HonestEspError):
    """Input or request is structurally invalid."""


class NumericalError(HonestEspError):
    """Computation failed for numerical, data-driven reasons."""


# ---------------------------------------------------------------- panel


class UnbalancedPanel(ValidationError):
    """Some unit is missing one or more periods."""


class TimeVaryingTreatment(ValidationError):
    """Treatment indicator changes over time within a unit."""


class TimeVaryingCovariate(ValidationError):
    """A covariate column changes over time within a unit."""


class MissingReferencePeriod(ValidationError):
    """Event time 0 is absent from the panel."""


class NonBinaryTreatment(ValidationError):
    """Treatment column contains values other than 0 and 1."""


class DuplicateCell(ValidationError):
    """The same (unit, time) pair appears more than once."""


# ------------------------------------------------------------- estimate


class NoTreatmentVariation(NumericalError):
    """All units share one treatment status; the contrast is undefined."""


class SingularDesign(NumericalError):
    """The stacked regression design is rank deficient."""


class RankDeficientCovariates(NumericalError):
    """Demeaned covariate matrix is not full column rank."""


class ZeroResidualTreatment(NumericalError):
    """Covariates explain the treatment exactly; no residual variation."""


class NoNeverTreated(ValidationError):
    """Staggered design without a never-treated control group."""


class EmptyCommonWindow(ValidationError):
    """Group event windows have no usable common intersection."""


class EmptyGroup(ValidationError):
    """A treatment group in the design has no units."""


# --------------------------------------------------------------- spline


class TooFewKnots(ValidationError):
    """Fewer than two knots supplied."""


class NonMonotoneKnots(ValidationError):
    """Knots are not strictly increasing."""


class OutOfDomain(ValidationError):
    """Evaluation point lies outside the fitted domain."""


class DimensionMismatch(ValidationError):
    """Array shapes are inconsistent."""


class DegenerateVariance(NumericalError):
    """Variance at the requested point is numerically zero."""


# ---------------------------------------------------------------- bands


class NonPSDCovariance(NumericalError):
    """Covariance matrix is too far from positive semidefinite."""


class DegenerateGrid(NumericalError):
    """No usable evaluation points remain on the grid."""


class NoRoot(NumericalError):
    """Root finding failed to bracket a solution."""


class InfSideUnsupported(ValidationError):
    """The requested method only supports the supremum side."""


# --------------------------------------------------------------- honest


class GridMismatch(ValidationError):
    """Band grids or domains do not line up."""


class EmptyPreAnticipationWindow(ValidationError):
    """No grid points at or before the anticipation time."""


class EmptyList(ValidationError):
    """A union reference band needs at least one member."""


# ------------------------------------------------------------------ sim


class NonPSDKernel(NumericalError):
    """Kernel matrix is not positive semidefinite even after jitter."""


class DegenerateDraw(NumericalError):
    """Simulated treatment assignment kept producing a one-sided split."""
