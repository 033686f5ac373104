"""Exception hierarchy shared across the package."""


class WefeError(Exception):
    """Base class for all errors raised by this package."""


class JetError(WefeError):
    """Invalid jet construction or mixing of incompatible jets."""


class JetDomainError(JetError):
    """A univariate function was evaluated outside its domain (log of a
    non-positive value, division by a jet with zero value part, tan too
    close to a pole, ...).  Signals that a sample point left the validity
    region of the expression being evaluated."""


class ExprError(WefeError):
    """Error while parsing or validating an expression string."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class DomainConstraintError(WefeError):
    """A sample point violates the chart's domain constraints."""


class SingularMetricError(WefeError):
    """The metric value matrix is singular or too ill-conditioned to invert."""


class SignatureError(WefeError):
    """An eigenvalue is too close to zero for a reliable signature count."""


class FamilyError(WefeError):
    """Unknown family id or parameters violating the family schema."""


class FamilyPreconditionError(FamilyError):
    """Parameters are schema-valid but break a mathematical precondition of
    the family (e.g. a required second derivative vanishes on the box)."""


class SamplingError(WefeError):
    """Rejection sampling exceeded its attempt cap."""


class ConfigError(WefeError):
    """Malformed metric/density config file."""
