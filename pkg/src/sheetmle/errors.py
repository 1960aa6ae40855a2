"""Exception hierarchy shared across the package."""


class SheetMLEError(Exception):
    """Base class for all package-specific errors."""


class DomainValidationError(SheetMLEError):
    """A domain specification violates one of its structural invariants."""


class MonotonicityViolation(DomainValidationError):
    """A boundary curve is not strictly monotone in its declared direction."""


class EndpointMismatch(DomainValidationError):
    """Adjacent boundary curves do not meet at their shared breakpoint."""


class NonPositiveOrdinate(DomainValidationError):
    """The domain leaves the open positive quadrant."""


class StripOverlap(DomainValidationError):
    """Inner boundary strips of opposite arcs intersect (domain too thin)."""


class CircleNotInPositiveQuadrant(DomainValidationError):
    """A circular domain would touch or cross a coordinate axis."""


class OutOfRectangle(SheetMLEError):
    """A field was evaluated outside its simulation rectangle."""


class WrongModelVariant(SheetMLEError):
    """A field evaluator was called with a model of the wrong kind."""


class NonPositiveCoordinate(SheetMLEError):
    """A transformed regressor was evaluated outside its coordinate range."""


class SingularMatrix(SheetMLEError):
    """The information matrix is not positive definite (regressors are
    linearly dependent on the observation domain)."""
