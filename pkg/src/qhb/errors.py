"""Exception types shared by all qhb modules."""


class QhbError(Exception):
    """Base class for all qhb errors."""


class DimensionMismatch(QhbError):
    """Operands live in different quaternionic dimensions."""


class DivisionByZero(QhbError):
    """Quaternion inverse of a (numerically) zero quaternion."""


class NotInBall(QhbError):
    """A point violates the unit-ball precondition of an operation."""


class Singular(QhbError):
    """A projective denominator vanished; cannot happen for interior points."""


class DegenerateGeodesic(QhbError):
    """No unique geodesic: the two endpoints coincide."""


class InvalidProfile(QhbError):
    """Convexity profile violates 0 <= |a| <= r < 1."""


class EmptyData(QhbError):
    """A weighted point set with no points."""


class EmptyRegion(QhbError):
    """Region sampling accepted no points."""
