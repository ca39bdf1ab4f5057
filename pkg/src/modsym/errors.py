"""Exception hierarchy shared by every module of the package."""


class ModsymError(Exception):
    """Base class for all errors raised by modsym."""


# field arithmetic
class FieldError(ModsymError):
    pass


class NotMonic(FieldError):
    pass


class NotClosed(FieldError):
    pass


class SingularBasis(FieldError):
    pass


class NonSquarefreePoly(FieldError):
    pass


class ReduciblePoly(FieldError):
    pass


class DimensionMismatch(ModsymError, ValueError):
    pass


class PrecisionUnavailable(ModsymError):
    pass


# linear algebra
class NotSquare(ModsymError, ValueError):
    pass


class SingularMatrix(ModsymError, ZeroDivisionError):
    pass


class DependentBasis(ModsymError):
    pass


class RadiusOverflow(ModsymError):
    pass


# geometry
class BadSignature(ModsymError, ValueError):
    pass


class FloorUndecidable(ModsymError):
    pass


class PointOffSurface(ModsymError, ValueError):
    pass


# pivot search and reduction
class NotFound(ModsymError):
    pass


class NodeBudgetExceeded(ModsymError):
    pass


class BoxTooLarge(ModsymError):
    pass


class InvalidPivot(ModsymError):
    pass


class ZeroColumn(ModsymError, ValueError):
    pass


class BoundTooSmall(ModsymError):
    pass


class CapExceeded(ModsymError):
    pass


# certificates
class ParseError(ModsymError):
    pass


class FieldMismatch(ModsymError):
    pass


class SupportTooLarge(ModsymError):
    pass
