"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`BiconsError`.
Errors that concern a location on a patch carry it in ``point``.
"""


class BiconsError(Exception):
    def __init__(self, message="", point=None):
        super().__init__(message)
        self.point = point


# linear algebra / jets
class NullVector(BiconsError):
    pass


class SingularMetric(BiconsError):
    pass


class DivisionNearZero(BiconsError):
    pass


class DomainError(BiconsError):
    pass


class OrderOverflow(BiconsError):
    pass


# hypersurface / surface geometry
class DegenerateMetric(BiconsError):
    pass


class NullNormal(BiconsError):
    pass


class NonDiagonalizable(BiconsError):
    pass


class UmbilicPoint(BiconsError):
    pass


class DegenerateNormalPlane(BiconsError):
    pass


class GradTooSmall(BiconsError):
    pass


# catalog / profiles
class BadParams(BiconsError):
    pass


class NoConvergence(BiconsError):
    pass


class SingularEndpoint(BiconsError):
    pass


class GuardHit(BiconsError):
    def __init__(self, message="", s=None, guard=None):
        super().__init__(message, point=s)
        self.s = s
        self.guard = guard


class NoBracket(BiconsError):
    def __init__(self, message="", s=None):
        super().__init__(message, point=s)
        self.s = s


class IntervalMismatch(BiconsError):
    pass


class EmptyDomain(BiconsError):
    pass
