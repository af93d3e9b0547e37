"""Exception hierarchy shared by every tvball module."""


class TVBallError(Exception):
    """Base class for all library errors."""


class NonPositiveRadius(TVBallError, ValueError):
    pass


class NegativeGap(TVBallError, ValueError):
    pass


class MalformedBoundary(TVBallError, ValueError):
    pass


class EmptyRegion(TVBallError, ValueError):
    pass


class EmptyCandidateList(TVBallError, ValueError):
    pass


class NotInteracting(TVBallError, ValueError):
    pass


class ConfigInteracting(TVBallError, ValueError):
    pass


class CaseNotApplicable(TVBallError, ValueError):
    pass


class DomainError(TVBallError, ValueError):
    pass


class InvalidLevel(TVBallError, ValueError):
    pass


class OutOfRegime(TVBallError, ValueError):
    pass


class RootNotBracketed(TVBallError, RuntimeError):
    """Raised when a sign change cannot be located; ``scan`` holds the samples."""

    def __init__(self, message, scan=None):
        super().__init__(message)
        self.scan = scan


class NoConvergence(TVBallError, RuntimeError):
    pass


class BoxTooSmall(TVBallError, ValueError):
    pass


class StructuringElementTooSmall(TVBallError, ValueError):
    pass


class GridMismatch(TVBallError, ValueError):
    pass


class ConfigParseError(TVBallError, ValueError):
    pass
