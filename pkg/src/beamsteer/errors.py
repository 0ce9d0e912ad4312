"""Exception hierarchy shared by every module."""


class BeamsteerError(Exception):
    """Base class. ``tag`` is the short name written into traces."""

    @property
    def tag(self) -> str:
        return type(self).__name__


class ZeroBaseline(BeamsteerError):
    pass


class RankDeficient(BeamsteerError):
    pass


class BehindCamera(BeamsteerError):
    pass


class Degenerate(BeamsteerError):
    pass


class NoHit(BeamsteerError):
    pass


class JointLimit(BeamsteerError):
    pass


class ZeroVector(BeamsteerError):
    pass


class BaselineSingularity(BeamsteerError):
    pass


class TooFewPoints(BeamsteerError):
    pass


class DuplicatePoints(BeamsteerError):
    pass


class EmptyWindow(BeamsteerError):
    pass


class SingularTube(BeamsteerError):
    pass


class OutOfDomain(BeamsteerError):
    pass


class ZeroVelocity(BeamsteerError):
    pass


class InsufficientData(BeamsteerError):
    pass


class ParseError(BeamsteerError):
    def __init__(self, message, line=None, column=None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ValidationError(BeamsteerError):
    def __init__(self, field, message=""):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field
