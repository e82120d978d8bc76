"""Exception hierarchy shared across the package."""


class InsurelabError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(InsurelabError, ValueError):
    """An argument violates a documented precondition."""


class InvalidMenuError(InsurelabError, ValueError):
    """A contract menu violates the revealed-preference ordering."""


class NumericFailure(InsurelabError, RuntimeError):
    """A numerical routine failed to reach its target tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class InsufficientDataError(InsurelabError, ValueError):
    """Too few observations to carry out the requested estimate."""


class DegenerateRegionError(InsurelabError, ValueError):
    """The support segment an estimator needs has zero or negative length."""


class DegenerateInstrumentError(InsurelabError, RuntimeError):
    """The instrument does not move the frontier enough for differentiation."""


class StudyError(InsurelabError, RuntimeError):
    """Too many replications of a Monte Carlo study failed."""


class ParseError(InsurelabError, ValueError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class InconsistencyWarning(UserWarning):
    """An identity that should hold approximately was violated noticeably."""
