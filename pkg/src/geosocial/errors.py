"""Exception hierarchy shared by every geosocial module."""

from __future__ import annotations


class GeosocialError(Exception):
    """Base class for all errors raised by this package."""


# graph construction / lookup
class DuplicateNode(GeosocialError, ValueError):
    pass


class InvalidCoordinate(GeosocialError, ValueError):
    pass


class SelfLoop(GeosocialError, ValueError):
    pass


class UnknownNode(GeosocialError, LookupError):
    pass


class WeightOutOfRange(GeosocialError, ValueError):
    pass


class KindMismatch(GeosocialError, ValueError):
    pass


class NotAServiceProvider(GeosocialError, ValueError):
    pass


# snapshot / model files
class UnsupportedSnapshotVersion(GeosocialError, ValueError):
    pass


class CorruptSnapshot(GeosocialError, ValueError):
    pass


# ingest
class ParseError(GeosocialError, ValueError):
    """A JSON-lines record could not be parsed; ``line`` is 1-based."""

    def __init__(self, line: int, reason: str, source: str | None = None):
        self.line = line
        self.reason = reason
        self.source = source
        where = f"{source}:{line}" if source else f"line {line}"
        super().__init__(f"{where}: {reason}")


class StarsOutOfRange(GeosocialError, ValueError):
    pass


class DanglingReference(GeosocialError, LookupError):
    pass


# queries
class OriginNotUser(GeosocialError, ValueError):
    pass


class EmptyKeywords(GeosocialError, ValueError):
    pass


# constant optimizer
class EmptyInput(GeosocialError, ValueError):
    pass


class InvalidStats(GeosocialError, ValueError):
    pass


class RatingOutOfRange(GeosocialError, ValueError):
    pass


# rank classifier
class EmptyQueryKeywords(GeosocialError, ValueError):
    pass


class NoReviews(GeosocialError, ValueError):
    pass


class TooFewExamples(GeosocialError, ValueError):
    pass


class InvalidRatio(GeosocialError, ValueError):
    pass


class LabelOutOfRange(GeosocialError, ValueError):
    pass


class EmptyModel(GeosocialError, ValueError):
    pass


class EmptyTestSet(GeosocialError, ValueError):
    pass
