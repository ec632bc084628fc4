"""Exception hierarchy shared by every linska module."""


class LinskaError(Exception):
    """Base class for all errors raised by linska."""


class DimensionMismatch(LinskaError, ValueError):
    """Matrix shapes or fields are incompatible for the requested operation."""


class ParseError(LinskaError, ValueError):
    """A source or scheme document is malformed."""


class ValidationError(LinskaError, ValueError):
    """A document parsed but violates a model invariant."""


class SearchBudgetExceeded(LinskaError):
    """An exhaustive search would exceed its configured cap.

    ``best`` carries the best bound found so far (or ``None``), so callers can
    still emit a partial, flagged-incomplete result.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EnumerationCapExceeded(LinskaError):
    """An exhaustive enumeration is larger than the configured cap."""


class InternalInconsistency(LinskaError, AssertionError):
    """Two routes to the same quantity disagree; indicates a bug."""


class SynthesisFailed(InternalInconsistency):
    """No omniscience scheme was found at a rate vector that must admit one."""


class RateVectorInfeasible(LinskaError, ValueError):
    """A rate vector lies outside the omniscience rate region."""


class NotOmniscient(LinskaError, ValueError):
    """A discussion does not give every user the whole source."""


class NoWitness(LinskaError, ValueError):
    """The chosen user already attains omniscience, so no reduction step exists."""
