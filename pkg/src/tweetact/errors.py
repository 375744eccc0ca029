"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class TweetActError(Exception):
    """Base class for all toolkit errors."""


class DuplicateId(TweetActError):
    """Two records share an id that must be unique."""


class UnknownLabel(TweetActError):
    """A label string is not part of the active taxonomy / merge map."""


class MissingVotes(TweetActError):
    """A record does not carry exactly three annotator votes."""


class EmptyClassError(TweetActError):
    """An operation needs source items for a class that has none."""


class EmptyClassWarning(UserWarning):
    """A taxonomy class has zero items and is skipped."""


class RowNotNormalized(TweetActError):
    """A probability row does not sum to 1 within tolerance."""


class ClassOrderMismatch(TweetActError):
    """Class names or their order disagree with the taxonomy."""


class IdMismatch(TweetActError):
    """Id-aligned inputs disagree on ids or their order."""


class WeightCountMismatch(TweetActError):
    """Number of ensemble weights differs from number of matrices."""


class EmptyRow(TweetActError):
    """A probability row has zero columns."""


class LengthMismatch(TweetActError):
    """Paired sequences differ in length."""


class EmptyMatrix(TweetActError):
    """A confusion matrix holds no observations."""


class SingularSystem(TweetActError):
    """The surrogate design matrix is rank-deficient and lambda is 0."""


class TooShort(TweetActError):
    """Text normalizes to zero words; nothing to explain."""


class BackendFailure(TweetActError):
    """A classifier backend call failed while explaining."""


class BackendUnavailable(TweetActError):
    """A backend cannot be reached or keeps failing after retries."""


class MissingRow(TweetActError):
    """The file backend has no probability row for a requested id."""


class MalformedResponse(TweetActError):
    """A backend response violates the wire protocol."""


class InserterFailure(TweetActError):
    """The word inserter failed for a source tweet."""

    def __init__(self, source_id: str, cause: Exception):
        super().__init__(f"inserter failed for source {source_id!r}: {cause}")
        self.source_id = source_id
        self.cause = cause


class MalformedReport(TweetActError):
    """A metrics report misses required sections."""


class StageError(TweetActError):
    """A pipeline stage failed; earlier stage artifacts stay intact."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
