"""Exception hierarchy shared across the package.

Two families matter to callers: validation errors (bad arguments, bad
thresholds, malformed templates) and data errors (broken record files,
broken corpora). The CLI maps the former to exit code 1 and the latter,
which carry line numbers where applicable, to exit code 2.
"""

from __future__ import annotations


class ConceptAuditError(Exception):
    """Base class for every error raised by this package."""


# --- validation errors -------------------------------------------------------

class ValidationError(ConceptAuditError):
    """Bad arguments or parameters; nothing was read or written."""


class EmptyLabel(ValidationError):
    """A concept label normalized to the empty string."""


class BoxOutOfRange(ValidationError):
    """Bounding-box coordinates violate 0 <= x0 < x1 <= 1 (same for y)."""


class UnclosedPlaceholder(ValidationError):
    """A template opened a placeholder bracket that never closes."""


class EmptyPlaceholderName(ValidationError):
    """A template contains the placeholder '[]'."""


class InvalidPlaceholderName(ValidationError):
    """Placeholder name contains characters outside [a-z0-9_]."""


class EmptyValueSet(ValidationError):
    """A template placeholder has no values to expand."""


class NoPrompts(ValidationError):
    """A prompt distribution expands to nothing."""


class EmptyCorpus(ValidationError):
    """The operation needs at least one image."""


class EmptyPrompt(ValidationError):
    """The prompt exists but has no images."""


class UnknownPrompt(ValidationError):
    """prompt_id not present in the corpus."""


class UnknownConcept(ValidationError):
    """Concept label not present in any presence set of the corpus."""


class NotEnoughImages(ValidationError):
    """Corpus smaller than the requested subsample group size."""


class OverlappingSets(ValidationError):
    """Attenuate and amplify concept sets must be disjoint."""


class AliasCycle(ValidationError):
    """Alias map contains a chain (a -> b while b is itself aliased)."""


# --- data errors -------------------------------------------------------------

class DataError(ConceptAuditError):
    """Broken input data. Positioned subclasses carry a 1-based line number."""


class IoFailure(DataError):
    """Underlying file could not be read or written."""


class VersionMismatch(DataError):
    """Persisted file carries a schema version this reader does not accept."""


class MissingHeader(DataError):
    """Record stream does not start with a header line."""


class LineError(DataError):
    """A specific line of a record stream is invalid."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.reason = message


class MalformedLine(LineError):
    pass


class UnknownPromptId(LineError):
    pass


class DuplicateImageId(LineError):
    pass


class DuplicatePromptId(LineError):
    pass


class DuplicateSampleIndex(LineError):
    pass


class BoxOutOfRangeLine(LineError):
    """Positioned variant of BoxOutOfRange raised during ingest."""


class CorpusIntegrityError(DataError):
    """Corpus-level invariant violated at construction time."""
