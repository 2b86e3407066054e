"""Exception hierarchy shared across the package.

Every error raised by library code derives from :class:`HatescopeError`
so callers (and the CLI) can catch one base class and still match the
specific failure they care about.
"""


class HatescopeError(Exception):
    """Base class for all errors raised by this package."""


# -- label algebra ---------------------------------------------------------

class UnknownTarget(HatescopeError):
    """A target slug that no canonical target or alias resolves."""

    def __init__(self, slug: str):
        super().__init__(f"unknown target slug: {slug!r}")
        self.slug = slug


class InvalidLevel(HatescopeError):
    """A hatred-level value outside the allowed set for its context."""


class ConflictingTerm(HatescopeError):
    """The same target listed twice with different levels."""


# -- dataset I/O -----------------------------------------------------------

class SchemaError(HatescopeError):
    """A dataset file does not match the expected column layout or content."""


class IoError(HatescopeError):
    """A file could not be read or written."""


class ParseError(HatescopeError):
    """A structured-text record could not be parsed."""


# -- agreement / annotation ------------------------------------------------

class LengthMismatch(HatescopeError):
    """Two rating sequences that must align have different lengths."""


class EmptyInput(HatescopeError):
    """An operation that needs at least one element received none."""


class RaggedCounts(HatescopeError):
    """Per-item rater counts differ where a constant count is required."""


class GateIndeterminate(HatescopeError):
    """No agreement statistic could be computed for a round gate."""


class RoundStateError(HatescopeError):
    """An operation is not allowed in the round's current status."""


# -- classifier ------------------------------------------------------------

class DimensionError(HatescopeError):
    """A feature vector's dimension does not match the model's."""


class DivergenceError(HatescopeError):
    """Training produced a non-finite loss."""

    def __init__(self, step: int, detail: str = ""):
        msg = f"non-finite loss at training step {step}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.step = step


class RemoteTimeout(HatescopeError):
    """A remote inference call did not answer within its deadline."""


class ProtocolError(HatescopeError):
    """A remote inference response violates the wire contract."""


class ModelFormatError(HatescopeError):
    """A model file failed validation on load."""


# -- metrics ---------------------------------------------------------------

class AlignmentError(HatescopeError):
    """Prediction and gold sequences could not be aligned by comment id."""


# -- streaming -------------------------------------------------------------

class TopicExists(HatescopeError):
    """A topic with this name already exists."""


class UnknownTopic(HatescopeError):
    """No topic with this name exists."""


class UnknownGroup(HatescopeError):
    """A consumer group was used before being subscribed to the topic."""


class InvalidCommit(HatescopeError):
    """An offset was committed that was never delivered to the group."""


class SinkError(HatescopeError):
    """A sink write failed; the message will be redelivered."""
