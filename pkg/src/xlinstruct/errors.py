"""Exception hierarchy shared across the toolkit.

Every error raised by this package derives from :class:`XlinstructError`, so
callers can distinguish pipeline failures from programming errors with a
single except clause. Exceptions carry their diagnostic fields as attributes
in addition to the formatted message.
"""

from __future__ import annotations


class XlinstructError(Exception):
    """Base class for all errors raised by xlinstruct."""


class MalformedRecord(XlinstructError):
    """A corpus line could not be parsed into a valid record."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class DuplicateId(XlinstructError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"duplicate sample id: {sample_id!r}")


class InsufficientSamples(XlinstructError):
    """A category has fewer samples than the stratified draw requires."""

    def __init__(self, category: str, have: int, need: int):
        self.category = category
        self.have = have
        self.need = need
        super().__init__(f"category {category}: have {have} samples, need {need}")


class InvalidPattern(XlinstructError):
    def __init__(self, index: int | None, reason: str):
        self.index = index
        self.reason = reason
        where = "rule table" if index is None else f"rule {index}"
        super().__init__(f"{where}: {reason}")


class BoundaryOutOfRange(XlinstructError):
    def __init__(self, count: int, length: int):
        self.count = count
        self.length = length
        super().__init__(f"segment boundary {count} outside [0, {length}]")


class EmptyLanguage(XlinstructError):
    def __init__(self, which: str = "language"):
        self.which = which
        super().__init__(f"{which} name must be non-empty")


class EmptyInput(XlinstructError):
    def __init__(self, what: str = "input"):
        self.what = what
        super().__init__(f"{what} must be non-empty")


class EmptySample(XlinstructError):
    def __init__(self, sample_id: str, field: str):
        self.sample_id = sample_id
        self.field = field
        super().__init__(f"sample {sample_id!r}: {field} is empty")


class NotAFunctionCall(XlinstructError):
    """The backend answered in plain text instead of calling the function."""

    def __init__(self, preview: str = ""):
        self.preview = preview
        detail = f": {preview[:80]!r}" if preview else ""
        super().__init__(f"backend returned plain text instead of a function call{detail}")


class MalformedArguments(XlinstructError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"malformed function-call arguments: {reason}")


class LengthMismatch(XlinstructError):
    """The translated array has a different length than the input array."""

    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected} translated segments, got {got}")


class ScoreNotFound(XlinstructError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"no number found after label {label!r}")


class MissingCategory(XlinstructError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"no category known for sample {sample_id!r}")


class EmptyCorpus(XlinstructError):
    def __init__(self, what: str = "corpus"):
        self.what = what
        super().__init__(f"{what} is empty")


class ValidationFailed(XlinstructError):
    def __init__(self, sample_id: str, reason: str):
        self.sample_id = sample_id
        self.reason = reason
        super().__init__(f"sample {sample_id!r} failed validation: {reason}")


class BackendError(XlinstructError):
    """Transport- or protocol-level failure while talking to a chat backend."""

    def __init__(self, detail: str, status: int | None = None):
        self.detail = detail
        self.status = status
        prefix = f"HTTP {status}: " if status is not None else ""
        super().__init__(f"{prefix}{detail}")


class ContextLengthExceeded(XlinstructError):
    def __init__(self, payload_chars: int, limit: int):
        self.payload_chars = payload_chars
        self.limit = limit
        super().__init__(f"payload of {payload_chars} chars exceeds backend limit {limit}")


class RetriesExhausted(XlinstructError):
    """All attempts for one sample failed; carries the last underlying error."""

    def __init__(self, last_error: Exception, attempts: int):
        self.last_error = last_error
        self.attempts = attempts
        super().__init__(
            f"gave up after {attempts} attempts: {type(last_error).__name__}: {last_error}"
        )


class CheckpointCorrupt(XlinstructError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"checkpoint line {line_no}: {reason}")


class EndpointUnreachable(XlinstructError):
    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(f"external scorer unreachable: {detail}")


class ProtocolError(XlinstructError):
    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(f"external scorer protocol violation: {detail}")
