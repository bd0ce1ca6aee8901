"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class OrdexError(Exception):
    """Base class for all package errors."""


# -- document ingestion ------------------------------------------------------


class IngestError(OrdexError):
    pass


class DocumentNotFound(IngestError, FileNotFoundError):
    pass


class ConverterUnavailable(IngestError):
    """The external PDF converter (or its in-process fallback) is missing."""


class ConversionFailure(IngestError):
    """The converter ran but could not produce page text (corrupt/empty PDF)."""


# -- model backends ----------------------------------------------------------


class BackendError(OrdexError):
    pass


class TransientBackendError(BackendError):
    """Retryable failure: HTTP 429, 5xx, timeouts, dropped connections."""


class PermanentBackendError(BackendError):
    """Non-retryable failure such as HTTP 400/401/404."""

    def __init__(self, message: str, status_code: int | None = None) -> None:
        super().__init__(message)
        self.status_code = status_code


class NoScriptMatch(BackendError):
    """A scripted backend has no response for the conversation it was given."""

    def __init__(self, last_user_message: str) -> None:
        preview = last_user_message if len(last_user_message) < 120 else last_user_message[:117] + "..."
        super().__init__(f"no scripted response for user message: {preview!r}")
        self.last_user_message = last_user_message


class BackendExhausted(BackendError):
    def __init__(self, attempts: int, last_error: BaseException | None) -> None:
        super().__init__(f"backend failed after {attempts} attempts: {last_error}")
        self.attempts = attempts
        self.last_error = last_error


class MalformedResponse(BackendError):
    pass


# -- extraction --------------------------------------------------------------


class SetbackParseError(OrdexError, ValueError):
    pass


class DistillationError(OrdexError):
    """More than half of a document's chunks failed at the backend."""

    def __init__(self, failed: int, total: int, errors: list[tuple[int, str]]) -> None:
        super().__init__(f"{failed}/{total} chunks failed during distillation")
        self.failed = failed
        self.total = total
        self.errors = errors


class GraphError(OrdexError, ValueError):
    pass


class TreeFileError(GraphError):
    pass


class InputFormatError(OrdexError, ValueError):
    """A tabular/JSONL input could not be parsed; carries the 1-based line number."""

    def __init__(self, path: str, line: int, message: str) -> None:
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
