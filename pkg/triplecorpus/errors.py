"""
Exception hierarchy shared by every stage of the corpus toolkit.
"""

from typing import Optional


class CorpusError(Exception):
    """Base class for all toolkit errors."""


class CorpusFormatError(CorpusError):
    """A line of an interchange, TSV or model file is malformed."""

    def __init__(self, reason: str, message: str, line_number: Optional[int] = None) -> None:
        self.reason = reason
        self.line_number = line_number
        self.message = message
        location = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{location}{message} [{reason}]")

    def at_line(self, line_number: int) -> "CorpusFormatError":
        """Return a copy of this error tagged with a line number."""
        return CorpusFormatError(self.reason, self.message, line_number)

    def __reduce__(self):
        return CorpusFormatError, (self.reason, self.message, self.line_number)


class RedirectCycleError(CorpusError):
    """Following a redirect chain looped or exceeded the hop limit."""

    def __init__(self, start: str, chain: list) -> None:
        self.start = start
        self.chain = chain
        super().__init__(f"redirect cycle starting at {start!r}: {' -> '.join(chain)}")

    def __reduce__(self):
        return RedirectCycleError, (self.start, self.chain)


class ConfidenceError(CorpusError):
    """Training or scoring the confidence model failed."""


class AlignmentError(CorpusError):
    """A record handed to KB alignment violates its contract."""


class ConfigError(CorpusError):
    """Pipeline configuration is invalid or a required input is missing."""


class PipelineError(CorpusError):
    """A fatal error inside one pipeline stage, with record context."""

    def __init__(self, stage: str, context: str, cause: Exception) -> None:
        self.stage = stage
        self.context = context
        self.cause = cause
        super().__init__(f"stage '{stage}' failed on {context}: {cause}")

    def __reduce__(self):
        return PipelineError, (self.stage, self.context, self.cause)
