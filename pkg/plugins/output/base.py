"""
Base output plugin interface for the corpus pipeline.
"""

from abc import ABC, abstractmethod
from typing import Iterable


class OutputPlugin(ABC):
    """Abstract base class for output plugins.

    Used as a context manager, a plugin is closed (committed) when the block
    succeeds and aborted when it raises.
    """

    @abstractmethod
    def output(self, line: str) -> None:
        """Output one line (without trailing newline)."""
        pass

    def output_all(self, lines: Iterable[str]) -> int:
        count = 0
        for line in lines:
            self.output(line)
            count += 1
        return count

    @abstractmethod
    def close(self) -> None:
        """Flush and release resources."""
        pass

    def abort(self) -> None:
        """Discard anything written so far. Defaults to close()."""
        self.close()

    def __enter__(self) -> "OutputPlugin":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.close()
        else:
            self.abort()
