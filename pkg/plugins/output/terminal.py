"""
Terminal output plugin for the corpus pipeline.
"""

import sys
from typing import Optional, TextIO

from .base import OutputPlugin


class TerminalOutputPlugin(OutputPlugin):
    """Output plugin that prints lines to the terminal."""

    def __init__(self, stream: Optional[TextIO] = None) -> None:
        self.stream = stream

    def output(self, line: str) -> None:
        print(line, file=self.stream or sys.stdout)

    def close(self) -> None:
        """No cleanup needed for terminal output."""
        (self.stream or sys.stdout).flush()
