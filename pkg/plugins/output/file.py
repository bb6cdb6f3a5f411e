"""
File output plugin for the corpus pipeline.
"""

import logging
import os
import tempfile

from .base import OutputPlugin

logger = logging.getLogger(__name__)


class FileOutputPlugin(OutputPlugin):
    """Output plugin that writes lines to a file atomically.

    Lines go to a temporary file in the target directory, which replaces the
    target on close(). Readers never see a partially written file.
    """

    def __init__(self, file_path: str) -> None:
        """Initialize with the output file path."""
        self.file_path = file_path
        directory = os.path.dirname(os.path.abspath(file_path))
        os.makedirs(directory, exist_ok=True)
        fd, self.temp_path = tempfile.mkstemp(prefix=f".{os.path.basename(file_path)}.", suffix=".tmp", dir=directory)
        self.file = os.fdopen(fd, 'w', encoding='utf-8', newline='\n')
        self.lines = 0

    def output(self, line: str) -> None:
        """Write the line followed by a newline."""
        self.file.write(line + "\n")
        self.lines += 1

    def close(self) -> None:
        """Flush, fsync and rename the temporary file over the target."""
        if self.file is None:
            return
        self.file.flush()
        os.fsync(self.file.fileno())
        self.file.close()
        self.file = None
        os.replace(self.temp_path, self.file_path)
        logger.debug("Wrote %d lines to %s", self.lines, self.file_path)

    def abort(self) -> None:
        """Remove the temporary file, leaving any previous target untouched."""
        if self.file is None:
            return
        self.file.close()
        self.file = None
        try:
            os.remove(self.temp_path)
        except FileNotFoundError:
            pass
        logger.warning("Discarded partial output for %s", self.file_path)
