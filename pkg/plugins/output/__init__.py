"""
Output plugin system for the corpus pipeline.
This package contains plugins for writing pipeline output lines to different destinations.
"""

from .base import OutputPlugin
from .terminal import TerminalOutputPlugin
from .file import FileOutputPlugin

__all__ = ['OutputPlugin', 'TerminalOutputPlugin', 'FileOutputPlugin']
