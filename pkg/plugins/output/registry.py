"""
Output plugins by name and by destination.

A destination names where corpus output goes: "-" (or nothing) means
standard output, anything else is a file path written atomically.
"""

from typing import Dict, List, Optional, Type

from .base import OutputPlugin
from .file import FileOutputPlugin
from .terminal import TerminalOutputPlugin

STDOUT = "-"

_PLUGINS: Dict[str, Type[OutputPlugin]] = {}


def register_output_plugin(name: str, plugin_class: Type[OutputPlugin]) -> None:
    """Register a plugin class under an output type name."""
    registered = _PLUGINS.get(name)
    if registered is not None and registered is not plugin_class:
        raise ValueError(f"Output type {name!r} is already registered to {registered.__name__}")
    _PLUGINS[name] = plugin_class


def available_output_plugins() -> List[str]:
    return sorted(_PLUGINS)


def get_output_plugin(output_type: str, **kwargs) -> OutputPlugin:
    """Create a plugin by name; file plugins take file_path, terminal plugins an optional stream."""
    plugin_class = _PLUGINS.get(output_type)
    if plugin_class is None:
        raise ValueError(f"Unknown output type: {output_type} (available: {', '.join(available_output_plugins())})")
    return plugin_class(**kwargs)


def open_output(destination: Optional[str]) -> OutputPlugin:
    """The terminal plugin for "-" or no destination, otherwise the file plugin for that path."""
    if not destination or destination == STDOUT:
        return get_output_plugin("terminal")
    return get_output_plugin("file", file_path=destination)


register_output_plugin("terminal", TerminalOutputPlugin)
register_output_plugin("file", FileOutputPlugin)
