"""
Plugin system for the corpus pipeline.
This package contains various plugin types for extending functionality.
"""
