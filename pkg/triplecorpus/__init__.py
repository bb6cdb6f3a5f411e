"""
Toolkit for building an open-information-extraction triple corpus from
annotated sentences: ingest, spatio-temporal annotation, postprocessing,
confidence scoring, tier filtering, profiling and KB alignment.
"""

from .errors import (
    AlignmentError,
    ConfidenceError,
    ConfigError,
    CorpusError,
    CorpusFormatError,
    PipelineError,
    RedirectCycleError,
)

__all__ = [
    "AlignmentError",
    "ConfidenceError",
    "ConfigError",
    "CorpusError",
    "CorpusFormatError",
    "PipelineError",
    "RedirectCycleError",
]
