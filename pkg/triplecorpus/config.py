"""
Pipeline configuration: defaults, an optional TOML or JSON file, then CLI flags.

Config file keys are the long CLI flag names (`kb-id-map`, `self-link-scope`,
...). Underscored spellings are accepted too.
"""

import json
import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional, Tuple

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .confidence import DEFAULT_FREQUENT_THRESHOLD
from .errors import ConfigError
from .ingest import SELF_LINK_ARTICLE, SELF_LINK_SCOPES

logger = logging.getLogger(__name__)

STAGES = ("ingest", "spate", "postprocess", "confidence", "tiers", "profile", "align")

# Inputs each stage needs, by config field.
_STAGE_FILES = {
    "confidence": ("model",),
    "tiers": ("titles",),
    "align": ("kb",),
}


@dataclass(frozen=True)
class PipelineConfig:
    input: Tuple[str, ...] = ()
    out: str = "out"
    redirects: Optional[str] = None
    titles: Optional[str] = None
    model: Optional[str] = None
    kb: Tuple[str, ...] = ()
    kb_id_map: Optional[str] = None
    meta_facts: Optional[str] = None
    relfreq: Optional[str] = None
    jobs: int = 1
    strict: bool = True
    stages: Tuple[str, ...] = STAGES
    self_link_scope: str = SELF_LINK_ARTICLE
    be_filter_partial: bool = False
    frequent_threshold: int = DEFAULT_FREQUENT_THRESHOLD
    top_k: int = 10

    def enabled(self, stage: str) -> bool:
        return stage in self.stages

    def validate(self) -> "PipelineConfig":
        """Check invariants and that every file an enabled stage needs exists."""
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if not self.stages or tuple(self.stages) != STAGES[:len(self.stages)]:
            raise ConfigError(f"stages must be a prefix of {', '.join(STAGES)}; got {', '.join(self.stages)}")
        if self.self_link_scope not in SELF_LINK_SCOPES:
            raise ConfigError(f"self-link-scope must be one of {SELF_LINK_SCOPES}")
        if self.top_k < 1 or self.frequent_threshold < 0:
            raise ConfigError("top-k must be >= 1 and frequent-threshold >= 0")
        if not self.input:
            raise ConfigError("no input files given")

        required = [("input", path) for path in self.input]
        for stage, names in _STAGE_FILES.items():
            if not self.enabled(stage):
                continue
            for name in names:
                value = getattr(self, name)
                if not value:
                    raise ConfigError(f"stage '{stage}' needs --{name.replace('_', '-')}")
                paths = value if isinstance(value, tuple) else (value,)
                required.extend((name, path) for path in paths)
        for name in ("redirects", "kb_id_map", "meta_facts", "relfreq"):
            if getattr(self, name):
                required.append((name, getattr(self, name)))
        for name, path in required:
            if not os.path.isfile(path):
                raise ConfigError(f"{name.replace('_', '-')} file not found: {path}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {f.name.replace("_", "-"): _plain(getattr(self, f.name)) for f in fields(self)}


def _plain(value: Any) -> Any:
    return list(value) if isinstance(value, tuple) else value


_FIELDS = {f.name: f for f in fields(PipelineConfig)}
_TUPLE_FIELDS = {"input", "kb", "stages"}


def _coerce(name: str, value: Any) -> Any:
    if name in _TUPLE_FIELDS:
        if isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()] if name == "stages" else [value]
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{name} must be a string or a list")
        return tuple(str(v) for v in value)
    default = _FIELDS[name].default
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be true or false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer")
        return value
    if value is not None and not isinstance(value, str):
        raise ConfigError(f"{name} must be a string")
    return value


def normalize_keys(values: Mapping[str, Any]) -> Dict[str, Any]:
    """Map flag-style keys onto config fields, rejecting unknown keys."""
    result: Dict[str, Any] = {}
    for key, value in values.items():
        name = key.replace("-", "_")
        if name not in _FIELDS:
            raise ConfigError(f"unknown config key: {key}")
        result[name] = _coerce(name, value)
    return result


def load_config_file(path: str) -> Dict[str, Any]:
    """Read a TOML (`key = value`) or JSON config file, chosen by extension."""
    try:
        if path.endswith(".json"):
            with open(path, "r", encoding="utf-8") as f:
                values = json.load(f)
        else:
            with open(path, "rb") as f:
                values = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot parse config file {path}: {e}")
    if not isinstance(values, dict):
        raise ConfigError(f"config file {path} must hold a table of key/value pairs")
    logger.debug("Loaded config file %s", path)
    return normalize_keys(values)


def build_config(file_path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> PipelineConfig:
    """Defaults, then the config file, then explicit overrides (CLI flags)."""
    config = PipelineConfig()
    if file_path:
        config = replace(config, **load_config_file(file_path))
    if overrides:
        config = replace(config, **normalize_keys({k: v for k, v in overrides.items() if v is not None}))
    return config
