"""
Schema loading and validation for interchange lines and model files.

Schemas live in the repository's schemas/ directory and reference each other
through relative $ref entries, which are inlined before compiling a validator.
"""

import json
import logging
import os
from functools import lru_cache
from typing import Any, Dict, List

import jsonschema
from jsonschema import Draft7Validator

from .errors import CorpusFormatError

logger = logging.getLogger(__name__)

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "schemas")

ENVELOPE_SCHEMA = "envelope.schema.json"
SENTENCE_SCHEMA = "sentence.schema.json"
EXTRACTION_SCHEMA = "extraction.schema.json"
MODEL_SCHEMA = "model.schema.json"

# Fields whose violations get their own reason code instead of schema-violation.
_FIELD_REASONS = {
    "confidence": "bad-confidence",
    "kind": "unknown-kind",
}


def resolve_schema_references(schema: Any, base_path: str) -> Any:
    """Recursively replace external $ref entries with the referenced schema content."""
    if isinstance(schema, dict):
        ref = schema.get("$ref")
        if isinstance(ref, str) and not ref.startswith("#"):
            ref_path = os.path.join(base_path, ref)
            with open(ref_path, "r", encoding="utf-8") as f:
                return resolve_schema_references(json.load(f), base_path)
        return {k: resolve_schema_references(v, base_path) for k, v in schema.items()}
    if isinstance(schema, list):
        return [resolve_schema_references(item, base_path) for item in schema]
    return schema


@lru_cache(maxsize=None)
def load_validator(schema_name: str, schema_dir: str = SCHEMA_DIR) -> Draft7Validator:
    """Load a schema by file name, inline its references and compile a validator."""
    path = os.path.join(schema_dir, schema_name)
    with open(path, "r", encoding="utf-8") as f:
        schema = json.load(f)
    resolved = resolve_schema_references(schema, schema_dir)
    Draft7Validator.check_schema(resolved)
    logger.debug("Compiled schema %s", path)
    return Draft7Validator(resolved)


def _schema_for(obj: Dict[str, Any]) -> str:
    kind = obj.get("kind")
    if kind == "sentence":
        return SENTENCE_SCHEMA
    if kind in ("extraction", "triple"):
        return EXTRACTION_SCHEMA
    raise CorpusFormatError("unknown-kind", f"unknown object kind {kind!r}")


def _reason_for(error: jsonschema.exceptions.ValidationError) -> str:
    if error.validator == "required":
        return "missing-field"
    for part in reversed(list(error.absolute_path)):
        if isinstance(part, str):
            return _FIELD_REASONS.get(part, "schema-violation")
    return "schema-violation"


def validate_object(obj: Any) -> None:
    """Validate one decoded interchange object, raising CorpusFormatError on failure.

    The kind discriminator picks the branch of the envelope union directly so
    error messages point at the failing field instead of at the union.
    """
    if not isinstance(obj, dict):
        raise CorpusFormatError("schema-violation", "line is not a JSON object")
    validator = load_validator(_schema_for(obj))
    error = jsonschema.exceptions.best_match(validator.iter_errors(obj))
    if error is not None:
        location = "/".join(str(p) for p in error.absolute_path) or "<root>"
        raise CorpusFormatError(_reason_for(error), f"{location}: {error.message}")


def validate_model(obj: Any) -> None:
    """Validate a decoded confidence model file."""
    error = jsonschema.exceptions.best_match(load_validator(MODEL_SCHEMA).iter_errors(obj))
    if error is not None:
        location = "/".join(str(p) for p in error.absolute_path) or "<root>"
        raise CorpusFormatError("schema-violation", f"model file {location}: {error.message}")


def schema_errors(obj: Any) -> List[str]:
    """All validation messages for one object against the full envelope union."""
    validator = load_validator(ENVELOPE_SCHEMA)
    return [error.message for error in validator.iter_errors(obj)]
