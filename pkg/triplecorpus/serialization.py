"""
Canonical JSON Lines codec for sentences and triple records.

Input extraction lines and output triple lines share one envelope; only the
kind differs. Encoding uses a fixed key order and compact separators so that
the same logical record always serializes to the same bytes.
"""

import json
from typing import Any, Dict, List, Optional

from .errors import CorpusFormatError
from .model import (
    AnnotatedSentence,
    Attribution,
    Constituent,
    DepEdge,
    DependencyGraph,
    EXTRACTOR_FLAGS,
    ExtractionRecord,
    NaryExtraction,
    Quantity,
    SpaTeAnnotation,
    TemporalExpression,
    TimexPayload,
    Token,
    WikiLink,
)
from .schemas import validate_object

TRIPLE_KIND = "triple"
EXTRACTION_KIND = "extraction"
SENTENCE_KIND = "sentence"


def dumps(obj: Dict[str, Any]) -> str:
    """Compact, key-order-preserving JSON for one output line."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def encode_token(token: Token) -> Dict[str, Any]:
    obj: Dict[str, Any] = {
        "index": token.index,
        "surface": token.surface,
        "lemma": token.lemma,
        "pos": token.pos,
        "ner": token.ner,
        "begin": token.begin,
        "end": token.end,
    }
    if token.link is not None:
        obj["link"] = {
            "begin": token.link.begin,
            "end": token.link.end,
            "anchor": token.link.anchor,
            "target": token.link.target,
        }
    return obj


def encode_sentence(sentence: AnnotatedSentence) -> Dict[str, Any]:
    obj: Dict[str, Any] = {
        "kind": SENTENCE_KIND,
        "article_id": sentence.article_id,
        "sentence_number": sentence.sentence_number,
    }
    if sentence.article_title is not None:
        obj["article_title"] = sentence.article_title
    obj["tokens"] = [encode_token(t) for t in sentence.tokens]
    obj["deps"] = [{"gov": e.governor, "dep": e.dependent, "label": e.label} for e in sentence.depgraph.edges]
    obj["timex"] = [
        {"first_token": t.first_token, "last_token": t.last_token,
         "type": t.timex_type, "value": t.value, "xml": t.xml}
        for t in sentence.temporal_expressions
    ]
    return obj


def _encode_timex(timex: Optional[TimexPayload]) -> Optional[Dict[str, str]]:
    if timex is None:
        return None
    return {"type": timex.timex_type, "value": timex.value, "xml": timex.xml}


def encode_annotation(annotation: SpaTeAnnotation) -> Dict[str, Any]:
    return {
        "kind": annotation.kind,
        "predicate": annotation.predicate,
        "core_words": list(annotation.core_words),
        "pre_modifiers": list(annotation.pre_modifiers),
        "post_modifiers": list(annotation.post_modifiers),
        "timex": _encode_timex(annotation.timex),
        "target": annotation.target,
        "head": annotation.head,
    }


def _encode_attribution(attribution: Optional[Attribution]) -> Optional[Dict[str, Any]]:
    if attribution is None:
        return None
    return {
        "phrase": list(attribution.phrase),
        "predicate": attribution.predicate,
        "polarity": attribution.polarity,
        "modality": attribution.modality,
        "spate": [encode_annotation(a) for a in attribution.spate],
    }


def encode_record(record: ExtractionRecord, kind: str = TRIPLE_KIND) -> Dict[str, Any]:
    """Encode a record with the fixed field order documented in FORMAT.md."""
    obj: Dict[str, Any] = {
        "kind": kind,
        "article_id": record.article_id,
        "sentence_number": record.sentence_number,
        "extraction_index": record.extraction_index,
        "nary": {
            "subject": list(record.nary.subject.items),
            "relation": list(record.nary.relation.items),
            "arguments": [list(a.items) for a in record.nary.arguments],
            "clause_type": record.nary.clause_type,
        },
        "subject": list(record.subject.items),
        "relation": list(record.relation.items),
        "object": list(record.object.items),
        "polarity": record.polarity,
        "negative_words": list(record.negative_words),
        "modality": record.modality,
        "modality_words": list(record.modality_words),
        "attribution": _encode_attribution(record.attribution),
        "quantities": [{"marker": q.marker, "tokens": list(q.tokens)} for q in record.quantities],
        "dropped_words": list(record.dropped_words),
        "extraction_type": record.extraction_type,
        "spate": [encode_annotation(a) for a in record.spate],
    }
    if record.confidence is not None:
        obj["confidence"] = record.confidence
    obj["canonical_links"] = dict(record.canonical_links)
    obj["flags"] = {name: True for name in record.flags}
    obj["warnings"] = list(record.warnings)
    return obj


def serialize(record: ExtractionRecord) -> str:
    """One output line (without newline) for a triple record."""
    return dumps(encode_record(record))


def serialize_sentence(sentence: AnnotatedSentence) -> str:
    return dumps(encode_sentence(sentence))


# ---------------------------------------------------------------------------
# Decoding (input must already satisfy the schema)
# ---------------------------------------------------------------------------

def decode_sentence(obj: Dict[str, Any]) -> AnnotatedSentence:
    tokens = []
    for t in obj["tokens"]:
        link = None
        if "link" in t:
            raw = t["link"]
            link = WikiLink(raw["begin"], raw["end"], raw["anchor"], raw["target"])
        tokens.append(Token(t["index"], t["surface"], t["lemma"], t["pos"], t["ner"], t["begin"], t["end"], link))
    graph = DependencyGraph(tuple(DepEdge(d["gov"], d["dep"], d["label"]) for d in obj["deps"]))
    timex = tuple(
        TemporalExpression(t["first_token"], t["last_token"], t["type"], t["value"], t["xml"])
        for t in obj["timex"]
    )
    return AnnotatedSentence(
        article_id=obj["article_id"],
        sentence_number=obj["sentence_number"],
        tokens=tuple(tokens),
        depgraph=graph,
        temporal_expressions=timex,
        article_title=obj.get("article_title"),
    )


def _decode_timex(raw: Optional[Dict[str, str]]) -> Optional[TimexPayload]:
    if raw is None:
        return None
    return TimexPayload(raw["type"], raw["value"], raw["xml"])


def decode_annotation(raw: Dict[str, Any]) -> SpaTeAnnotation:
    return SpaTeAnnotation(
        kind=raw["kind"],
        core_words=tuple(raw["core_words"]),
        target=raw["target"],
        predicate=raw["predicate"],
        pre_modifiers=tuple(raw["pre_modifiers"]),
        post_modifiers=tuple(raw["post_modifiers"]),
        timex=_decode_timex(raw["timex"]),
        head=raw["head"],
    )


def _decode_attribution(raw: Optional[Dict[str, Any]]) -> Optional[Attribution]:
    if raw is None:
        return None
    return Attribution(
        phrase=tuple(raw["phrase"]),
        predicate=raw["predicate"],
        polarity=raw["polarity"],
        modality=raw["modality"],
        spate=tuple(decode_annotation(a) for a in raw["spate"]),
    )


def _constituent(role: str, items: List[Any]) -> Constituent:
    return Constituent(tuple(items), role)


def decode_record(obj: Dict[str, Any]) -> ExtractionRecord:
    nary = obj["nary"]
    flags = obj.get("flags", {})
    unknown = sorted(set(flags) - set(EXTRACTOR_FLAGS))
    if unknown:
        raise CorpusFormatError("schema-violation", f"unknown extractor flags {unknown}")
    return ExtractionRecord(
        article_id=obj["article_id"],
        sentence_number=obj["sentence_number"],
        extraction_index=obj["extraction_index"],
        nary=NaryExtraction(
            subject=_constituent("subject", nary["subject"]),
            relation=_constituent("relation", nary["relation"]),
            arguments=tuple(_constituent("argument", a) for a in nary["arguments"]),
            clause_type=nary["clause_type"],
        ),
        subject=_constituent("subject", obj["subject"]),
        relation=_constituent("relation", obj["relation"]),
        object=_constituent("object", obj["object"]),
        extraction_type=obj["extraction_type"],
        polarity=obj.get("polarity", "positive"),
        negative_words=tuple(obj.get("negative_words", ())),
        modality=obj.get("modality", "certainty"),
        modality_words=tuple(obj.get("modality_words", ())),
        attribution=_decode_attribution(obj.get("attribution")),
        quantities=tuple(Quantity(q["marker"], tuple(q["tokens"])) for q in obj.get("quantities", ())),
        dropped_words=tuple(obj.get("dropped_words", ())),
        spate=tuple(decode_annotation(a) for a in obj.get("spate", ())),
        confidence=obj.get("confidence"),
        canonical_links=tuple(obj.get("canonical_links", {}).items()),
        flags=tuple(name for name, value in flags.items() if value),
        warnings=tuple(obj.get("warnings", ())),
    )


def loads(line: str) -> Dict[str, Any]:
    """Parse and schema-validate one line."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusFormatError("invalid-json", f"invalid JSON: {e.msg}")
    validate_object(obj)
    return obj


def deserialize(line: str) -> ExtractionRecord:
    """Decode one extraction or triple line into a record."""
    obj = loads(line)
    if obj["kind"] not in (TRIPLE_KIND, EXTRACTION_KIND):
        raise CorpusFormatError("unknown-kind", f"expected a triple line, got kind {obj['kind']!r}")
    return decode_record(obj)
