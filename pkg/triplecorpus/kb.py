"""
Distant-supervision alignment of linked open triples against KB triples.

A KB hit is any KB triple connecting the two argument entities of an open
triple, in either direction. Reports are kept per loaded KB plus a union
section; accumulators merge associatively so shards can be aligned
independently.
"""

import json
import logging
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from .errors import AlignmentError, CorpusFormatError
from .ingest import Line, RejectLog, read_tsv
from .model import (
    AnnotatedSentence,
    Constituent,
    ExtractionRecord,
    TEMPORAL_REFERENCE,
    lemmatized_relation,
    to_entity_id,
)

logger = logging.getLogger(__name__)

FORWARD = "forward"
REVERSE = "reverse"
UNION = "union"

ENTITY_PREFIXES = (
    "http://dbpedia.org/resource/",
    "http://yago-knowledge.org/resource/",
    "dbr:",
    "yago:",
)
DATE_LITERAL = re.compile(r"^-?[0-9#]{4}-[0-9#]{2}-[0-9#]{2}$")

Hit = Tuple[str, str]


@dataclass(frozen=True)
class KbTriple:
    subject: str
    relation: str
    object: str

    def __post_init__(self) -> None:
        if not (self.subject and self.relation and self.object):
            raise CorpusFormatError("malformed-tsv", "KB triple fields must be non-empty")


def _literal(term: str) -> Optional[str]:
    """Value of a quoted literal such as "1918-01-17"^^xsd:date, or None for entities."""
    if term.startswith('"'):
        return term[1:term.rfind('"')] if term.rfind('"') > 0 else term[1:]
    return None


def normalize_entity(term: str, id_map: Mapping[str, str] = {}) -> str:
    """Canonical entity id of a KB term: brackets and KB prefixes stripped, mapped ids resolved."""
    term = term.strip()
    literal = _literal(term)
    if literal is not None:
        return literal
    if term.startswith("<") and term.endswith(">"):
        term = term[1:-1]
    for prefix in ENTITY_PREFIXES:
        if term.startswith(prefix):
            term = term[len(prefix):]
            break
    return to_entity_id(id_map.get(term, term))


def normalize_relation(term: str) -> str:
    term = term.strip()
    if term.startswith("<") and term.endswith(">"):
        term = term[1:-1]
    return term


def is_date_literal(value: str) -> bool:
    """ISO dates, possibly with ## wildcards for unknown digits."""
    return bool(DATE_LITERAL.match(value))


@dataclass(frozen=True)
class KbIndex:
    name: str
    forward: Mapping[Tuple[str, str], FrozenSet[str]]
    reverse: Mapping[Tuple[str, str], FrozenSet[str]]
    date_facts: Mapping[str, FrozenSet[Tuple[str, str]]]

    @property
    def size(self) -> int:
        return sum(len(relations) for relations in self.forward.values())

    def triples(self) -> Iterator[KbTriple]:
        for (subject, obj), relations in sorted(self.forward.items()):
            for relation in sorted(relations):
                yield KbTriple(subject, relation, obj)

    def transposed(self) -> "KbIndex":
        """Index of the same KB with every triple's subject and object swapped."""
        return KbIndex(f"{self.name}-transposed", self.reverse, self.forward, {})

    def has_date_fact(self, subject: str) -> bool:
        return subject in self.date_facts


def build_index(triples: Iterable[KbTriple], name: str = "kb") -> KbIndex:
    """Build forward/reverse maps; duplicate triples collapse."""
    forward: Dict[Tuple[str, str], Set[str]] = {}
    reverse: Dict[Tuple[str, str], Set[str]] = {}
    dates: Dict[str, Set[Tuple[str, str]]] = {}
    for triple in triples:
        forward.setdefault((triple.subject, triple.object), set()).add(triple.relation)
        reverse.setdefault((triple.object, triple.subject), set()).add(triple.relation)
        if is_date_literal(triple.object):
            dates.setdefault(triple.subject, set()).add((triple.relation, triple.object))
    return KbIndex(
        name,
        {k: frozenset(v) for k, v in forward.items()},
        {k: frozenset(v) for k, v in reverse.items()},
        {k: frozenset(v) for k, v in dates.items()},
    )


def read_kb(lines: Iterable[Line], id_map: Mapping[str, str] = {}, strict: bool = True,
            rejects: Optional[RejectLog] = None) -> Iterator[KbTriple]:
    for line_number, (subject, relation, obj) in read_tsv(lines, 3, strict, rejects):
        try:
            yield KbTriple(normalize_entity(subject, id_map), normalize_relation(relation),
                           normalize_entity(obj, id_map))
        except CorpusFormatError as e:
            if strict:
                raise e.at_line(line_number)
            if rejects is not None:
                rejects.add(e.at_line(line_number))


def load_kb(paths: Sequence[str], name: Optional[str] = None, id_map: Mapping[str, str] = {},
            strict: bool = True, rejects: Optional[RejectLog] = None) -> KbIndex:
    """Load one KB from one or more `subject<TAB>relation<TAB>object` files."""
    if name is None:
        name = os.path.splitext(os.path.basename(paths[0]))[0] if paths else "kb"
    triples: List[KbTriple] = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as f:
            triples.extend(read_kb(f, id_map, strict, rejects))
    index = build_index(triples, name)
    logger.info("Loaded KB %s: %d distinct triples from %d lines", name, index.size, len(triples))
    return index


def load_id_map(path: str, strict: bool = True) -> Dict[str, str]:
    """Read a `kb_id<TAB>title` mapping file."""
    with open(path, "r", encoding="utf-8") as f:
        return {kb_id: title for _, (kb_id, title) in read_tsv(f, 2, strict)}


def load_meta_facts(path: str, id_map: Mapping[str, str] = {},
                    strict: bool = True) -> Dict[KbTriple, Tuple[Tuple[str, str], ...]]:
    """Read `subject<TAB>relation<TAB>object<TAB>meta_predicate<TAB>meta_value` rows keyed by KB triple."""
    facts: Dict[KbTriple, List[Tuple[str, str]]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for _, (subject, relation, obj, predicate, value) in read_tsv(f, 5, strict):
            triple = KbTriple(normalize_entity(subject, id_map), normalize_relation(relation),
                              normalize_entity(obj, id_map))
            facts.setdefault(triple, []).append((normalize_relation(predicate), value))
    return {k: tuple(v) for k, v in facts.items()}


def kb_hit(index: KbIndex, subject: str, obj: str) -> FrozenSet[Hit]:
    """KB relations linking subject to object (forward) or object to subject (reverse)."""
    hits = {(r, FORWARD) for r in index.forward.get((subject, obj), ())}
    hits.update((r, REVERSE) for r in index.reverse.get((subject, obj), ()))
    return frozenset(hits)


def _hit_triple(subject: str, obj: str, hit: Hit) -> KbTriple:
    relation, direction = hit
    return KbTriple(subject, relation, obj) if direction == FORWARD else KbTriple(obj, relation, subject)


# ---------------------------------------------------------------------------
# Entities of open triples
# ---------------------------------------------------------------------------

def argument_entity(sentence: AnnotatedSentence, record: ExtractionRecord, part: Constituent) -> Optional[str]:
    """Canonical entity of the first link touching the argument, if any."""
    members = set(part.tokens)
    links = record.links_map
    for link, anchor in sentence.links():
        if members.intersection(anchor):
            return links.get(link.target, to_entity_id(link.target))
    return None


def is_alignable(sentence: AnnotatedSentence, record: ExtractionRecord) -> bool:
    return argument_entity(sentence, record, record.subject) is not None and \
        argument_entity(sentence, record, record.object) is not None


def is_date_record(sentence: AnnotatedSentence, record: ExtractionRecord) -> bool:
    """Linked subject and an object marked as a DATE temporal reference."""
    if argument_entity(sentence, record, record.subject) is None:
        return False
    return any(a.kind == TEMPORAL_REFERENCE and a.target == "object" and a.timex is not None
               and a.timex.timex_type == "DATE" for a in record.spate)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class AlignmentSection:
    """Per-KB tallies; merge adds every counter."""

    total: int = 0
    hits: int = 0
    frequency: Counter = field(default_factory=Counter)
    hit_counts: Counter = field(default_factory=Counter)
    kb_relations: Dict[str, Counter] = field(default_factory=dict)
    date_candidates: int = 0
    date_hits: int = 0
    meta_hits: int = 0
    meta_temporal: int = 0
    meta_spatial: int = 0

    def add_hits(self, relation: str, hits: FrozenSet[Hit]) -> None:
        self.total += 1
        self.frequency[relation] += 1
        if not hits:
            return
        self.hits += 1
        self.hit_counts[relation] += 1
        counter = self.kb_relations.setdefault(relation, Counter())
        for kb_relation, _ in hits:
            counter[kb_relation] += 1

    def add_meta(self, record: ExtractionRecord) -> None:
        self.meta_hits += 1
        self.meta_temporal += record.has_temporal()
        self.meta_spatial += record.has_spatial()

    def merge(self, other: "AlignmentSection") -> "AlignmentSection":
        relations = {k: Counter(v) for k, v in self.kb_relations.items()}
        for k, v in other.kb_relations.items():
            relations[k] = relations.get(k, Counter()) + v
        return AlignmentSection(
            total=self.total + other.total,
            hits=self.hits + other.hits,
            frequency=self.frequency + other.frequency,
            hit_counts=self.hit_counts + other.hit_counts,
            kb_relations=relations,
            date_candidates=self.date_candidates + other.date_candidates,
            date_hits=self.date_hits + other.date_hits,
            meta_hits=self.meta_hits + other.meta_hits,
            meta_temporal=self.meta_temporal + other.meta_temporal,
            meta_spatial=self.meta_spatial + other.meta_spatial,
        )

    @property
    def hit_fraction(self) -> float:
        return self.hits / self.total if self.total else 0.0

    @property
    def date_fraction(self) -> float:
        return self.date_hits / self.date_candidates if self.date_candidates else 0.0

    def relation_rows(self, top_k: int) -> List[Dict[str, object]]:
        rows = []
        for relation, frequency in sorted(self.frequency.items(), key=lambda kv: (-kv[1], kv[0])):
            aligned = self.kb_relations.get(relation, Counter())
            hits = self.hit_counts[relation]
            rows.append({
                "relation": relation,
                "frequency": frequency,
                "kb_hits": hits,
                "kb_hit_pct": 100.0 * hits / frequency,
                "distinct_kb_relations": len(aligned),
                "top_kb_relations": [[r, c] for r, c in sorted(aligned.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]],
            })
        return rows

    def to_dict(self, top_k: int) -> Dict[str, object]:
        return {
            "total": self.total,
            "hits": self.hits,
            "hit_fraction": self.hit_fraction,
            "date_candidates": self.date_candidates,
            "date_hits": self.date_hits,
            "date_fraction": self.date_fraction,
            "meta_fact_hits": {"total": self.meta_hits, "temporal": self.meta_temporal, "spatial": self.meta_spatial},
            "relations": self.relation_rows(top_k),
        }


@dataclass
class AlignmentReport:
    sections: Dict[str, AlignmentSection]
    top_k: int = 3

    def merge(self, other: "AlignmentReport") -> "AlignmentReport":
        names = sorted(set(self.sections) | set(other.sections))
        return AlignmentReport(
            {n: self.sections.get(n, AlignmentSection()).merge(other.sections.get(n, AlignmentSection()))
             for n in names},
            self.top_k,
        )

    def to_dict(self) -> Dict[str, object]:
        return {"sections": {name: section.to_dict(self.top_k) for name, section in sorted(self.sections.items())}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines: List[str] = []
        for name, section in sorted(self.sections.items()):
            lines.append(f"== {name}: {section.hits:,} of {section.total:,} linked triples hit "
                         f"({section.hit_fraction * 100:.1f}%), date hits {section.date_hits:,} of "
                         f"{section.date_candidates:,} ({section.date_fraction * 100:.1f}%)")
            lines.append(f"{'open relation':<30}{'freq':>10}{'# KB hits':>12}{'%':>8}{'# distinct KB rel.s':>21}  top KB relations")
            for row in section.relation_rows(self.top_k):
                top = ", ".join(f"{r} ({c:,})" for r, c in row["top_kb_relations"])
                lines.append(f"{row['relation']:<30}{row['frequency']:>10,}{row['kb_hits']:>12,}"
                             f"{row['kb_hit_pct']:>8.1f}{row['distinct_kb_relations']:>21,}  {top}")
            lines.append("")
        return "\n".join(lines)


def align(stream: Iterable[Tuple[AnnotatedSentence, ExtractionRecord]], indexes: Sequence[KbIndex],
          meta_facts: Optional[Mapping[KbTriple, object]] = None, top_k: int = 3) -> AlignmentReport:
    """Tally KB hits per open relation for each KB and for their union.

    Every record must have both arguments linked; AlignmentError otherwise.
    """
    sections = {index.name: AlignmentSection() for index in indexes}
    union = AlignmentSection()
    for sentence, record in stream:
        subject = argument_entity(sentence, record, record.subject)
        obj = argument_entity(sentence, record, record.object)
        if subject is None or obj is None:
            raise AlignmentError(f"record {record.key} does not have both arguments linked")
        relation = lemmatized_relation(record, sentence)
        all_hits: Set[Hit] = set()
        union_meta = False
        for index in indexes:
            hits = kb_hit(index, subject, obj)
            sections[index.name].add_hits(relation, hits)
            all_hits.update(hits)
            if meta_facts and any(_hit_triple(subject, obj, h) in meta_facts for h in hits):
                sections[index.name].add_meta(record)
                union_meta = True
        union.add_hits(relation, frozenset(all_hits))
        if union_meta:
            union.add_meta(record)
    if len(indexes) > 1:
        sections[UNION] = union
    return AlignmentReport(sections, top_k)


def date_hits(stream: Iterable[Tuple[AnnotatedSentence, ExtractionRecord]], index: KbIndex) -> Tuple[int, float]:
    """Optimistic date-fact hits: the KB holds any date fact about the linked subject."""
    candidates = hits = 0
    for sentence, record in stream:
        if not is_date_record(sentence, record):
            continue
        candidates += 1
        subject = argument_entity(sentence, record, record.subject)
        if index.has_date_fact(subject):
            hits += 1
    return hits, (hits / candidates if candidates else 0.0)


def add_date_hits(report: AlignmentReport, stream: Iterable[Tuple[AnnotatedSentence, ExtractionRecord]],
                  indexes: Sequence[KbIndex]) -> AlignmentReport:
    """Fill the date-hit columns of every section from a stream of candidate records."""
    for sentence, record in stream:
        if not is_date_record(sentence, record):
            continue
        subject = argument_entity(sentence, record, record.subject)
        any_hit = False
        for index in indexes:
            section = report.sections.setdefault(index.name, AlignmentSection())
            section.date_candidates += 1
            if index.has_date_fact(subject):
                section.date_hits += 1
                any_hit = True
        if UNION in report.sections:
            report.sections[UNION].date_candidates += 1
            report.sections[UNION].date_hits += any_hit
    return report
