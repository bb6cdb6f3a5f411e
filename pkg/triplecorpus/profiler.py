"""
Corpus statistics over a stream of (sentence, triple) pairs.

Accumulation is exact (integer counts, Fraction moments), so profiles of
shards merge into exactly the profile of the concatenated stream regardless
of order.
"""

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Tuple

from .confidence import bucket_index
from .model import AnnotatedSentence, ExtractionRecord, NEGATIVE, POSSIBILITY, dominant_ner, lemmatized_relation

UNTYPED = "O"
CONFIDENCE_BUCKETS = 10

# Rows of the annotation table, in report order.
ANNOTATION_ROWS = (
    "any_semantic_annotation",
    "negative_polarity",
    "possibility_modality",
    "quantities",
    "attribution",
    "time",
    "space",
    "space_or_time",
    "space_and_time",
)
LENGTH_ROWS = ("triple", "subject", "relation", "object")


@dataclass
class Moments:
    """Exact count, sum and sum of squares."""

    count: int = 0
    total: Fraction = Fraction(0)
    squares: Fraction = Fraction(0)

    def add(self, value) -> None:
        value = Fraction(value)
        self.count += 1
        self.total += value
        self.squares += value * value

    def merge(self, other: "Moments") -> "Moments":
        return Moments(self.count + other.count, self.total + other.total, self.squares + other.squares)

    @property
    def mean(self) -> float:
        return float(self.total / self.count) if self.count else 0.0

    @property
    def stddev(self) -> float:
        """Population standard deviation."""
        if not self.count:
            return 0.0
        mean = self.total / self.count
        return math.sqrt(float(self.squares / self.count - mean * mean))

    def to_dict(self) -> Dict[str, object]:
        return {"count": self.count, "mean": self.mean, "stddev": self.stddev, "defined": self.count > 0}


def _annotation_flags(record: ExtractionRecord) -> Dict[str, bool]:
    time = record.has_temporal()
    space = record.has_spatial()
    flags = {
        "negative_polarity": record.polarity == NEGATIVE,
        "possibility_modality": record.modality == POSSIBILITY,
        "quantities": bool(record.quantities),
        "attribution": record.attribution is not None,
        "time": time,
        "space": space,
        "space_or_time": space or time,
        "space_and_time": space and time,
    }
    flags["any_semantic_annotation"] = any(flags.values()) or bool(record.spate)
    return flags


@dataclass
class CorpusProfile:
    """Mergeable accumulator behind a CorpusReport."""

    total: int = 0
    annotations: Counter = field(default_factory=Counter)
    lengths: Dict[str, Moments] = field(default_factory=lambda: {row: Moments() for row in LENGTH_ROWS})
    confidence: Moments = field(default_factory=Moments)
    confidence_histogram: List[int] = field(default_factory=lambda: [0] * CONFIDENCE_BUCKETS)
    ner_types: Counter = field(default_factory=Counter)
    pair_typing: Counter = field(default_factory=Counter)
    relations: Counter = field(default_factory=Counter)

    def add(self, sentence: AnnotatedSentence, record: ExtractionRecord) -> None:
        self.total += 1
        for name, present in _annotation_flags(record).items():
            if present:
                self.annotations[name] += 1
        self.lengths["subject"].add(len(record.subject))
        self.lengths["relation"].add(len(record.relation))
        self.lengths["object"].add(len(record.object))
        self.lengths["triple"].add(len(record.subject) + len(record.relation) + len(record.object))
        if record.confidence is not None:
            self.confidence.add(record.confidence)
            self.confidence_histogram[bucket_index(record.confidence, CONFIDENCE_BUCKETS)] += 1

        subject_type = dominant_ner(sentence, record.subject) or UNTYPED
        self.ner_types[subject_type] += 1
        object_type = UNTYPED
        if not record.object.is_empty():
            object_type = dominant_ner(sentence, record.object) or UNTYPED
            self.ner_types[object_type] += 1
        typed = (subject_type != UNTYPED) + (object_type != UNTYPED)
        self.pair_typing[("none", "one", "both")[typed]] += 1
        self.relations[(lemmatized_relation(record, sentence), subject_type, object_type)] += 1

    def merge(self, other: "CorpusProfile") -> "CorpusProfile":
        return CorpusProfile(
            total=self.total + other.total,
            annotations=self.annotations + other.annotations,
            lengths={row: self.lengths[row].merge(other.lengths[row]) for row in LENGTH_ROWS},
            confidence=self.confidence.merge(other.confidence),
            confidence_histogram=[a + b for a, b in zip(self.confidence_histogram, other.confidence_histogram)],
            ner_types=self.ner_types + other.ner_types,
            pair_typing=self.pair_typing + other.pair_typing,
            relations=self.relations + other.relations,
        )

    def report(self, top_k: int = 10) -> "CorpusReport":
        def fraction(count: int) -> float:
            return count / self.total if self.total else 0.0

        by_pair: Dict[Tuple[str, str], Counter] = {}
        for (relation, subject_type, object_type), count in self.relations.items():
            by_pair.setdefault((subject_type, object_type), Counter())[relation] += count
        top = {
            pair: tuple(sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k])
            for pair, counter in sorted(by_pair.items())
        }
        return CorpusReport(
            total_triples=self.total,
            annotations={row: (self.annotations[row], fraction(self.annotations[row])) for row in ANNOTATION_ROWS},
            lengths={row: self.lengths[row] for row in LENGTH_ROWS},
            confidence=self.confidence,
            confidence_histogram=tuple(self.confidence_histogram),
            ner_types=dict(sorted(self.ner_types.items())),
            pair_typing={k: self.pair_typing[k] for k in ("both", "one", "none")},
            top_relations=top,
        )


@dataclass(frozen=True)
class CorpusReport:
    total_triples: int
    annotations: Dict[str, Tuple[int, float]]
    lengths: Dict[str, Moments]
    confidence: Moments
    confidence_histogram: Tuple[int, ...]
    ner_types: Dict[str, int]
    pair_typing: Dict[str, int]
    top_relations: Dict[Tuple[str, str], Tuple[Tuple[str, int], ...]]

    def to_dict(self) -> Dict[str, object]:
        return {
            "total_triples": self.total_triples,
            "annotations": {row: {"count": c, "fraction": f} for row, (c, f) in self.annotations.items()},
            "lengths": {row: m.to_dict() for row, m in self.lengths.items()},
            "confidence": {**self.confidence.to_dict(), "histogram": list(self.confidence_histogram)},
            "ner_types": self.ner_types,
            "pair_typing": self.pair_typing,
            "top_relations": [
                {"subject_type": s, "object_type": o,
                 "relations": [{"relation": r, "count": c} for r, c in rows]}
                for (s, o), rows in self.top_relations.items()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = [f"{'Total triples':<34}{self.total_triples:>12,}", "", "Triples with semantic annotations"]
        for row, (count, fraction) in self.annotations.items():
            lines.append(f"  {row.replace('_', ' '):<32}{count:>12,}  {fraction * 100:6.2f}%")
        lines += ["", "Length in tokens (mean +- stddev)"]
        for row, moments in self.lengths.items():
            lines.append(f"  {row:<32}{moments.mean:>8.2f} +- {moments.stddev:.2f}")
        lines.append(f"  {'confidence':<32}{self.confidence.mean:>8.2f} +- {self.confidence.stddev:.2f}")
        lines.append("  confidence histogram  " + " ".join(str(c) for c in self.confidence_histogram))
        lines += ["", "NER types over arguments"]
        for label, count in self.ner_types.items():
            lines.append(f"  {label:<32}{count:>12,}")
        lines += ["", "Argument pair typing"]
        for key, count in self.pair_typing.items():
            lines.append(f"  {key:<32}{count:>12,}")
        lines += ["", "Most frequent open relations per type pair"]
        for (subject_type, object_type), rows in self.top_relations.items():
            joined = ", ".join(f"{r} ({c:,})" for r, c in rows)
            lines.append(f"  {subject_type}-{object_type}: {joined}")
        return "\n".join(lines) + "\n"


def profile(stream: Iterable[Tuple[AnnotatedSentence, ExtractionRecord]], top_k: int = 10) -> CorpusReport:
    """Single-pass profile of a (sentence, triple) stream."""
    accumulator = CorpusProfile()
    for sentence, record in stream:
        accumulator.add(sentence, record)
    return accumulator.report(top_k)


def relation_frequencies(stream: Iterable[Tuple[AnnotatedSentence, ExtractionRecord]]) -> Counter:
    """Exact counts keyed by (lemmatized relation, subject type, object type)."""
    counts: Counter = Counter()
    for sentence, record in stream:
        subject_type = dominant_ner(sentence, record.subject) or UNTYPED
        object_type = UNTYPED if record.object.is_empty() else (dominant_ner(sentence, record.object) or UNTYPED)
        counts[(lemmatized_relation(record, sentence), subject_type, object_type)] += 1
    return counts


def relation_totals(counts: Counter) -> Dict[str, int]:
    """Collapse typed relation counts to one count per lemmatized relation."""
    totals: Dict[str, int] = {}
    for (relation, _, _), count in counts.items():
        totals[relation] = totals.get(relation, 0) + count
    return totals


def relation_frequency_tsv(counts: Counter) -> str:
    rows = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return "".join(f"{r}\t{s}\t{o}\t{c}\n" for (r, s, o), c in rows)
