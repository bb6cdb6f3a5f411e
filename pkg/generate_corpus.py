#!/usr/bin/env python3
"""
Generate a synthetic annotated corpus in the interchange format, together with
the resources the pipeline consumes: redirect map, page titles, KB files,
meta-facts and labeled confidence data.

Sentences follow a handful of templates (temporal and spatial prepositional
adjuncts, temporal noun modifiers, copular triples, pronoun subjects,
quantities, negation, date objects), so every rule family of the pipeline is
exercised. Output is fully determined by the seed.
"""

import argparse
import math
import os
import random
import sys
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from faker import Faker

from plugins.output.base import OutputPlugin
from plugins.output.registry import available_output_plugins, get_output_plugin

from triplecorpus.model import (
    AnnotatedSentence,
    DepEdge,
    DependencyGraph,
    EXTRACTOR_FLAGS,
    ExtractionRecord,
    NaryExtraction,
    NEGATIVE,
    Quantity,
    TemporalExpression,
    Token,
    WikiLink,
    constituent,
    to_entity_id,
    to_title_text,
)
from triplecorpus.serialization import EXTRACTION_KIND, dumps, encode_record, encode_sentence

ORG_SUFFIXES = ["Industries", "Group", "Records", "Press", "Holdings", "Studios"]
PRONOUNS = ["He", "She"]

# KB relation name per open-relation lemma.
KB_RELATIONS = {
    "found": "created",
    "visit": "hasVisited",
    "be": "isAffiliatedTo",
}
# Lemmas the KB sometimes stores with subject and object swapped.
REVERSED_RELATIONS = {"found": "wasCreatedBy"}
DATE_RELATION = "wasBornOnDate"
META_PREDICATE = "occursSince"

# Hidden weights behind labeled data; labels are drawn from this logistic model.
LABEL_WEIGHTS = {
    "in_minie_d": 2.5,
    "in_minie_a": 1.5,
    "dropped_all_optional_adverbials": -2.0,
    "dropped_all_optional_prepositions": -1.0,
}
LABEL_BIAS = -0.8


class SentenceBuilder:
    """Accumulates tokens, dependency edges, links and temporal expressions for one sentence."""

    def __init__(self) -> None:
        self.tokens: List[Tuple[str, str, str, str]] = []
        self.edges: List[Tuple[int, int, str]] = []
        self.links: List[Tuple[List[int], str]] = []
        self.timex: List[Tuple[int, int, str, str]] = []

    def add(self, surface: str, pos: str, ner: str = "O", lemma: Optional[str] = None) -> int:
        self.tokens.append((surface, lemma or surface.lower(), pos, ner))
        return len(self.tokens)

    def edge(self, governor: int, dependent: int, label: str) -> None:
        self.edges.append((governor, dependent, label))

    def name(self, words: Sequence[str], ner: str, pos: str = "NNP") -> List[int]:
        """Add a multi-word proper name; the last word is the head, earlier words attach by nn."""
        indices = [self.add(w, pos, ner, w) for w in words]
        for i in indices[:-1]:
            self.edge(indices[-1], i, "nn")
        return indices

    def link(self, indices: List[int], target: str) -> None:
        self.links.append((indices, target))

    def build(self, article_id: int, sentence_number: int, offset: int,
              title: Optional[str] = None) -> Tuple[AnnotatedSentence, int]:
        """Return the sentence and the article offset after it."""
        spans = []
        position = offset
        for surface, _, _, _ in self.tokens:
            spans.append((position, position + len(surface)))
            position += len(surface) + 1
        linked: Dict[int, WikiLink] = {}
        for indices, target in self.links:
            begin, end = spans[indices[0] - 1][0], spans[indices[-1] - 1][1]
            anchor = " ".join(self.tokens[i - 1][0] for i in indices)
            link = WikiLink(begin, end, anchor, target)
            for i in indices:
                linked[i] = link
        tokens = tuple(
            Token(i, surface, lemma, pos, ner, spans[i - 1][0], spans[i - 1][1], linked.get(i))
            for i, (surface, lemma, pos, ner) in enumerate(self.tokens, start=1)
        )
        graph = DependencyGraph(tuple(DepEdge(g, d, label) for g, d, label in self.edges))
        timex = tuple(
            TemporalExpression(first, last, kind, value,
                               f'<TIMEX3 tid="t{n}" type="{kind}" value="{value}">'
                               f'{" ".join(self.tokens[i - 1][0] for i in range(first, last + 1))}</TIMEX3>')
            for n, (first, last, kind, value) in enumerate(self.timex, start=1)
        )
        sentence = AnnotatedSentence(article_id, sentence_number, tokens, graph, timex, title)
        return sentence, position


@dataclass
class Extraction:
    """Template output before record keys are known."""

    subject: List[object]
    relation: List[int]
    arguments: List[List[object]]
    clause_type: str
    object: List[object]
    dropped_words: List[int] = field(default_factory=list)
    quantities: List[Quantity] = field(default_factory=list)
    polarity: str = "positive"
    negative_words: List[int] = field(default_factory=list)
    fact: Optional[Tuple[str, str, str]] = None


@dataclass
class Entity:
    words: List[str]
    title: str

    @property
    def entity_id(self) -> str:
        return to_entity_id(self.title)


class CorpusGenerator:
    """Generate consistent sentences, extractions, links and a matching KB."""

    def __init__(self, seed: int = 0, locale: Optional[str] = None) -> None:
        """Initialize with a seed and optional Faker locale."""
        self.rng = random.Random(seed)
        self.fake = Faker(locale) if locale else Faker()
        self.fake.seed_instance(seed)
        self.titles: Set[str] = set()
        self.redirects: Dict[str, str] = {}
        self.facts: List[Tuple[str, str, str]] = []
        self.born: Dict[str, int] = {}
        self.templates: List[Callable[[SentenceBuilder, Entity, bool], Extraction]] = [
            self.founded_in_year,
            self.opened_shop_in_city,
            self.visited_last_week,
            self.copular_organization,
            self.sold_quantity,
            self.never_visited,
            self.born_in_year,
        ]

    # -- entities -----------------------------------------------------------

    def _word(self, value: str) -> str:
        return "".join(value.split()) or "X"

    def _register(self, words: List[str]) -> Entity:
        entity = Entity(words, "_".join(words))
        self.titles.add(entity.title)
        return entity

    def person(self) -> Entity:
        return self._register([self._word(self.fake.first_name()), self._word(self.fake.last_name())])

    def city(self) -> Entity:
        return self._register([self._word(w) for w in self.fake.city().split()])

    def organization(self) -> Entity:
        return self._register([self._word(self.fake.last_name()), self.rng.choice(ORG_SUFFIXES)])

    def link_target(self, entity: Entity) -> str:
        """Entity title, or now and then a redirecting alias of it."""
        if len(entity.words) == 2 and self.rng.random() < 0.2:
            alias = f"{entity.words[1]},_{entity.words[0]}"
            self.redirects[alias] = entity.title
            return alias
        return entity.title

    def _argument(self, b: SentenceBuilder, entity: Entity, ner: str, linked: bool = True) -> List[int]:
        indices = b.name(entity.words, ner)
        if linked:
            b.link(indices, self.link_target(entity))
        return indices

    def _fact(self, subject: Entity, lemma: str, obj: Entity, linked: bool) -> Optional[Tuple[str, str, str]]:
        return (subject.entity_id, lemma, obj.entity_id) if linked else None

    # -- templates ----------------------------------------------------------

    def founded_in_year(self, b: SentenceBuilder, subject: Entity, linked: bool) -> Extraction:
        s = self._argument(b, subject, "PERSON", linked)
        v = b.add("founded", "VBD", lemma="found")
        org = self.organization()
        o = self._argument(b, org, "ORGANIZATION")
        p = b.add("in", "IN")
        year = str(self.rng.randint(1850, 2015))
        y = b.add(year, "CD", "DATE")
        dot = b.add(".", ".")
        b.edge(0, v, "root")
        b.edge(v, s[-1], "nsubj")
        b.edge(v, o[-1], "dobj")
        b.edge(v, p, "prep")
        b.edge(p, y, "pobj")
        b.edge(v, dot, "punct")
        b.timex.append((y, y, "DATE", year))
        return Extraction(s, [v], [o, [p, y]], "SVOA", o + [p, y], fact=self._fact(subject, "found", org, linked))

    def opened_shop_in_city(self, b: SentenceBuilder, subject: Entity, linked: bool) -> Extraction:
        s = self._argument(b, subject, "PERSON", linked)
        v = b.add("opened", "VBD", lemma="open")
        a = b.add("a", "DT")
        shop = b.add(self.rng.choice(["shop", "school", "factory", "studio"]), "NN")
        p = b.add("in", "IN")
        city = self.city()
        c = self._argument(b, city, "LOCATION")
        dot = b.add(".", ".")
        b.edge(0, v, "root")
        b.edge(v, s[-1], "nsubj")
        b.edge(v, shop, "dobj")
        b.edge(shop, a, "det")
        b.edge(v, p, "prep")
        b.edge(p, c[-1], "pobj")
        b.edge(v, dot, "punct")
        return Extraction(s, [v], [[a, shop], [p] + c], "SVOA", [shop, p] + c, dropped_words=[a])

    def visited_last_week(self, b: SentenceBuilder, subject: Entity, linked: bool) -> Extraction:
        s = self._argument(b, subject, "PERSON", linked)
        v = b.add("visited", "VBD", lemma="visit")
        city = self.city()
        c = self._argument(b, city, "LOCATION")
        last = b.add("last", "JJ", "DATE")
        unit = b.add(self.rng.choice(["week", "month", "year"]), "NN", "DATE")
        dot = b.add(".", ".")
        b.edge(0, v, "root")
        b.edge(v, s[-1], "nsubj")
        b.edge(v, c[-1], "dobj")
        b.edge(v, unit, "tmod")
        b.edge(unit, last, "amod")
        b.edge(v, dot, "punct")
        b.timex.append((last, unit, "DATE", "PAST_REF"))
        return Extraction(s, [v] + c, [c, [last, unit]], "SVOA", [last, unit],
                          fact=self._fact(subject, "visit", city, linked))

    def copular_organization(self, b: SentenceBuilder, subject: Entity, linked: bool) -> Extraction:
        s = self._argument(b, subject, "PERSON", linked)
        cop = b.add("is", "VBZ", lemma="be")
        org = self.organization()
        o = self._argument(b, org, "ORGANIZATION")
        dot = b.add(".", ".")
        b.edge(0, o[-1], "root")
        b.edge(o[-1], s[-1], "nsubj")
        b.edge(o[-1], cop, "cop")
        b.edge(o[-1], dot, "punct")
        return Extraction(s, [cop], [o], "SVC", o, fact=self._fact(subject, "be", org, linked))

    def acquired_by_pronoun(self, b: SentenceBuilder) -> Extraction:
        s = b.add(self.rng.choice(PRONOUNS), "PRP")
        v = b.add("acquired", "VBD", lemma="acquire")
        o = self._argument(b, self.organization(), "ORGANIZATION")
        dot = b.add(".", ".")
        b.edge(0, v, "root")
        b.edge(v, s, "nsubj")
        b.edge(v, o[-1], "dobj")
        b.edge(v, dot, "punct")
        return Extraction([s], [v], [o], "SVO", o)

    def sold_quantity(self, b: SentenceBuilder, subject: Entity, linked: bool) -> Extraction:
        s = self._argument(b, subject, "PERSON", linked)
        v = b.add("sold", "VBD", lemma="sell")
        n = b.add(str(self.rng.randint(2, 900)), "CD", "NUMBER")
        things = b.add(self.rng.choice(["shares", "paintings", "horses"]), "NNS")
        dot = b.add(".", ".")
        b.edge(0, v, "root")
        b.edge(v, s[-1], "nsubj")
        b.edge(v, things, "dobj")
        b.edge(things, n, "num")
        b.edge(v, dot, "punct")
        obj = ["Q_1", things]
        return Extraction(s, [v], [obj], "SVO", obj, quantities=[Quantity("Q_1", (n,))])

    def never_visited(self, b: SentenceBuilder, subject: Entity, linked: bool) -> Extraction:
        s = self._argument(b, subject, "PERSON", linked)
        never = b.add("never", "RB")
        v = b.add("visited", "VBD", lemma="visit")
        city = self.city()
        c = self._argument(b, city, "LOCATION")
        dot = b.add(".", ".")
        b.edge(0, v, "root")
        b.edge(v, s[-1], "nsubj")
        b.edge(v, never, "neg")
        b.edge(v, c[-1], "dobj")
        b.edge(v, dot, "punct")
        return Extraction(s, [v], [c], "SVO", c, polarity=NEGATIVE, negative_words=[never])

    def born_in_year(self, b: SentenceBuilder, subject: Entity, linked: bool) -> Extraction:
        s = self._argument(b, subject, "PERSON", linked)
        was = b.add("was", "VBD", lemma="be")
        born = b.add("born", "VBN", lemma="bear")
        p = b.add("in", "IN")
        year = self.rng.randint(1850, 2000)
        y = b.add(str(year), "CD", "DATE")
        dot = b.add(".", ".")
        b.edge(0, born, "root")
        b.edge(born, s[-1], "nsubjpass")
        b.edge(born, was, "auxpass")
        b.edge(born, p, "prep")
        b.edge(p, y, "pobj")
        b.edge(born, dot, "punct")
        b.timex.append((y, y, "DATE", str(year)))
        self.born[subject.entity_id] = year
        return Extraction(s, [was, born, p], [[p, y]], "SVA", [y])

    # -- records ------------------------------------------------------------

    def flags(self) -> Tuple[str, ...]:
        return tuple(name for name in EXTRACTOR_FLAGS if self.rng.random() < 0.35)

    def record(self, sentence: AnnotatedSentence, index: int, extraction: Extraction,
               flags: Tuple[str, ...] = ()) -> ExtractionRecord:
        return ExtractionRecord(
            article_id=sentence.article_id,
            sentence_number=sentence.sentence_number,
            extraction_index=index,
            nary=NaryExtraction(
                constituent("subject", extraction.subject),
                constituent("relation", extraction.relation),
                tuple(constituent("argument", a) for a in extraction.arguments),
                extraction.clause_type,
            ),
            subject=constituent("subject", extraction.subject),
            relation=constituent("relation", extraction.relation),
            object=constituent("object", extraction.object),
            extraction_type=extraction.clause_type,
            polarity=extraction.polarity,
            negative_words=tuple(extraction.negative_words),
            quantities=tuple(extraction.quantities),
            dropped_words=tuple(extraction.dropped_words),
            flags=flags,
        )

    def article(self, article_id: int, sentences: Optional[int] = None) -> List[Tuple[AnnotatedSentence, List[ExtractionRecord]]]:
        """One article about a person; its first sentence leaves the person unlinked for self-linking."""
        subject = self.person()
        count = sentences or self.rng.randint(2, 4)
        documents = []
        offset = 0
        for number in range(1, count + 1):
            b = SentenceBuilder()
            if number > 1 and self.rng.random() < 0.15:
                extraction = self.acquired_by_pronoun(b)
            else:
                who = subject if number == 1 or self.rng.random() < 0.7 else self.person()
                template = self.rng.choice(self.templates)
                extraction = template(b, who, number > 1)
            sentence, offset = b.build(article_id, number, offset, subject.title)
            if extraction.fact is not None:
                self.facts.append(extraction.fact)
            documents.append((sentence, [self.record(sentence, 0, extraction, self.flags())]))
        return documents

    def corpus(self, articles: int, first_article_id: int = 1) -> List[Tuple[AnnotatedSentence, List[ExtractionRecord]]]:
        documents = []
        for article_id in range(first_article_id, first_article_id + articles):
            documents.extend(self.article(article_id))
        return documents

    def labeled(self, count: int, first_article_id: int = 1_000_000) -> List[Tuple[AnnotatedSentence, ExtractionRecord, bool]]:
        """Single-sentence examples labeled by a hidden logistic model over extractor flags."""
        examples = []
        for n in range(count):
            b = SentenceBuilder()
            subject = self.person()
            extraction = self.rng.choice(self.templates)(b, subject, True)
            sentence, _ = b.build(first_article_id + n, 1, 0, subject.title)
            flags = self.flags()
            margin = LABEL_BIAS + sum(w for name, w in LABEL_WEIGHTS.items() if name in flags)
            label = self.rng.random() < 1.0 / (1.0 + math.exp(-margin))
            examples.append((sentence, self.record(sentence, 0, extraction, flags), label))
        return examples

    # -- resources ----------------------------------------------------------

    def kb_rows(self, hit_rate: float = 0.6, date_rate: float = 0.5) -> List[str]:
        """KB TSV rows for a share of generated facts, plus date facts and distractors."""
        rows = set()
        for subject, lemma, obj in self.facts:
            if self.rng.random() >= hit_rate:
                continue
            if lemma in REVERSED_RELATIONS and self.rng.random() < 0.5:
                rows.add(f"<{obj}>\t<{REVERSED_RELATIONS[lemma]}>\t<{subject}>")
            else:
                rows.add(f"<{subject}>\t<{KB_RELATIONS[lemma]}>\t<{obj}>")
        for entity, year in sorted(self.born.items()):
            if self.rng.random() < date_rate:
                rows.add(f'<{entity}>\t<{DATE_RELATION}>\t"{year}-##-##"^^xsd:date')
        titles = sorted(self.titles)
        for _ in range(len(titles) // 4):
            a, b = self.rng.sample(titles, 2) if len(titles) > 1 else (titles[0], titles[0])
            rows.add(f"<{a}>\t<{self.rng.choice(['knows', 'isLocatedIn'])}>\t<{b}>")
        return sorted(rows)

    def meta_fact_rows(self, kb_rows: Sequence[str], rate: float = 0.3) -> List[str]:
        rows = []
        for row in kb_rows:
            if '"' not in row and self.rng.random() < rate:
                rows.append(f'{row}\t<{META_PREDICATE}>\t"{self.rng.randint(1900, 2015)}-##-##"^^xsd:date')
        return rows

    def redirect_rows(self) -> List[str]:
        return [f"{to_title_text(alias)}\t{to_title_text(target)}" for alias, target in sorted(self.redirects.items())]

    def title_rows(self) -> List[str]:
        return sorted(to_title_text(t) for t in self.titles)


def corpus_lines(documents: Sequence[Tuple[AnnotatedSentence, List[ExtractionRecord]]]) -> List[str]:
    lines = []
    for sentence, records in documents:
        lines.append(dumps(encode_sentence(sentence)))
        lines.extend(dumps(encode_record(r, kind=EXTRACTION_KIND)) for r in records)
    return lines


def labeled_lines(examples: Sequence[Tuple[AnnotatedSentence, ExtractionRecord, bool]]) -> List[str]:
    lines = []
    for sentence, record, label in examples:
        lines.append(dumps(encode_sentence(sentence)))
        lines.append(dumps({**encode_record(record), "label": int(label)}))
    return lines


def write(plugin: OutputPlugin, lines: Sequence[str]) -> int:
    with plugin:
        return plugin.output_all(lines)


def main():
    """Main function to parse arguments and generate a corpus with its resources."""
    parser = argparse.ArgumentParser(description="Generate a synthetic annotated corpus and matching resources")
    parser.add_argument("--articles", type=int, default=10, help="Number of articles to generate")
    parser.add_argument("--labeled", type=int, default=0, help="Number of labeled confidence examples")
    parser.add_argument("--seed", type=int, default=0, help="Random seed")
    parser.add_argument("--locale", type=str, help="Locale for generating fake names (e.g., 'en_US', 'de_DE')")
    parser.add_argument("--output", type=str, default="terminal", choices=available_output_plugins(),
                        help="Output plugin to use")
    parser.add_argument("--output-dir", type=str, help="Directory for file output")
    args = parser.parse_args()

    if args.output == "file" and not args.output_dir:
        parser.error("--output-dir is required when using file output")
    if args.articles < 0 or args.labeled < 0:
        parser.error("Counts must not be negative")

    generator = CorpusGenerator(args.seed, args.locale)
    documents = generator.corpus(args.articles)
    examples = generator.labeled(args.labeled) if args.labeled else []

    if args.output == "terminal":
        write(get_output_plugin("terminal"), corpus_lines(documents))
        print(f"Generated {args.articles} articles", file=sys.stderr)
        return 0

    kb = generator.kb_rows()
    files = {
        "corpus.jsonl": corpus_lines(documents),
        "redirects.tsv": generator.redirect_rows(),
        "titles.txt": generator.title_rows(),
        "kb.tsv": kb,
        "meta-facts.tsv": generator.meta_fact_rows(kb),
    }
    if examples:
        files["labeled.jsonl"] = labeled_lines(examples)
    for name, lines in files.items():
        count = write(get_output_plugin("file", file_path=os.path.join(args.output_dir, name)), lines)
        print(f"Wrote {count} lines to {os.path.join(args.output_dir, name)}")
    records = sum(len(r) for _, r in documents)
    print(f"Generated {args.articles} articles ({len(documents)} sentences, {records} extractions)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
