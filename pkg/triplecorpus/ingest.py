"""
Corpus ingestion: interchange parsing, first-phrase self-linking and
redirect canonicalization.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import CorpusFormatError, RedirectCycleError
from .model import (
    AnnotatedSentence,
    ExtractionRecord,
    WikiLink,
    to_entity_id,
    to_title_text,
)
from .serialization import (
    EXTRACTION_KIND,
    SENTENCE_KIND,
    TRIPLE_KIND,
    decode_record,
    decode_sentence,
    loads,
)

logger = logging.getLogger(__name__)

MAX_REDIRECT_HOPS = 16

SELF_LINK_ARTICLE = "article"
SELF_LINK_FIRST_SENTENCE = "first-sentence"
SELF_LINK_SCOPES = (SELF_LINK_ARTICLE, SELF_LINK_FIRST_SENTENCE)

Line = Union[str, bytes]
Document = Tuple[AnnotatedSentence, List[ExtractionRecord]]


@dataclass
class RejectLog:
    """Lenient-mode rejects: a count per reason code plus the offending lines."""

    by_reason: Counter = field(default_factory=Counter)
    entries: List[Dict[str, object]] = field(default_factory=list)

    def add(self, error: CorpusFormatError, raw: str = "") -> None:
        self.by_reason[error.reason] += 1
        self.entries.append({"line": error.line_number, "reason": error.reason, "message": error.message, "raw": raw})
        logger.warning("Skipping %s", error)

    @property
    def total(self) -> int:
        return sum(self.by_reason.values())


def _decode_line(raw: Line) -> str:
    if isinstance(raw, bytes):
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise CorpusFormatError("invalid-json", f"line is not UTF-8: {e.reason}")
    return raw


def check_record_tokens(sentence: AnnotatedSentence, record: ExtractionRecord) -> None:
    """Raise unless every token index the record mentions exists in its sentence."""
    referenced: List[int] = []
    for part in (record.subject, record.relation, record.object, record.nary.subject, record.nary.relation):
        referenced.extend(part.tokens)
    for argument in record.nary.arguments:
        referenced.extend(argument.tokens)
    referenced.extend(record.negative_words)
    referenced.extend(record.modality_words)
    referenced.extend(record.dropped_words)
    for quantity in record.quantities:
        referenced.extend(quantity.tokens)
    annotations = list(record.spate)
    if record.attribution is not None:
        referenced.extend(record.attribution.phrase)
        annotations.extend(record.attribution.spate)
    for annotation in annotations:
        referenced.extend(annotation.words)
        if annotation.head is not None:
            referenced.append(annotation.head)
    missing = sorted({i for i in referenced if not sentence.has_token(i)})
    if missing:
        raise CorpusFormatError(
            "token-out-of-range",
            f"extraction {record.extraction_index} references tokens {missing} outside sentence "
            f"{sentence.article_id}/{sentence.sentence_number}",
        )


def parse_document(stream: Iterable[Line], strict: bool = True,
                   rejects: Optional[RejectLog] = None) -> Iterator[Document]:
    """Yield (sentence, extractions) pairs in file order.

    Extraction lines must directly follow the sentence they belong to. In
    strict mode the first malformed line raises CorpusFormatError tagged with
    its line number; otherwise the line is recorded in `rejects` and skipped.
    An extraction whose sentence was rejected is rejected as an orphan.
    """
    if rejects is None:
        rejects = RejectLog()
    current: Optional[AnnotatedSentence] = None
    extractions: List[ExtractionRecord] = []

    for line_number, raw in enumerate(stream, start=1):
        text = ""
        try:
            text = _decode_line(raw).strip()
            if not text:
                continue
            obj = loads(text)
            kind = obj["kind"]
            if kind == SENTENCE_KIND:
                sentence = decode_sentence(obj)
                if current is not None:
                    yield current, extractions
                current, extractions = sentence, []
                continue
            if kind not in (EXTRACTION_KIND, TRIPLE_KIND):
                raise CorpusFormatError("unknown-kind", f"unknown object kind {kind!r}")
            key = (obj["article_id"], obj["sentence_number"])
            if current is None or current.key != key:
                raise CorpusFormatError("orphan-extraction", f"extraction for sentence {key} has no preceding sentence")
            record = decode_record(obj)
            check_record_tokens(current, record)
            extractions.append(record)
        except CorpusFormatError as e:
            located = e.at_line(line_number)
            if strict:
                raise located
            rejects.add(located, text)

    if current is not None:
        yield current, extractions


def self_link_first_phrase(sentences: Sequence[AnnotatedSentence], page_title: str,
                           scope: str = SELF_LINK_ARTICLE) -> List[AnnotatedSentence]:
    """Link the earliest unlinked phrase that spells the article's page title.

    Matching is case-sensitive on the token surfaces joined as they stand in
    the article: one space where the character offsets leave a gap, none
    where tokens touch. Underscores in the title read as spaces. At most one
    link is added per article; text, spans and existing links are never
    modified.
    """
    title = to_title_text(page_title)
    result = list(sentences)
    if not title:
        return result
    ordered = sorted(range(len(result)), key=lambda i: result[i].sentence_number)
    if scope == SELF_LINK_FIRST_SENTENCE:
        ordered = ordered[:1]

    for position in ordered:
        sentence = result[position]
        match = _find_title(sentence, title)
        if match is None:
            continue
        first, last = match
        tokens = list(sentence.tokens)
        link = WikiLink(tokens[first].begin, tokens[last].end, title, page_title)
        for i in range(first, last + 1):
            tokens[i] = replace(tokens[i], link=link)
        result[position] = sentence.with_tokens(tokens)
        logger.debug("Self-linked %r in article %d sentence %d", title, sentence.article_id, sentence.sentence_number)
        break
    return result


def _find_title(sentence: AnnotatedSentence, title: str) -> Optional[Tuple[int, int]]:
    tokens = sentence.tokens
    for start in range(len(tokens)):
        joined = ""
        for end in range(start, len(tokens)):
            token = tokens[end]
            if token.link is not None:
                break
            if end == start:
                joined = token.surface
            else:
                gap = " " if token.begin > tokens[end - 1].end else ""
                joined = f"{joined}{gap}{token.surface}"
            if len(joined) >= len(title):
                if joined == title:
                    return start, end
                break
    return None


def canonicalize_link(target: str, redirects: Mapping[str, str]) -> str:
    """Follow redirects to their fixed point; raise RedirectCycleError on a loop or too many hops."""
    chain = [target]
    current = target
    while current in redirects:
        following = redirects[current]
        if following == current:
            break
        if following in chain or len(chain) > MAX_REDIRECT_HOPS:
            raise RedirectCycleError(target, chain + [following])
        chain.append(following)
        current = following
    return current


def canonical_links(sentence: AnnotatedSentence, record: ExtractionRecord,
                    redirects: Mapping[str, str]) -> Dict[str, str]:
    """Canonical entity id for every link touching the triple or its quantities."""
    touched = record.triple_tokens()
    for quantity in record.quantities:
        touched.update(quantity.tokens)
    mapping: Dict[str, str] = {}
    for link, anchor in sentence.links():
        if touched.intersection(anchor):
            mapping[link.target] = canonicalize_link(to_entity_id(link.target), redirects)
    return mapping


def link_record(sentence: AnnotatedSentence, record: ExtractionRecord,
                redirects: Mapping[str, str]) -> ExtractionRecord:
    links = canonical_links(sentence, record, redirects)
    return replace(record, canonical_links=tuple(links.items()))


def read_tsv(lines: Iterable[Line], columns: int, strict: bool = True,
             rejects: Optional[RejectLog] = None) -> Iterator[Tuple[int, List[str]]]:
    """Yield (line number, fields) for a UTF-8 TSV stream with a fixed column count."""
    for line_number, raw in enumerate(lines, start=1):
        try:
            text = _decode_line(raw).rstrip("\r\n")
            if not text.strip() or text.startswith("#"):
                continue
            fields = text.split("\t")
            if len(fields) != columns or not all(f.strip() for f in fields):
                raise CorpusFormatError("malformed-tsv", f"expected {columns} non-empty tab-separated columns")
        except CorpusFormatError as e:
            if strict:
                raise e.at_line(line_number)
            if rejects is not None:
                rejects.add(e.at_line(line_number))
            continue
        yield line_number, [f.strip() for f in fields]


def load_redirects(path: str, strict: bool = True, rejects: Optional[RejectLog] = None) -> Dict[str, str]:
    """Read a `source<TAB>target` redirect map keyed by entity id."""
    redirects: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for _, (source, target) in read_tsv(f, 2, strict, rejects):
            redirects[to_entity_id(source)] = to_entity_id(target)
    logger.info("Loaded %d redirects from %s", len(redirects), path)
    return redirects


def load_titles(path: str) -> FrozenSet[str]:
    """Read a page-title set, one title per line, in surface (space-separated) form."""
    with open(path, "r", encoding="utf-8") as f:
        titles = frozenset(to_title_text(line) for line in f if line.strip())
    logger.info("Loaded %d page titles from %s", len(titles), path)
    return titles


def group_articles(documents: Iterable[Document]) -> Iterator[List[Document]]:
    """Group consecutive documents of the same article."""
    batch: List[Document] = []
    for document in documents:
        if batch and batch[-1][0].article_id != document[0].article_id:
            yield batch
            batch = []
        batch.append(document)
    if batch:
        yield batch


def self_link_article(article: List[Document], scope: str = SELF_LINK_ARTICLE) -> List[Document]:
    """Apply first-phrase self-linking to one article using the title its sentences carry."""
    title = next((s.article_title for s, _ in article if s.article_title), None)
    if title is None:
        return article
    linked = self_link_first_phrase([s for s, _ in article], title, scope)
    return [(sentence, records) for sentence, (_, records) in zip(linked, article)]
