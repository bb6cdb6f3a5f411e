"""
Typed, immutable records for annotated sentences and OIE triples.

Sentences come from the external NLP front end; triples carry the full
metadata set (provenance, n-ary source extraction, polarity, modality,
attribution, quantities, dropped words, spatio-temporal annotations,
confidence and canonical links). Every type validates its own invariants on
construction and raises CorpusFormatError with a stable reason code.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .errors import CorpusFormatError

POSITIVE = "positive"
NEGATIVE = "negative"
CERTAINTY = "certainty"
POSSIBILITY = "possibility"

CLAUSE_TYPES = ("SV", "SVA", "SVC", "SVO", "SVOO", "SVOA", "SVOC")
TIMEX_TYPES = ("DATE", "TIME", "DURATION", "SET")
ROLES = ("subject", "relation", "object", "argument")

TEMPORAL_TRIPLE = "temporal-triple"
TEMPORAL_ARGUMENT = "temporal-argument"
SPATIAL_TRIPLE = "spatial-triple"
SPATIAL_ARGUMENT = "spatial-argument"
TEMPORAL_REFERENCE = "temporal-reference"
SPATIAL_REFERENCE = "spatial-reference"
SPATE_KINDS = (
    TEMPORAL_TRIPLE, TEMPORAL_ARGUMENT, SPATIAL_TRIPLE,
    SPATIAL_ARGUMENT, TEMPORAL_REFERENCE, SPATIAL_REFERENCE,
)
WHOLE_TRIPLE = "whole-triple"
SPATE_TARGETS = (WHOLE_TRIPLE, "subject", "object")

# Booleans set by the upstream extractor; absent means false.
EXTRACTOR_FLAGS = (
    "dropped_all_optional_adverbials",
    "dropped_all_optional_prepositions",
    "in_minie_a",
    "in_minie_d",
)

Item = Union[int, str]


def _fail(reason: str, message: str) -> None:
    raise CorpusFormatError(reason, message)


def to_entity_id(title: str) -> str:
    """Canonical entity id form of a page title (spaces become underscores)."""
    return title.strip().replace(" ", "_")


def to_title_text(title: str) -> str:
    """Surface form of a page title (underscores become spaces)."""
    return title.strip().replace("_", " ")


# ---------------------------------------------------------------------------
# Sentence side
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WikiLink:
    begin: int
    end: int
    anchor: str
    target: str

    def __post_init__(self) -> None:
        if self.begin >= self.end:
            _fail("bad-link", f"link offsets [{self.begin}, {self.end}) are empty")
        if not self.anchor or not self.target:
            _fail("bad-link", "link anchor and target must be non-empty")


@dataclass(frozen=True)
class Token:
    index: int
    surface: str
    lemma: str
    pos: str
    ner: str
    begin: int
    end: int
    link: Optional[WikiLink] = None

    def __post_init__(self) -> None:
        if self.index < 1:
            _fail("token-order", f"token index {self.index} must be >= 1")
        if self.begin >= self.end:
            _fail("span-overlap", f"token {self.index} has empty span [{self.begin}, {self.end})")


@dataclass(frozen=True)
class DepEdge:
    governor: int
    dependent: int
    label: str


@dataclass(frozen=True)
class DependencyGraph:
    """Typed dependency edges with derived governor/children lookups."""

    edges: Tuple[DepEdge, ...]
    _governor: Dict[int, DepEdge] = field(init=False, repr=False, compare=False, hash=False)
    _children: Dict[int, Tuple[DepEdge, ...]] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        governor: Dict[int, DepEdge] = {}
        children: Dict[int, List[DepEdge]] = {}
        for edge in self.edges:
            if edge.dependent in governor:
                _fail("duplicate-dependent", f"token {edge.dependent} has more than one governor")
            governor[edge.dependent] = edge
            children.setdefault(edge.governor, []).append(edge)
        object.__setattr__(self, "_governor", governor)
        object.__setattr__(
            self, "_children",
            {gov: tuple(sorted(kids, key=lambda e: e.dependent)) for gov, kids in children.items()},
        )

    def governor_edge(self, index: int) -> Optional[DepEdge]:
        """Return the edge that attaches a token to its governor."""
        return self._governor.get(index)

    def label_of(self, index: int) -> Optional[str]:
        edge = self._governor.get(index)
        return edge.label if edge else None

    def children(self, index: int) -> Tuple[DepEdge, ...]:
        """Outgoing edges of a token, ordered by dependent index."""
        return self._children.get(index, ())

    def roots(self) -> List[int]:
        return [edge.dependent for edge in self._children.get(0, ())]

    def descendants(self, index: int, excluded: FrozenSet[str] = frozenset()) -> Set[int]:
        """All tokens below `index`, not descending through excluded labels."""
        found: Set[int] = set()
        stack = [index]
        while stack:
            current = stack.pop()
            for edge in self.children(current):
                if edge.label in excluded or edge.dependent in found:
                    continue
                found.add(edge.dependent)
                stack.append(edge.dependent)
        return found

    def find_cycle(self) -> Optional[List[int]]:
        """Return a dependent->governor path that loops, or None."""
        for start in self._governor:
            seen = [start]
            current = start
            while True:
                edge = self._governor.get(current)
                if edge is None or edge.governor == 0:
                    break
                current = edge.governor
                if current in seen:
                    return seen[seen.index(current):] + [current]
                seen.append(current)
        return None


@dataclass(frozen=True)
class TimexPayload:
    timex_type: str
    value: str
    xml: str

    def __post_init__(self) -> None:
        if self.timex_type not in TIMEX_TYPES:
            _fail("bad-annotation", f"unknown TIMEX3 type {self.timex_type!r}")


@dataclass(frozen=True)
class TemporalExpression:
    first_token: int
    last_token: int
    timex_type: str
    value: str
    xml: str

    def __post_init__(self) -> None:
        if self.first_token > self.last_token:
            _fail("timex-range", f"temporal expression [{self.first_token}, {self.last_token}] is empty")
        if self.timex_type not in TIMEX_TYPES:
            _fail("timex-range", f"unknown TIMEX3 type {self.timex_type!r}")

    @property
    def span(self) -> range:
        return range(self.first_token, self.last_token + 1)

    def payload(self) -> TimexPayload:
        return TimexPayload(self.timex_type, self.value, self.xml)


@dataclass(frozen=True)
class AnnotatedSentence:
    article_id: int
    sentence_number: int
    tokens: Tuple[Token, ...]
    depgraph: DependencyGraph
    temporal_expressions: Tuple[TemporalExpression, ...] = ()
    article_title: Optional[str] = None
    _by_index: Dict[int, Token] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if not self.tokens:
            _fail("missing-field", "sentence has no tokens")
        by_index: Dict[int, Token] = {}
        previous: Optional[Token] = None
        for token in self.tokens:
            if previous is not None:
                if token.index <= previous.index:
                    _fail("token-order", f"token {token.index} follows token {previous.index}")
                if token.begin < previous.end:
                    _fail("span-overlap", f"token {token.index} overlaps token {previous.index}")
            by_index[token.index] = token
            previous = token
        object.__setattr__(self, "_by_index", by_index)

        roots = 0
        for edge in self.depgraph.edges:
            if edge.governor == 0:
                roots += 1
            elif edge.governor not in by_index:
                _fail("dangling-dependency-endpoint",
                      f"dangling dependency endpoint: governor {edge.governor} ({edge.label})")
            if edge.dependent not in by_index:
                _fail("dangling-dependency-endpoint",
                      f"dangling dependency endpoint: dependent {edge.dependent} ({edge.label})")
        if roots != 1:
            _fail("root-count", f"expected exactly one root edge, found {roots}")
        cycle = self.depgraph.find_cycle()
        if cycle:
            _fail("dependency-cycle", f"dependency cycle through tokens {cycle}")
        for timex in self.temporal_expressions:
            if timex.first_token not in by_index or timex.last_token not in by_index:
                _fail("timex-range",
                      f"temporal expression [{timex.first_token}, {timex.last_token}] is outside the sentence")

    def token(self, index: int) -> Token:
        return self._by_index[index]

    def has_token(self, index: int) -> bool:
        return index in self._by_index

    @property
    def key(self) -> Tuple[int, int]:
        return (self.article_id, self.sentence_number)

    def surface(self, indices: Iterable[int]) -> str:
        return " ".join(self._by_index[i].surface for i in indices)

    def links(self) -> List[Tuple[WikiLink, Tuple[int, ...]]]:
        """Distinct links in the sentence with the token indices of their anchors."""
        anchors: Dict[WikiLink, List[int]] = {}
        for token in self.tokens:
            if token.link is not None:
                anchors.setdefault(token.link, []).append(token.index)
        return [(link, tuple(indices)) for link, indices in anchors.items()]

    def ner_runs(self) -> List[Tuple[str, Tuple[int, ...]]]:
        """Maximal runs of adjacent tokens sharing the same non-O NER label."""
        runs: List[Tuple[str, Tuple[int, ...]]] = []
        current: List[int] = []
        label = "O"
        for token in self.tokens:
            if token.ner != "O" and token.ner == label and current and token.index == current[-1] + 1:
                current.append(token.index)
                continue
            if current and label != "O":
                runs.append((label, tuple(current)))
            current = [token.index]
            label = token.ner
        if current and label != "O":
            runs.append((label, tuple(current)))
        return runs

    def with_tokens(self, tokens: Sequence[Token]) -> "AnnotatedSentence":
        return replace(self, tokens=tuple(tokens))


# ---------------------------------------------------------------------------
# Triple side
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constituent:
    """Ordered sentence token indices, possibly interleaved with quantity markers."""

    items: Tuple[Item, ...]
    role: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            _fail("constituent-order", f"unknown constituent role {self.role!r}")
        last = 0
        for item in self.items:
            if isinstance(item, bool) or not isinstance(item, (int, str)):
                _fail("constituent-order", f"constituent item {item!r} is neither a token index nor a marker")
            if isinstance(item, int):
                if item <= last:
                    _fail("constituent-order", f"{self.role} token indices are not strictly increasing")
                last = item

    @property
    def tokens(self) -> Tuple[int, ...]:
        return tuple(i for i in self.items if isinstance(i, int))

    @property
    def markers(self) -> Tuple[str, ...]:
        return tuple(i for i in self.items if isinstance(i, str))

    def is_empty(self) -> bool:
        return not self.items

    def __len__(self) -> int:
        return len(self.items)

    def without(self, indices: Iterable[int]) -> "Constituent":
        drop = set(indices)
        return replace(self, items=tuple(i for i in self.items if not (isinstance(i, int) and i in drop)))

    def with_tokens(self, indices: Iterable[int]) -> "Constituent":
        """Merge token indices in order; markers keep their place among tokens."""
        pending = sorted(set(indices) - set(self.tokens))
        merged: List[Item] = []
        for item in self.items:
            if isinstance(item, int):
                while pending and pending[0] < item:
                    merged.append(pending.pop(0))
            merged.append(item)
        merged.extend(pending)
        return replace(self, items=tuple(merged))


def constituent(role: str, items: Iterable[Item] = ()) -> Constituent:
    return Constituent(tuple(items), role)


@dataclass(frozen=True)
class NaryExtraction:
    subject: Constituent
    relation: Constituent
    arguments: Tuple[Constituent, ...]
    clause_type: str

    def __post_init__(self) -> None:
        if self.clause_type == "SV" and self.arguments:
            _fail("constituent-order", "an SV n-ary extraction cannot have arguments")

    @property
    def size(self) -> int:
        return 2 + len(self.arguments)


@dataclass(frozen=True)
class SpaTeAnnotation:
    """A spatial or temporal qualifier on the triple, an argument, or a reference."""

    kind: str
    core_words: Tuple[int, ...]
    target: str
    predicate: Optional[str] = None
    pre_modifiers: Tuple[int, ...] = ()
    post_modifiers: Tuple[int, ...] = ()
    timex: Optional[TimexPayload] = None
    head: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in SPATE_KINDS:
            _fail("bad-annotation", f"unknown annotation kind {self.kind!r}")
        if self.target not in SPATE_TARGETS:
            _fail("bad-annotation", f"unknown annotation target {self.target!r}")
        if not self.core_words:
            _fail("bad-annotation", f"{self.kind} annotation has no core words")
        if self.is_temporal != (self.timex is not None):
            _fail("bad-annotation", f"{self.kind} annotation must {'' if self.is_temporal else 'not '}carry TIMEX3")
        if self.is_argument_level != (self.head is not None):
            _fail("bad-annotation", f"{self.kind} annotation has a wrong modified-head setting")
        if self.is_triple_level != (self.target == WHOLE_TRIPLE):
            _fail("bad-annotation", f"{self.kind} annotation cannot target {self.target}")

    @property
    def is_temporal(self) -> bool:
        return self.kind.startswith("temporal")

    @property
    def is_spatial(self) -> bool:
        return self.kind.startswith("spatial")

    @property
    def is_triple_level(self) -> bool:
        return self.kind.endswith("-triple")

    @property
    def is_argument_level(self) -> bool:
        return self.kind.endswith("-argument")

    @property
    def is_reference(self) -> bool:
        return self.kind.endswith("-reference")

    @property
    def words(self) -> Tuple[int, ...]:
        """Every token carried by the annotation."""
        return tuple(sorted(set(self.core_words) | set(self.pre_modifiers) | set(self.post_modifiers)))


@dataclass(frozen=True)
class Attribution:
    phrase: Tuple[int, ...]
    predicate: str
    polarity: str = POSITIVE
    modality: str = CERTAINTY
    spate: Tuple[SpaTeAnnotation, ...] = ()

    def __post_init__(self) -> None:
        if not self.phrase:
            _fail("missing-field", "attribution phrase is empty")
        _check_factuality(self.polarity, self.modality)


@dataclass(frozen=True)
class Quantity:
    marker: str
    tokens: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.marker.startswith("Q_") or not self.tokens:
            _fail("missing-quantity", f"malformed quantity {self.marker!r}")


def _check_factuality(polarity: str, modality: str) -> None:
    if polarity not in (POSITIVE, NEGATIVE):
        _fail("schema-violation", f"unknown polarity {polarity!r}")
    if modality not in (CERTAINTY, POSSIBILITY):
        _fail("schema-violation", f"unknown modality {modality!r}")


@dataclass(frozen=True)
class ExtractionRecord:
    """One minimized OIE triple with its full metadata."""

    article_id: int
    sentence_number: int
    extraction_index: int
    nary: NaryExtraction
    subject: Constituent
    relation: Constituent
    object: Constituent
    extraction_type: str
    polarity: str = POSITIVE
    negative_words: Tuple[int, ...] = ()
    modality: str = CERTAINTY
    modality_words: Tuple[int, ...] = ()
    attribution: Optional[Attribution] = None
    quantities: Tuple[Quantity, ...] = ()
    dropped_words: Tuple[int, ...] = ()
    spate: Tuple[SpaTeAnnotation, ...] = ()
    confidence: Optional[float] = None
    canonical_links: Tuple[Tuple[str, str], ...] = ()
    flags: Tuple[str, ...] = ()
    warnings: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "canonical_links", tuple(sorted(dict(self.canonical_links).items())))
        object.__setattr__(self, "flags", tuple(sorted(set(self.flags))))
        if self.subject.is_empty() or self.relation.is_empty():
            _fail("missing-field", "subject and relation must be non-empty")
        if self.object.is_empty() and self.extraction_type != "SV":
            _fail("missing-field", f"object may only be empty for SV extractions, not {self.extraction_type}")
        _check_factuality(self.polarity, self.modality)
        known = {q.marker for q in self.quantities}
        for part in (self.subject, self.relation, self.object):
            for marker in part.markers:
                if marker not in known:
                    _fail("missing-quantity", f"quantity marker {marker} has no quantities entry")
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            _fail("bad-confidence", f"confidence {self.confidence} is outside [0, 1]")
        for name in self.flags:
            if name not in EXTRACTOR_FLAGS:
                _fail("schema-violation", f"unknown extractor flag {name!r}")

    @property
    def key(self) -> Tuple[int, int, int]:
        return (self.article_id, self.sentence_number, self.extraction_index)

    @property
    def arguments(self) -> Tuple[Constituent, Constituent]:
        return (self.subject, self.object)

    def triple_tokens(self) -> Set[int]:
        return set(self.subject.tokens) | set(self.relation.tokens) | set(self.object.tokens)

    def quantity(self, marker: str) -> Optional[Quantity]:
        for q in self.quantities:
            if q.marker == marker:
                return q
        return None

    def has_flag(self, name: str) -> bool:
        return name in self.flags

    @property
    def links_map(self) -> Dict[str, str]:
        return dict(self.canonical_links)

    def has_temporal(self) -> bool:
        return any(a.is_temporal for a in self.spate)

    def has_spatial(self) -> bool:
        return any(a.is_spatial for a in self.spate)

    def render(self, sentence: AnnotatedSentence) -> Tuple[str, str, str]:
        """Surface strings of subject, relation and object; markers stay verbatim."""
        def text(part: Constituent) -> str:
            return " ".join(sentence.token(i).surface if isinstance(i, int) else i for i in part.items)
        return text(self.subject), text(self.relation), text(self.object)


def constituent_head(sentence: AnnotatedSentence, tokens: Sequence[int]) -> Optional[int]:
    """The token of `tokens` not governed by another of `tokens`; ties go to the smallest index.

    Falls back to the last token when no token qualifies.
    """
    if not tokens:
        return None
    members = set(tokens)
    candidates = []
    for index in tokens:
        edge = sentence.depgraph.governor_edge(index)
        if edge is None or edge.governor not in members:
            candidates.append(index)
    return min(candidates) if candidates else tokens[-1]


def dominant_ner(sentence: AnnotatedSentence, part: Constituent) -> Optional[str]:
    """NER label of the constituent's head token, or None for an empty constituent."""
    head = constituent_head(sentence, part.tokens)
    if head is None:
        return None
    return sentence.token(head).ner


def lemmatized_relation(record: ExtractionRecord, sentence: AnnotatedSentence) -> str:
    """Space-joined lemmas of the relation tokens; quantity markers are skipped."""
    return " ".join(sentence.token(i).lemma for i in record.relation.tokens)
