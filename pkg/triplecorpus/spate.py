"""
Spatio-temporal annotation rules over dependency parses.

Each rule family reads a RuleContext (the sentence, its n-ary extraction, the
current triple and the temporal/location indexes) and returns a new triple
plus the annotations it produced. Rules run in a fixed order:
temporal-triple, temporal-argument, spatial-triple, spatial-argument and
finally reference detection.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Set, Tuple

from .model import (
    AnnotatedSentence,
    Constituent,
    ExtractionRecord,
    NaryExtraction,
    SPATIAL_ARGUMENT,
    SPATIAL_REFERENCE,
    SPATIAL_TRIPLE,
    SpaTeAnnotation,
    TEMPORAL_ARGUMENT,
    TEMPORAL_REFERENCE,
    TEMPORAL_TRIPLE,
    TemporalExpression,
    TimexPayload,
    WHOLE_TRIPLE,
    constituent_head,
)

logger = logging.getLogger(__name__)

LOCATION = "LOCATION"

# Subtrees never pulled into a triple-level annotation.
TRIPLE_EXCLUDED = frozenset({"rcmod", "punct", "appos", "dep", "cc", "conj", "vmod"})
# Subtrees never pulled into an argument-level annotation.
ARGUMENT_EXCLUDED = frozenset({"rcmod", "punct", "appos", "cc", "conj"})
ARGUMENT_MODIFIER_LABELS = frozenset({"amod", "acomp", "advmod", "nn", "num", "number", "tmod"})
TEMPORAL_CHILD_LABELS = frozenset({"tmod", "advmod"})
# Attachments that make a token a pre-/post-modifier even inside the core.
MODIFIER_LABELS = frozenset({"amod", "advmod", "quantmod", "det", "predet", "neg"})


@dataclass(frozen=True)
class RuleContext:
    sentence: AnnotatedSentence
    nary: NaryExtraction
    triple: ExtractionRecord
    temporal_index: Mapping[int, TemporalExpression]
    location_index: FrozenSet[int]

    def with_triple(self, triple: ExtractionRecord) -> "RuleContext":
        return replace(self, triple=triple)

    def location_run(self, index: int) -> FrozenSet[int]:
        """The contiguous LOCATION run containing `index`."""
        if index not in self.location_index:
            return frozenset()
        first = last = index
        while first - 1 in self.location_index:
            first -= 1
        while last + 1 in self.location_index:
            last += 1
        return frozenset(range(first, last + 1))


def build_context(sentence: AnnotatedSentence, record: ExtractionRecord) -> RuleContext:
    temporal_index: Dict[int, TemporalExpression] = {}
    for timex in sentence.temporal_expressions:
        for index in timex.span:
            temporal_index.setdefault(index, timex)
    location_index = frozenset(t.index for t in sentence.tokens if t.ner == LOCATION)
    return RuleContext(sentence, record.nary, record, temporal_index, location_index)


class _Temporal:
    triple_kind = TEMPORAL_TRIPLE
    argument_kind = TEMPORAL_ARGUMENT

    @staticmethod
    def contains(ctx: RuleContext, index: int) -> bool:
        return index in ctx.temporal_index

    @staticmethod
    def unit(ctx: RuleContext, index: int) -> FrozenSet[int]:
        timex = ctx.temporal_index.get(index)
        return frozenset(timex.span) if timex else frozenset()

    @staticmethod
    def payload(ctx: RuleContext, index: int) -> Optional[TimexPayload]:
        return ctx.temporal_index[index].payload()


class _Spatial:
    triple_kind = SPATIAL_TRIPLE
    argument_kind = SPATIAL_ARGUMENT

    @staticmethod
    def contains(ctx: RuleContext, index: int) -> bool:
        return index in ctx.location_index

    @staticmethod
    def unit(ctx: RuleContext, index: int) -> FrozenSet[int]:
        return ctx.location_run(index)

    @staticmethod
    def payload(ctx: RuleContext, index: int) -> Optional[TimexPayload]:
        return None


def relation_head(ctx: RuleContext) -> Optional[int]:
    """Graph head of the relation tokens, or None when the relation holds only markers."""
    return constituent_head(ctx.sentence, ctx.triple.relation.tokens)


def _phrase(ctx: RuleContext, head: int, excluded: FrozenSet[str]) -> Tuple[int, ...]:
    return tuple(sorted({head} | ctx.sentence.depgraph.descendants(head, excluded)))


def _annotation(ctx: RuleContext, family, kind: str, phrase: Tuple[int, ...], head: int, target: str,
                predicate: Optional[str] = None, modified: Optional[int] = None) -> SpaTeAnnotation:
    unit = family.unit(ctx, head)
    graph = ctx.sentence.depgraph

    def is_modifier(i: int) -> bool:
        return i not in unit or graph.label_of(i) in MODIFIER_LABELS

    return SpaTeAnnotation(
        kind=kind,
        core_words=tuple(i for i in phrase if i in unit),
        target=target,
        predicate=predicate,
        pre_modifiers=tuple(i for i in phrase if i < head and is_modifier(i)),
        post_modifiers=tuple(i for i in phrase if i > head and is_modifier(i)),
        timex=family.payload(ctx, head),
        head=modified,
    )


# ---------------------------------------------------------------------------
# Triple-level rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Candidate:
    head: int
    phrase: Tuple[int, ...]
    preposition: Optional[int] = None


def _prep_candidates(ctx: RuleContext, family, governor: int) -> Iterator[_Candidate]:
    graph = ctx.sentence.depgraph
    for edge in graph.children(governor):
        if edge.label != "prep":
            continue
        pobj = next((e.dependent for e in graph.children(edge.dependent) if e.label == "pobj"), None)
        if pobj is not None and family.contains(ctx, pobj):
            yield _Candidate(pobj, _phrase(ctx, pobj, TRIPLE_EXCLUDED), edge.dependent)


def _temporal_candidates(ctx: RuleContext, governor: int) -> Iterator[_Candidate]:
    graph = ctx.sentence.depgraph
    for edge in graph.children(governor):
        if edge.label in TEMPORAL_CHILD_LABELS and _Temporal.contains(ctx, edge.dependent):
            yield _Candidate(edge.dependent, _phrase(ctx, edge.dependent, TRIPLE_EXCLUDED))
        elif edge.label == "xcomp":
            yield from _temporal_candidates(ctx, edge.dependent)
    yield from _prep_candidates(ctx, _Temporal, governor)


class _TripleEdit:
    """Working copy of the relation/object/dropped-words of one triple."""

    def __init__(self, triple: ExtractionRecord) -> None:
        self.triple = triple
        self.relation = triple.relation
        self.object = triple.object
        self.dropped: List[int] = list(triple.dropped_words)

    def side_tokens(self) -> Set[int]:
        return set(self.relation.tokens) | set(self.object.tokens)

    def record(self, annotations: List[SpaTeAnnotation]) -> ExtractionRecord:
        return replace(
            self.triple,
            relation=self.relation,
            object=self.object,
            dropped_words=tuple(sorted(set(self.dropped))),
            spate=self.triple.spate + tuple(annotations),
        )


def _restructure(ctx: RuleContext, relation: Constituent, obj: Constituent,
                 skipped: Optional[int]) -> Optional[Tuple[Constituent, Constituent, List[int]]]:
    """Rebuild relation/object from the remaining n-ary arguments.

    The last argument that still has tokens in the triple becomes the object
    (minus leading determiners, which are dropped); every other remaining
    token goes to the relation. Returns None when no valid triple results.
    """
    remaining = set(relation.tokens) | set(obj.tokens)
    tokens: List[int] = []
    for position in range(len(ctx.nary.arguments) - 1, -1, -1):
        if position == skipped:
            continue
        tokens = [i for i in ctx.nary.arguments[position].tokens if i in remaining]
        if tokens:
            break
    leading: List[int] = []
    while tokens and ctx.sentence.token(tokens[0]).pos == "DT":
        leading.append(tokens.pop(0))
    if not tokens:
        return None
    object_tokens = set(tokens)
    relation_tokens = remaining - object_tokens - set(leading)
    if not relation_tokens:
        return None
    new_relation = relation.without(object_tokens | set(leading)).with_tokens(
        i for i in obj.tokens if i in relation_tokens)
    new_object = obj.without(relation_tokens | set(leading)).with_tokens(
        i for i in relation.tokens if i in object_tokens)
    return new_relation, new_object, leading


def _apply_triple_candidate(ctx: RuleContext, edit: _TripleEdit, candidate: _Candidate) -> bool:
    side = edit.side_tokens()
    phrase = set(candidate.phrase)
    if not phrase <= side:
        return False
    removed = set(phrase)
    dropped: List[int] = []
    if candidate.preposition is not None and candidate.preposition in side:
        dropped.append(candidate.preposition)
        removed.add(candidate.preposition)

    compacted: Optional[int] = None
    if ctx.nary.size > 3:
        with_preposition = phrase | ({candidate.preposition} if candidate.preposition is not None else set())
        for position, argument in enumerate(ctx.nary.arguments):
            if set(argument.tokens) in (phrase, with_preposition):
                compacted = position
                break

    relation = edit.relation.without(removed)
    obj = edit.object.without(removed)
    needs_object = ctx.triple.extraction_type != "SV"
    if compacted is not None or (needs_object and obj.is_empty()):
        rebuilt = _restructure(ctx, relation, obj, compacted)
        if rebuilt is not None:
            relation, obj, leading = rebuilt
            dropped.extend(leading)
        elif needs_object and obj.is_empty():
            return False
    if relation.is_empty() or not relation.tokens:
        return False

    edit.relation, edit.object = relation, obj
    edit.dropped.extend(dropped)
    return True


def _annotate_triple(ctx: RuleContext, family, candidates: List[_Candidate]) -> Tuple[ExtractionRecord, List[SpaTeAnnotation]]:
    edit = _TripleEdit(ctx.triple)
    annotations: List[SpaTeAnnotation] = []
    seen: Set[int] = set()
    for candidate in sorted(candidates, key=lambda c: c.head):
        if candidate.head in seen:
            continue
        seen.add(candidate.head)
        if not _apply_triple_candidate(ctx, edit, candidate):
            continue
        predicate = None
        if candidate.preposition is not None:
            predicate = ctx.sentence.token(candidate.preposition).surface
        annotations.append(_annotation(ctx, family, family.triple_kind, candidate.phrase,
                                       candidate.head, WHOLE_TRIPLE, predicate))
    if not annotations:
        return ctx.triple, []
    logger.debug("Record %s: %d %s annotations", ctx.triple.key, len(annotations), family.triple_kind)
    return edit.record(annotations), annotations


def annotate_temporal_triple(ctx: RuleContext) -> Tuple[ExtractionRecord, List[SpaTeAnnotation]]:
    """tmod/advmod, prep and xcomp rules on the relation head; never touches the subject."""
    head = relation_head(ctx)
    if head is None or not ctx.temporal_index:
        return ctx.triple, []
    return _annotate_triple(ctx, _Temporal, list(_temporal_candidates(ctx, head)))


# ---------------------------------------------------------------------------
# Argument-level rules
# ---------------------------------------------------------------------------

def _is_noun_or_adjective(ctx: RuleContext, index: int) -> bool:
    pos = ctx.sentence.token(index).pos
    return pos.startswith("NN") or pos.startswith("JJ")


def _annotate_arguments(ctx: RuleContext, family) -> Tuple[ExtractionRecord, List[SpaTeAnnotation]]:
    graph = ctx.sentence.depgraph
    parts = {"subject": ctx.triple.subject, "object": ctx.triple.object}
    annotations: List[SpaTeAnnotation] = []
    for role in ("subject", "object"):
        part = parts[role]
        for word in part.tokens:
            if word not in part.tokens or not _is_noun_or_adjective(ctx, word):
                continue
            for edge in graph.children(word):
                child = edge.dependent
                if edge.label not in ARGUMENT_MODIFIER_LABELS or not family.contains(ctx, child):
                    continue
                if child not in part.tokens or word in family.unit(ctx, child):
                    continue
                members = set(part.tokens)
                phrase = tuple(i for i in _phrase(ctx, child, ARGUMENT_EXCLUDED) if i in members)
                if word in phrase:
                    continue
                reduced = part.without(phrase)
                if not reduced.tokens:
                    continue
                annotations.append(_annotation(ctx, family, family.argument_kind, phrase, child, role, modified=word))
                part = reduced
        parts[role] = part
    if not annotations:
        return ctx.triple, []
    record = replace(ctx.triple, subject=parts["subject"], object=parts["object"],
                     spate=ctx.triple.spate + tuple(annotations))
    return record, annotations


def annotate_temporal_arguments(ctx: RuleContext) -> Tuple[ExtractionRecord, List[SpaTeAnnotation]]:
    """Move temporal modifiers of subject/object nouns and adjectives into argument annotations."""
    if not ctx.temporal_index:
        return ctx.triple, []
    return _annotate_arguments(ctx, _Temporal)


def annotate_spatial(ctx: RuleContext) -> Tuple[ExtractionRecord, List[SpaTeAnnotation]]:
    """Prep rule on the relation head plus the argument procedure, keyed on LOCATION runs."""
    if not ctx.location_index:
        return ctx.triple, []
    annotations: List[SpaTeAnnotation] = []
    head = relation_head(ctx)
    if head is not None:
        triple, found = _annotate_triple(ctx, _Spatial, list(_prep_candidates(ctx, _Spatial, head)))
        ctx = ctx.with_triple(triple)
        annotations.extend(found)
    triple, found = _annotate_arguments(ctx, _Spatial)
    annotations.extend(found)
    return triple, annotations


# ---------------------------------------------------------------------------
# References
# ---------------------------------------------------------------------------

def detect_references(ctx: RuleContext) -> List[SpaTeAnnotation]:
    """Reference annotations for arguments that are wholly a temporal expression or a location."""
    existing = {(a.kind, a.target) for a in ctx.triple.spate}
    found: List[SpaTeAnnotation] = []
    for role, part in (("subject", ctx.triple.subject), ("object", ctx.triple.object)):
        tokens = part.tokens
        if not tokens:
            continue
        timex = ctx.temporal_index.get(tokens[0])
        if timex is not None and set(timex.span) == set(tokens) and (TEMPORAL_REFERENCE, role) not in existing:
            found.append(SpaTeAnnotation(TEMPORAL_REFERENCE, tokens, role, timex=timex.payload()))
        if all(i in ctx.location_index for i in tokens) and (SPATIAL_REFERENCE, role) not in existing:
            found.append(SpaTeAnnotation(SPATIAL_REFERENCE, tokens, role))
    return found


def annotate(sentence: AnnotatedSentence, record: ExtractionRecord) -> ExtractionRecord:
    """Run every rule family in order and return the annotated triple."""
    ctx = build_context(sentence, record)
    for rule in (annotate_temporal_triple, annotate_temporal_arguments, annotate_spatial):
        triple, _ = rule(ctx)
        ctx = ctx.with_triple(triple)
    references = detect_references(ctx)
    if references:
        return replace(ctx.triple, spate=ctx.triple.spate + tuple(references))
    return ctx.triple
