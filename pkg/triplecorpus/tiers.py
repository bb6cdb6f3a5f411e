"""
Corpus tiers: every triple belongs to the full corpus; clean triples have
concept arguments and unsplit links/entities; linked triples are clean triples
whose two arguments are both golden links.
"""

from dataclasses import dataclass
from typing import AbstractSet, List, Set, Tuple

from .model import AnnotatedSentence, Constituent, ExtractionRecord, constituent_head

PRONOUN_ARGUMENT = "pronoun-argument"
DETERMINER_ARGUMENT = "determiner-argument"
WH_ARGUMENT = "wh-argument"
SPLIT_LINK = "split-link"
SPLIT_ENTITY = "split-entity"
EMPTY_OBJECT = "empty-object"
NON_CONCEPT_ARGUMENT = "non-concept-argument"

REASON_ORDER = (
    PRONOUN_ARGUMENT, DETERMINER_ARGUMENT, WH_ARGUMENT,
    SPLIT_LINK, SPLIT_ENTITY, EMPTY_OBJECT, NON_CONCEPT_ARGUMENT,
)

_POS_REASONS = (
    (frozenset({"PRP", "PRP$"}), PRONOUN_ARGUMENT),
    (frozenset({"DT"}), DETERMINER_ARGUMENT),
    (frozenset({"WP", "WDT", "WP$"}), WH_ARGUMENT),
)


@dataclass(frozen=True)
class TierVerdict:
    clean: bool
    linked: bool
    reasons: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.linked and not self.clean:
            raise ValueError("a linked verdict must also be clean")


def _argument_tokens(record: ExtractionRecord, part: Constituent) -> Tuple[int, ...]:
    """Argument tokens with quantity tokens removed."""
    quantity_tokens: Set[int] = set()
    for quantity in record.quantities:
        quantity_tokens.update(quantity.tokens)
    return tuple(i for i in part.tokens if i not in quantity_tokens)


def _is_concept(sentence: AnnotatedSentence, tokens: Tuple[int, ...], page_titles: AbstractSet[str]) -> bool:
    members = set(tokens)
    if any(set(anchor) == members for _, anchor in sentence.links()):
        return True
    if any(set(run) == members for _, run in sentence.ner_runs()):
        return True
    return sentence.surface(tokens) in page_titles


def _split_across(spans: List[Tuple[int, ...]], parts: Tuple[Constituent, ...]) -> bool:
    memberships = [set(p.tokens) for p in parts]
    for span in spans:
        touched = sum(1 for members in memberships if members.intersection(span))
        if touched > 1:
            return True
    return False


def _single_link(sentence: AnnotatedSentence, tokens: Tuple[int, ...]) -> bool:
    links = {sentence.token(i).link for i in tokens}
    return len(links) == 1 and None not in links


def classify(record: ExtractionRecord, sentence: AnnotatedSentence, page_titles: AbstractSet[str]) -> TierVerdict:
    """Decide clean/linked membership and collect the reasons a triple fails the clean tier."""
    reasons: Set[str] = set()
    arguments: List[Tuple[int, ...]] = []
    for part in (record.subject, record.object):
        tokens = _argument_tokens(record, part)
        if not part.tokens:
            continue
        arguments.append(tokens)
        head = constituent_head(sentence, tokens)
        head_pos = sentence.token(head).pos if head is not None else ""
        specific = [reason for tags, reason in _POS_REASONS if head_pos in tags]
        reasons.update(specific)
        if not specific and (not tokens or not _is_concept(sentence, tokens, page_titles)):
            reasons.add(NON_CONCEPT_ARGUMENT)

    parts = (record.subject, record.relation, record.object)
    if _split_across([anchor for _, anchor in sentence.links()], parts):
        reasons.add(SPLIT_LINK)
    if _split_across([run for _, run in sentence.ner_runs()], parts):
        reasons.add(SPLIT_ENTITY)
    if record.object.is_empty() or not record.object.tokens:
        reasons.add(EMPTY_OBJECT)

    clean = not reasons
    linked = clean and len(arguments) == 2 and all(_single_link(sentence, tokens) for tokens in arguments)
    return TierVerdict(clean, linked, tuple(r for r in REASON_ORDER if r in reasons))
