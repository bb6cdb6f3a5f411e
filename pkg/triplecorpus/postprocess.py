"""
Triple postprocessing: the be-relation NER-mismatch filter and link rearrangement.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional, Set

from .model import AnnotatedSentence, ExtractionRecord, dominant_ner, lemmatized_relation

logger = logging.getLogger(__name__)

BE_LEMMA = "be"
UNTYPED = "O"

BE_NER_MISMATCH = "be-ner-mismatch"
UNSAFE_LINK_SPLIT = "unsafe-link-split"


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: Optional[str] = None


KEEP = FilterDecision(True)


def filter_be_mismatch(record: ExtractionRecord, sentence: AnnotatedSentence,
                       drop_partial: bool = False) -> FilterDecision:
    """Drop "be" triples whose arguments carry different NER types.

    By default both arguments must be typed; with `drop_partial` a triple
    with exactly one typed argument is dropped too.
    """
    if lemmatized_relation(record, sentence) != BE_LEMMA or record.object.is_empty():
        return KEEP
    subject_type = dominant_ner(sentence, record.subject)
    object_type = dominant_ner(sentence, record.object)
    if subject_type is None or object_type is None or subject_type == object_type:
        return KEEP
    typed = (subject_type != UNTYPED) + (object_type != UNTYPED)
    if typed == 2 or (drop_partial and typed == 1):
        return FilterDecision(False, BE_NER_MISMATCH)
    return KEEP


def rearrange_links(record: ExtractionRecord, sentence: AnnotatedSentence) -> ExtractionRecord:
    """Reunite link anchors split across constituents by moving relation tokens to the argument side.

    A link spanning both subject and object has no safe rearrangement; the
    record is returned unchanged apart from a warning.
    """
    subject, relation, obj = record.subject, record.relation, record.object
    warnings = list(record.warnings)
    for link, anchor in sentence.links():
        tokens: Set[int] = set(anchor)
        in_subject = tokens & set(subject.tokens)
        in_relation = tokens & set(relation.tokens)
        in_object = tokens & set(obj.tokens)
        parts = sum(1 for s in (in_subject, in_relation, in_object) if s)
        if parts < 2:
            continue
        if in_subject and in_object:
            message = f"{UNSAFE_LINK_SPLIT}:{link.target}"
            if message not in warnings:
                warnings.append(message)
            logger.warning("Record %s: link %r spans subject and object, left as is", record.key, link.target)
            continue
        remaining = relation.without(in_relation)
        if not remaining.tokens:
            message = f"{UNSAFE_LINK_SPLIT}:{link.target}"
            if message not in warnings:
                warnings.append(message)
            logger.warning("Record %s: link %r covers the whole relation, left as is", record.key, link.target)
            continue
        relation = remaining
        if in_object:
            obj = obj.with_tokens(in_relation)
        else:
            subject = subject.with_tokens(in_relation)
        logger.debug("Record %s: moved tokens %s to reunite link %r", record.key, sorted(in_relation), link.target)

    if (subject, relation, obj) == (record.subject, record.relation, record.object) and \
            tuple(warnings) == record.warnings:
        return record
    return replace(record, subject=subject, relation=relation, object=obj, warnings=tuple(warnings))
