from __future__ import annotations

from triplecorpus.model import (
    SPATIAL_REFERENCE,
    SPATIAL_TRIPLE,
    TEMPORAL_ARGUMENT,
    TEMPORAL_REFERENCE,
    TEMPORAL_TRIPLE,
    WHOLE_TRIPLE,
    lemmatized_relation,
)
from triplecorpus.spate import (
    annotate,
    annotate_spatial,
    annotate_temporal_arguments,
    annotate_temporal_triple,
    build_context,
    detect_references,
    relation_head,
)


def kinds(record) -> list:
    return [(a.kind, a.target) for a in record.spate]


def test_temporal_noun_modifier_is_compacted_out_of_the_object(visited_last_week) -> None:
    sentence, record = visited_last_week
    result = annotate(sentence, record)

    assert result.subject.tokens == (1, 2)
    assert result.relation.tokens == (3,)
    assert result.object.tokens == (4,)
    assert kinds(result) == [(TEMPORAL_TRIPLE, WHOLE_TRIPLE), (SPATIAL_REFERENCE, "object")]
    temporal = result.spate[0]
    assert temporal.core_words == (5, 6)
    assert temporal.pre_modifiers == (5,)
    assert temporal.predicate is None
    assert temporal.timex.timex_type == "DATE"


def test_prepositional_date_becomes_triple_annotation(founded_in_year) -> None:
    sentence, record = founded_in_year
    result = annotate(sentence, record)

    assert result.relation.tokens == (3,)
    assert result.object.tokens == (4,)
    assert result.dropped_words == (5,)
    assert kinds(result) == [(TEMPORAL_TRIPLE, WHOLE_TRIPLE)]
    annotation = result.spate[0]
    assert annotation.predicate == "in"
    assert annotation.core_words == (6,)
    assert annotation.timex.value == "1975"


def test_temporal_modifier_under_open_clausal_complement(decided_to_go) -> None:
    sentence, record = decided_to_go
    result = annotate(sentence, record)

    assert result.relation.tokens == (3, 4, 5, 6)
    assert result.object.tokens == (7,)
    assert kinds(result) == [(TEMPORAL_TRIPLE, WHOLE_TRIPLE), (SPATIAL_REFERENCE, "object")]
    assert result.spate[0].core_words == (8,)


def test_triple_and_argument_annotations_together(opened_park) -> None:
    sentence, record = opened_park
    result = annotate(sentence, record)

    assert result.subject.tokens == (1, 2)
    assert result.relation.tokens == (3,)
    assert result.object.tokens == (6, 7, 8)
    assert result.dropped_words == (4, 9)
    assert kinds(result) == [
        (TEMPORAL_TRIPLE, WHOLE_TRIPLE),
        (TEMPORAL_ARGUMENT, "object"),
        (SPATIAL_REFERENCE, "object"),
    ]
    triple_level, argument_level, _ = result.spate
    assert (triple_level.predicate, triple_level.core_words) == ("in", (10,))
    assert argument_level.core_words == (5,)
    assert argument_level.head == 8


def test_spatial_preposition_moves_location_out_of_object(opened_shop) -> None:
    sentence, record = opened_shop
    result = annotate(sentence, record)

    assert (result.subject.tokens, result.relation.tokens, result.object.tokens) == ((1,), (2,), (4,))
    assert result.dropped_words == (3, 5)
    assert kinds(result) == [(SPATIAL_TRIPLE, WHOLE_TRIPLE)]
    assert result.spate[0].predicate == "in"
    assert result.spate[0].core_words == (6,)
    assert result.spate[0].timex is None


def test_rule_that_would_empty_the_object_does_not_fire(lives_in_town) -> None:
    sentence, record = lives_in_town
    result = annotate(sentence, record)

    assert result.relation.tokens == (2, 3)
    assert result.object.tokens == (4,)
    assert result.dropped_words == ()
    assert kinds(result) == [(SPATIAL_REFERENCE, "object")]


def test_date_object_is_a_temporal_reference(make_sentence, make_record) -> None:
    sentence = make_sentence(
        [("Ada", "NNP", "PERSON", "Ada"), ("was", "VBD", "O", "be"), ("born", "VBN", "O", "bear"),
         ("in", "IN", "O", "in"), ("1815", "CD", "DATE", "1815"), (".", ".", "O", ".")],
        [(0, 3, "root"), (3, 1, "nsubjpass"), (3, 2, "auxpass"), (3, 4, "prep"), (4, 5, "pobj"), (3, 6, "punct")],
        timex=[(5, 5, "DATE", "1815")],
    )
    record = make_record(sentence, [1], [2, 3, 4], [5], [[4, 5]], "SVA")
    result = annotate(sentence, record)

    assert result.relation.tokens == (2, 3, 4)
    assert kinds(result) == [(TEMPORAL_REFERENCE, "object")]
    assert result.spate[0].timex.value == "1815"


def test_sentence_without_time_or_location_is_untouched(sold_shares) -> None:
    sentence, record = sold_shares
    assert annotate(sentence, record) == record


def test_annotation_is_deterministic(opened_park) -> None:
    sentence, record = opened_park
    assert annotate(sentence, record) == annotate(sentence, record)


def test_generated_corpus_properties(property_corpus) -> None:
    _, documents = property_corpus
    contexts = 0
    for sentence, records in documents:
        for record in records:
            contexts += 1
            result = annotate(sentence, record)
            ctx = build_context(sentence, result)
            before = record.triple_tokens() | set(record.dropped_words)
            carried = set()
            for annotation in result.spate:
                if not annotation.is_reference:
                    carried.update(annotation.words)
            after = result.triple_tokens() | set(result.dropped_words)

            # tokens move between triple, dropped words and annotations, never appear or vanish
            assert before == after | carried, record.key
            assert not carried & set(result.dropped_words)
            assert not carried & result.triple_tokens()
            assert set(result.subject.tokens) <= set(record.subject.tokens)
            assert result.subject.markers == record.subject.markers
            assert result.object.markers == record.object.markers
            if result.extraction_type != "SV":
                assert result.object.items
            assert detect_references(ctx) == []
            assert annotate(sentence, result) == result, record.key

            for annotation in result.spate:
                core = set(annotation.core_words)
                if annotation.is_temporal:
                    assert any(core <= set(t.span) for t in sentence.temporal_expressions), record.key
                else:
                    assert core <= ctx.location_run(annotation.core_words[0]), record.key
    assert contexts >= 10_000


def test_annotating_twice_changes_nothing(founded_in_year) -> None:
    sentence, record = founded_in_year
    first = annotate(sentence, record)
    assert annotate(sentence, first) == first


def test_relation_head_is_the_ungoverned_relation_token(founded_in_year, decided_to_go) -> None:
    assert relation_head(build_context(*founded_in_year)) == 3
    assert relation_head(build_context(*decided_to_go)) == 3


def test_rule_families_run_separately(founded_in_year, opened_shop) -> None:
    ctx = build_context(*founded_in_year)
    triple, found = annotate_temporal_triple(ctx)
    assert [a.kind for a in found] == [TEMPORAL_TRIPLE]
    assert triple.spate == tuple(found)
    assert triple.object.tokens == (4,)

    assert annotate_spatial(ctx) == (founded_in_year[1], [])

    shop = build_context(*opened_shop)
    assert annotate_temporal_triple(shop) == (opened_shop[1], [])
    assert annotate_temporal_arguments(shop) == (opened_shop[1], [])
    triple, found = annotate_spatial(shop)
    assert [a.kind for a in found] == [SPATIAL_TRIPLE]


def test_lemmatized_relation(founded_in_year, decided_to_go) -> None:
    sentence, record = founded_in_year
    assert lemmatized_relation(annotate(sentence, record), sentence) == "found"
    sentence, record = decided_to_go
    assert lemmatized_relation(record, sentence) == "decide to go to"


def test_date_subject_is_a_temporal_reference(make_sentence, make_record) -> None:
    sentence = make_sentence(
        [("2003", "CD", "DATE", "2003"), ("was", "VBD", "O", "be"), ("a", "DT", "O", "a"), ("hot", "JJ", "O", "hot"),
         ("year", "NN", "O", "year"), (".", ".", "O", ".")],
        [(0, 5, "root"), (5, 1, "nsubj"), (5, 2, "cop"), (5, 3, "det"), (5, 4, "amod"), (5, 6, "punct")],
        timex=[(1, 1, "DATE", "2003")],
    )
    record = make_record(sentence, [1], [2], [3, 4, 5], [[3, 4, 5]], "SVC")
    result = annotate(sentence, record)

    assert (result.subject.tokens, result.relation.tokens, result.object.tokens) == ((1,), (2,), (3, 4, 5))
    assert kinds(result) == [(TEMPORAL_REFERENCE, "subject")]
    assert result.spate[0].timex.value == "2003"


def test_temporal_tag_inside_a_name_reduces_the_argument(make_sentence, make_record) -> None:
    sentence = make_sentence(
        [("Bolt", "NNP", "PERSON", "Bolt"), ("attended", "VBD", "O", "attend"), ("the", "DT", "O", "the"),
         ("Summer", "NNP", "DATE", "Summer"), ("Olympics", "NNPS", "MISC", "Olympics"), (".", ".", "O", ".")],
        [(0, 2, "root"), (2, 1, "nsubj"), (2, 5, "dobj"), (5, 3, "det"), (5, 4, "nn"), (2, 6, "punct")],
        timex=[(4, 4, "DATE", "XXXX-SU")],
    )
    record = make_record(sentence, [1], [2], [4, 5], [[4, 5]], "SVO", dropped_words=(3,))
    result = annotate(sentence, record)

    assert result.object.tokens == (5,)
    assert kinds(result) == [(TEMPORAL_ARGUMENT, "object")]
    annotation = result.spate[0]
    assert annotation.core_words == (4,)
    assert annotation.head == 5
    assert sentence.surface(annotation.core_words) == "Summer"
