from __future__ import annotations

from triplecorpus.postprocess import (
    BE_NER_MISMATCH,
    UNSAFE_LINK_SPLIT,
    filter_be_mismatch,
    rearrange_links,
)


def test_split_link_is_reunited_on_the_object_side(member_of_parliament) -> None:
    sentence, record = member_of_parliament
    result = rearrange_links(record, sentence)

    assert result.subject.tokens == (1, 2)
    assert result.relation.tokens == (3,)
    assert result.object.tokens == (5, 6, 7)
    assert result.warnings == ()


def test_unsplit_links_leave_the_record_alone(founded_in_year) -> None:
    sentence, record = founded_in_year
    assert rearrange_links(record, sentence) is record


def test_link_across_subject_and_object_only_warns(make_sentence, make_record) -> None:
    sentence = make_sentence(
        [("New", "NNP", "LOCATION", "New"), ("York", "NNP", "LOCATION", "York"), ("City", "NNP", "LOCATION", "City"),
         (".", ".", "O", ".")],
        [(3, 1, "nn"), (0, 3, "root"), (3, 2, "nn"), (3, 4, "punct")],
        links=[([1, 2, 3], "New_York_City")],
    )
    record = make_record(sentence, [1], [2], [3], [[3]], "SVO")
    result = rearrange_links(record, sentence)

    assert (result.subject, result.relation, result.object) == (record.subject, record.relation, record.object)
    assert result.warnings == (f"{UNSAFE_LINK_SPLIT}:New_York_City",)
    assert rearrange_links(result, sentence) == result


def test_link_covering_the_whole_relation_only_warns(make_sentence, make_record) -> None:
    sentence = make_sentence(
        [("Fans", "NNS", "O", "fan"), ("love", "VBP", "O", "love"), ("Rock", "NNP", "O", "Rock"),
         ("music", "NN", "O", "music")],
        [(0, 2, "root"), (2, 1, "nsubj"), (2, 4, "dobj"), (4, 3, "nn")],
        links=[([2, 3], "Love_Rock")],
    )
    record = make_record(sentence, [1], [2], [3, 4], [[3, 4]], "SVO")
    result = rearrange_links(record, sentence)

    assert result.relation.tokens == (2,)
    assert result.warnings == (f"{UNSAFE_LINK_SPLIT}:Love_Rock",)


def test_be_triple_with_mismatched_types_is_dropped(person_is_organization) -> None:
    sentence, record = person_is_organization
    decision = filter_be_mismatch(record, sentence)

    assert not decision.keep
    assert decision.reason == BE_NER_MISMATCH


def test_be_triple_with_one_typed_argument(member_of_parliament) -> None:
    sentence, record = member_of_parliament
    record = rearrange_links(record, sentence)

    assert filter_be_mismatch(record, sentence).keep
    assert not filter_be_mismatch(record, sentence, drop_partial=True).keep


def test_other_relations_pass_the_be_filter(founded_in_year) -> None:
    sentence, record = founded_in_year
    assert filter_be_mismatch(record, sentence, drop_partial=True).keep
