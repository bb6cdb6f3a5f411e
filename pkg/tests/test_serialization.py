from __future__ import annotations

import json
import random
from dataclasses import replace

import pytest

from triplecorpus.errors import CorpusFormatError
from triplecorpus.ingest import link_record
from triplecorpus.schemas import schema_errors
from triplecorpus.serialization import decode_sentence, deserialize, loads, serialize, serialize_sentence
from triplecorpus.spate import annotate


def test_annotated_triple_survives_a_round_trip(opened_park) -> None:
    sentence, record = opened_park
    record = replace(link_record(sentence, annotate(sentence, record), {}), confidence=0.75,
                     flags=("in_minie_d",), warnings=("unsafe-link-split:X",))
    line = serialize(record)

    assert deserialize(line) == record
    assert serialize(deserialize(line)) == line


def test_generated_records_survive_a_round_trip(property_corpus) -> None:
    generator, documents = property_corpus
    rng = random.Random(5)
    records = 0
    for sentence, extracted in documents:
        line = serialize_sentence(sentence)
        assert decode_sentence(loads(line)) == sentence
        for record in extracted:
            record = link_record(sentence, annotate(sentence, record), generator.redirects)
            if rng.random() < 0.5:
                record = replace(record, confidence=rng.random())
            line = serialize(record)

            assert deserialize(line) == record, record.key
            assert serialize(deserialize(line)) == line
            records += 1
    assert records >= 10_000


def test_field_order_is_fixed(founded_in_year) -> None:
    _, record = founded_in_year
    keys = list(json.loads(serialize(replace(record, confidence=0.5))))
    assert keys == [
        "kind", "article_id", "sentence_number", "extraction_index", "nary", "subject", "relation", "object",
        "polarity", "negative_words", "modality", "modality_words", "attribution", "quantities",
        "dropped_words", "extraction_type", "spate", "confidence", "canonical_links", "flags", "warnings",
    ]


def test_absent_confidence_is_omitted(founded_in_year) -> None:
    _, record = founded_in_year
    assert "confidence" not in json.loads(serialize(record))


def test_sentence_lines_validate(opened_park) -> None:
    sentence, _ = opened_park
    assert schema_errors(json.loads(serialize_sentence(sentence))) == []


@pytest.mark.parametrize("mutate, reason", [
    (lambda o: o.update(confidence=1.5), "bad-confidence"),
    (lambda o: o.pop("relation"), "missing-field"),
    (lambda o: o.update(kind="paragraph"), "unknown-kind"),
    (lambda o: o.update(object=[5, "quantity"]), "schema-violation"),
])
def test_schema_violations_map_to_reason_codes(founded_in_year, mutate, reason) -> None:
    _, record = founded_in_year
    obj = json.loads(serialize(record))
    mutate(obj)
    with pytest.raises(CorpusFormatError) as info:
        loads(json.dumps(obj))
    assert info.value.reason == reason


def test_invalid_json_and_unknown_flags(founded_in_year) -> None:
    _, record = founded_in_year
    with pytest.raises(CorpusFormatError) as info:
        deserialize("{")
    assert info.value.reason == "invalid-json"

    obj = json.loads(serialize(record))
    obj["flags"] = {"made_up": True}
    with pytest.raises(CorpusFormatError) as info:
        deserialize(json.dumps(obj))
    assert info.value.reason == "schema-violation"


def test_quantity_marker_without_entry_is_rejected(sold_shares) -> None:
    _, record = sold_shares
    obj = json.loads(serialize(record))
    obj["quantities"] = []
    with pytest.raises(CorpusFormatError) as info:
        deserialize(json.dumps(obj))
    assert info.value.reason == "missing-quantity"
