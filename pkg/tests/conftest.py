"""
Shared builders for hand-made sentences and extractions, plus the golden
sentences used across the rule, postprocessing and tier tests.
"""

from typing import Callable, List, Optional, Sequence, Tuple

import pytest

from generate_corpus import CorpusGenerator, SentenceBuilder
from triplecorpus.model import AnnotatedSentence, ExtractionRecord, NaryExtraction, Quantity, constituent

Word = Tuple[str, str, str, str]  # surface, pos, ner, lemma


def build_sentence(words: Sequence[Word], deps: Sequence[Tuple[int, int, str]],
                   timex: Sequence[Tuple[int, int, str, str]] = (),
                   links: Sequence[Tuple[List[int], str]] = (),
                   article_id: int = 1, sentence_number: int = 1,
                   title: Optional[str] = None) -> AnnotatedSentence:
    b = SentenceBuilder()
    for surface, pos, ner, lemma in words:
        b.add(surface, pos, ner, lemma)
    for governor, dependent, label in deps:
        b.edge(governor, dependent, label)
    b.timex.extend(timex)
    for indices, target in links:
        b.link(list(indices), target)
    sentence, _ = b.build(article_id, sentence_number, 0, title)
    return sentence


def build_record(sentence: AnnotatedSentence, subject, relation, obj, arguments, clause_type: str,
                 extraction_index: int = 0, nary_relation=None, **extra) -> ExtractionRecord:
    return ExtractionRecord(
        article_id=sentence.article_id,
        sentence_number=sentence.sentence_number,
        extraction_index=extraction_index,
        nary=NaryExtraction(
            constituent("subject", subject),
            constituent("relation", nary_relation if nary_relation is not None else relation),
            tuple(constituent("argument", a) for a in arguments),
            clause_type,
        ),
        subject=constituent("subject", subject),
        relation=constituent("relation", relation),
        object=constituent("object", obj),
        extraction_type=clause_type,
        **extra,
    )


Golden = Tuple[AnnotatedSentence, ExtractionRecord]


@pytest.fixture
def make_sentence() -> Callable[..., AnnotatedSentence]:
    return build_sentence


@pytest.fixture
def make_record() -> Callable[..., ExtractionRecord]:
    return build_record


@pytest.fixture
def visited_last_week() -> Golden:
    """Bill Gates visited Africa last week ."""
    sentence = build_sentence(
        [("Bill", "NNP", "PERSON", "Bill"), ("Gates", "NNP", "PERSON", "Gates"), ("visited", "VBD", "O", "visit"),
         ("Africa", "NNP", "LOCATION", "Africa"), ("last", "JJ", "DATE", "last"), ("week", "NN", "DATE", "week"),
         (".", ".", "O", ".")],
        [(2, 1, "nn"), (0, 3, "root"), (3, 2, "nsubj"), (3, 4, "dobj"), (3, 6, "tmod"), (6, 5, "amod"), (3, 7, "punct")],
        timex=[(5, 6, "DATE", "2015-W20")],
        links=[([1, 2], "Bill_Gates"), ([4], "Africa")],
    )
    record = build_record(sentence, [1, 2], [3, 4], [5, 6], [[4], [5, 6]], "SVOA", nary_relation=[3])
    return sentence, record


@pytest.fixture
def founded_in_year() -> Golden:
    """Bill Gates founded Microsoft in 1975 ."""
    sentence = build_sentence(
        [("Bill", "NNP", "PERSON", "Bill"), ("Gates", "NNP", "PERSON", "Gates"), ("founded", "VBD", "O", "found"),
         ("Microsoft", "NNP", "ORGANIZATION", "Microsoft"), ("in", "IN", "O", "in"), ("1975", "CD", "DATE", "1975"),
         (".", ".", "O", ".")],
        [(2, 1, "nn"), (0, 3, "root"), (3, 2, "nsubj"), (3, 4, "dobj"), (3, 5, "prep"), (5, 6, "pobj"), (3, 7, "punct")],
        timex=[(6, 6, "DATE", "1975")],
        links=[([1, 2], "Bill_Gates"), ([4], "Microsoft")],
    )
    record = build_record(sentence, [1, 2], [3], [4, 5, 6], [[4, 5, 6]], "SVO")
    return sentence, record


@pytest.fixture
def decided_to_go() -> Golden:
    """Elon Musk decided to go to Washington yesterday ."""
    sentence = build_sentence(
        [("Elon", "NNP", "PERSON", "Elon"), ("Musk", "NNP", "PERSON", "Musk"), ("decided", "VBD", "O", "decide"),
         ("to", "TO", "O", "to"), ("go", "VB", "O", "go"), ("to", "TO", "O", "to"),
         ("Washington", "NNP", "LOCATION", "Washington"), ("yesterday", "NN", "DATE", "yesterday"),
         (".", ".", "O", ".")],
        [(2, 1, "nn"), (0, 3, "root"), (3, 2, "nsubj"), (3, 5, "xcomp"), (5, 4, "aux"), (5, 6, "prep"),
         (6, 7, "pobj"), (5, 8, "tmod"), (3, 9, "punct")],
        timex=[(8, 8, "DATE", "2016-05-20")],
    )
    record = build_record(sentence, [1, 2], [3, 4, 5, 6], [7, 8], [[7], [8]], "SVOA")
    return sentence, record


@pytest.fixture
def opened_park() -> Golden:
    """Isabella II opened the 17th-century Parque del Retiro in 1868 ."""
    sentence = build_sentence(
        [("Isabella", "NNP", "PERSON", "Isabella"), ("II", "NNP", "PERSON", "II"), ("opened", "VBD", "O", "open"),
         ("the", "DT", "O", "the"), ("17th-century", "JJ", "DATE", "17th-century"),
         ("Parque", "NNP", "LOCATION", "Parque"), ("del", "NNP", "LOCATION", "del"),
         ("Retiro", "NNP", "LOCATION", "Retiro"), ("in", "IN", "O", "in"), ("1868", "CD", "DATE", "1868"),
         (".", ".", "O", ".")],
        [(2, 1, "nn"), (0, 3, "root"), (3, 2, "nsubj"), (3, 8, "dobj"), (8, 4, "det"), (8, 5, "amod"),
         (8, 6, "nn"), (8, 7, "nn"), (3, 9, "prep"), (9, 10, "pobj"), (3, 11, "punct")],
        timex=[(5, 5, "DATE", "16XX"), (10, 10, "DATE", "1868")],
        links=[([1, 2], "Isabella_II_of_Spain"), ([6, 7, 8], "Buen_Retiro_Park")],
    )
    record = build_record(sentence, [1, 2], [3, 4, 5, 6, 7, 8, 9], [10], [[4, 5, 6, 7, 8], [9, 10]], "SVOA",
                          nary_relation=[3])
    return sentence, record


@pytest.fixture
def opened_shop() -> Golden:
    """Anna opened a shop in Berlin ."""
    sentence = build_sentence(
        [("Anna", "NNP", "PERSON", "Anna"), ("opened", "VBD", "O", "open"), ("a", "DT", "O", "a"),
         ("shop", "NN", "O", "shop"), ("in", "IN", "O", "in"), ("Berlin", "NNP", "LOCATION", "Berlin"),
         (".", ".", "O", ".")],
        [(0, 2, "root"), (2, 1, "nsubj"), (2, 4, "dobj"), (4, 3, "det"), (2, 5, "prep"), (5, 6, "pobj"),
         (2, 7, "punct")],
        links=[([6], "Berlin")],
    )
    record = build_record(sentence, [1], [2], [4, 5, 6], [[3, 4], [5, 6]], "SVOA", dropped_words=(3,))
    return sentence, record


@pytest.fixture
def lives_in_town() -> Golden:
    """Smith lives in Penryn ."""
    sentence = build_sentence(
        [("Smith", "NNP", "PERSON", "Smith"), ("lives", "VBZ", "O", "live"), ("in", "IN", "O", "in"),
         ("Penryn", "NNP", "LOCATION", "Penryn"), (".", ".", "O", ".")],
        [(0, 2, "root"), (2, 1, "nsubj"), (2, 3, "prep"), (3, 4, "pobj"), (2, 5, "punct")],
        links=[([4], "Penryn,_Cornwall")],
    )
    record = build_record(sentence, [1], [2, 3], [4], [[3, 4]], "SVA")
    return sentence, record


@pytest.fixture
def member_of_parliament() -> Golden:
    """Peter Brooke was a member of Parliament ."""
    sentence = build_sentence(
        [("Peter", "NNP", "PERSON", "Peter"), ("Brooke", "NNP", "PERSON", "Brooke"), ("was", "VBD", "O", "be"),
         ("a", "DT", "O", "a"), ("member", "NN", "O", "member"), ("of", "IN", "O", "of"),
         ("Parliament", "NNP", "ORGANIZATION", "Parliament"), (".", ".", "O", ".")],
        [(2, 1, "nn"), (0, 5, "root"), (5, 2, "nsubj"), (5, 3, "cop"), (5, 4, "det"), (5, 6, "prep"),
         (6, 7, "pobj"), (5, 8, "punct")],
        links=[([1, 2], "Peter_Brooke"), ([5, 6, 7], "Member_of_Parliament")],
    )
    record = build_record(sentence, [1, 2], [3, 5, 6], [7], [[4, 5, 6, 7]], "SVC", dropped_words=(4,))
    return sentence, record


@pytest.fixture
def person_is_organization() -> Golden:
    """Tim Cook is Apple Inc ."""
    sentence = build_sentence(
        [("Tim", "NNP", "PERSON", "Tim"), ("Cook", "NNP", "PERSON", "Cook"), ("is", "VBZ", "O", "be"),
         ("Apple", "NNP", "ORGANIZATION", "Apple"), ("Inc", "NNP", "ORGANIZATION", "Inc"), (".", ".", "O", ".")],
        [(2, 1, "nn"), (0, 5, "root"), (5, 4, "nn"), (5, 2, "nsubj"), (5, 3, "cop"), (5, 6, "punct")],
        links=[([1, 2], "Tim_Cook"), ([4, 5], "Apple_Inc.")],
    )
    record = build_record(sentence, [1, 2], [3], [4, 5], [[4, 5]], "SVC")
    return sentence, record


@pytest.fixture
def civil_war_escalated() -> Golden:
    """Civil War have escalated ."""
    sentence = build_sentence(
        [("Civil", "NNP", "MISC", "Civil"), ("War", "NNP", "MISC", "War"), ("have", "VBP", "O", "have"),
         ("escalated", "VBN", "O", "escalate"), (".", ".", "O", ".")],
        [(2, 1, "nn"), (0, 4, "root"), (4, 2, "nsubj"), (4, 3, "aux"), (4, 5, "punct")],
    )
    record = build_record(sentence, [1, 2], [3, 4], [], [], "SV")
    return sentence, record


@pytest.fixture
def sold_shares() -> Golden:
    """Ann Lee sold 300 shares ."""
    sentence = build_sentence(
        [("Ann", "NNP", "PERSON", "Ann"), ("Lee", "NNP", "PERSON", "Lee"), ("sold", "VBD", "O", "sell"),
         ("300", "CD", "NUMBER", "300"), ("shares", "NNS", "O", "share"), (".", ".", "O", ".")],
        [(2, 1, "nn"), (0, 3, "root"), (3, 2, "nsubj"), (3, 5, "dobj"), (5, 4, "num"), (3, 6, "punct")],
        links=[([1, 2], "Ann_Lee")],
    )
    record = build_record(sentence, [1, 2], [3], ["Q_1", 5], [["Q_1", 5]], "SVO",
                          quantities=(Quantity("Q_1", (4,)),))
    return sentence, record


@pytest.fixture(scope="session")
def generated_corpus():
    """A seeded synthetic corpus shared by the property suites."""
    generator = CorpusGenerator(seed=7)
    return generator, generator.corpus(400)


@pytest.fixture(scope="session")
def property_corpus():
    """A corpus large enough for the round-trip and annotation invariant suites."""
    generator = CorpusGenerator(seed=13)
    return generator, generator.corpus(3500)
