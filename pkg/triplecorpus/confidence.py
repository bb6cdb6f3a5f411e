"""
Extraction confidence: feature extraction, a regularized logistic-regression
model trained by full-batch gradient descent, scoring and bucket calibration.

The score estimates whether a triple was extracted correctly from its
sentence, not whether the stated fact is true.
"""

import json
import logging
from dataclasses import dataclass, fields
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfidenceError, CorpusFormatError
from .ingest import read_tsv
from .model import (
    AnnotatedSentence,
    CLAUSE_TYPES,
    Constituent,
    ExtractionRecord,
    constituent_head,
    lemmatized_relation,
)
from .schemas import validate_model
from .serialization import SENTENCE_KIND, decode_record, decode_sentence, loads

logger = logging.getLogger(__name__)

DEFAULT_FREQUENT_THRESHOLD = 100_000
DEFAULT_REGULARIZATION = 1e-2
GRADIENT_TOLERANCE = 1e-6
MAX_ITERATIONS = 100_000

IMPLICIT = "implicit"
CLAUSE_ONE_HOT = CLAUSE_TYPES + (IMPLICIT,)

FEATURE_NAMES: Tuple[str, ...] = (
    "sentence_length",
    "extraction_length",
    *(f"clause_{c}" for c in CLAUSE_ONE_HOT),
    "dropped_all_optional_adverbials",
    "dropped_all_optional_prepositions",
    "relation_contiguous_in_sentence",
    "subject_conjunction_pos_match",
    "has_possessive_relation",
    "has_gerund",
    "infinitive_in_subject",
    "infinitive_in_relation",
    "words_in_sentence_order",
    "contains_dep_edge",
    "processed_conjunction_subject",
    "processed_conjunction_relation",
    "processed_conjunction_object",
    "object_before_subject",
    "in_minie_d",
    "in_minie_a",
    "relation_frequent",
    "extracts_quantity",
    "extracts_time",
    "extracts_space",
)


@dataclass(frozen=True)
class FeatureVector:
    sentence_length: int
    extraction_length: int
    clause_type: str
    dropped_all_optional_adverbials: bool
    dropped_all_optional_prepositions: bool
    relation_contiguous_in_sentence: bool
    subject_conjunction_pos_match: bool
    has_possessive_relation: bool
    has_gerund: bool
    infinitive_in_subject: bool
    infinitive_in_relation: bool
    words_in_sentence_order: bool
    contains_dep_edge: bool
    processed_conjunction_subject: bool
    processed_conjunction_relation: bool
    processed_conjunction_object: bool
    object_before_subject: bool
    in_minie_d: bool
    in_minie_a: bool
    relation_frequent: bool
    extracts_quantity: bool
    extracts_time: bool
    extracts_space: bool

    def __post_init__(self) -> None:
        if self.sentence_length < 1 or self.extraction_length < 2:
            raise ConfidenceError(
                f"invalid lengths: sentence {self.sentence_length}, extraction {self.extraction_length}")
        if self.clause_type not in CLAUSE_ONE_HOT:
            raise ConfidenceError(f"unknown clause type {self.clause_type!r}")

    def to_array(self) -> np.ndarray:
        values: List[float] = [float(self.sentence_length), float(self.extraction_length)]
        values.extend(1.0 if self.clause_type == c else 0.0 for c in CLAUSE_ONE_HOT)
        values.extend(float(getattr(self, f.name)) for f in fields(self)[3:])
        return np.asarray(values, dtype=np.float64)


def _is_contiguous(haystack: Sequence[str], needle: Sequence[str]) -> bool:
    if not needle:
        return False
    width = len(needle)
    return any(list(haystack[i:i + width]) == list(needle) for i in range(len(haystack) - width + 1))


def _has_pos(sentence: AnnotatedSentence, part: Constituent, tags: Iterable[str]) -> bool:
    wanted = set(tags)
    return any(sentence.token(i).pos in wanted for i in part.tokens)


def _processed_conjunction(sentence: AnnotatedSentence, part: Constituent) -> bool:
    """True if a conj edge links a constituent token to a token outside it."""
    members = set(part.tokens)
    graph = sentence.depgraph
    for index in members:
        edge = graph.governor_edge(index)
        if edge is not None and edge.label == "conj" and edge.governor not in members:
            return True
        if any(e.label == "conj" and e.dependent not in members for e in graph.children(index)):
            return True
    return False


def _conjunction_pos_match(sentence: AnnotatedSentence, subject: Constituent) -> bool:
    head = constituent_head(sentence, subject.tokens)
    if head is None:
        return True
    prefix = sentence.token(head).pos[:2]
    conjuncts = [e.dependent for e in sentence.depgraph.children(head) if e.label == "conj"]
    return all(sentence.token(c).pos[:2] == prefix for c in conjuncts)


def _extraction_length(sentence: AnnotatedSentence, record: ExtractionRecord) -> int:
    """Relation tokens count one each; in the arguments a link anchor or NER run counts once."""
    unit_of: Dict[int, Tuple[int, ...]] = {}
    for _, anchor in sentence.links():
        unit_of.update((i, anchor) for i in anchor)
    for _, run in sentence.ner_runs():
        for i in run:
            unit_of.setdefault(i, run)
    items = len(record.relation)
    for part in record.arguments:
        items += len({unit_of.get(item, (item,)) if isinstance(item, int) else item for item in part.items})
    return items


def extract_features(record: ExtractionRecord, sentence: AnnotatedSentence,
                     relation_frequencies: Mapping[str, int],
                     frequent_threshold: int = DEFAULT_FREQUENT_THRESHOLD) -> FeatureVector:
    graph = sentence.depgraph
    ordered = list(record.subject.tokens) + list(record.relation.tokens) + list(record.object.tokens)
    triple_tokens = record.triple_tokens()
    relation_head = constituent_head(sentence, record.relation.tokens)
    object_before_subject = bool(record.object.tokens and record.subject.tokens) and \
        min(record.object.tokens) < max(record.subject.tokens)
    lemma = lemmatized_relation(record, sentence)

    return FeatureVector(
        sentence_length=len(sentence.tokens),
        extraction_length=_extraction_length(sentence, record),
        clause_type=record.extraction_type if record.extraction_type in CLAUSE_TYPES else IMPLICIT,
        dropped_all_optional_adverbials=record.has_flag("dropped_all_optional_adverbials"),
        dropped_all_optional_prepositions=record.has_flag("dropped_all_optional_prepositions"),
        relation_contiguous_in_sentence=_is_contiguous(
            [t.surface for t in sentence.tokens], [sentence.token(i).surface for i in record.relation.tokens]),
        subject_conjunction_pos_match=_conjunction_pos_match(sentence, record.subject),
        has_possessive_relation=_has_pos(sentence, record.relation, ("POS", "PRP$")) or (
            relation_head is not None and sentence.token(relation_head).lemma == "have"),
        has_gerund=any(sentence.token(i).pos == "VBG" for i in triple_tokens),
        infinitive_in_subject=_has_pos(sentence, record.subject, ("VB",)),
        infinitive_in_relation=_has_pos(sentence, record.relation, ("VB",)),
        words_in_sentence_order=all(a <= b for a, b in zip(ordered, ordered[1:])),
        contains_dep_edge=any(graph.label_of(i) == "dep" for i in triple_tokens),
        processed_conjunction_subject=_processed_conjunction(sentence, record.subject),
        processed_conjunction_relation=_processed_conjunction(sentence, record.relation),
        processed_conjunction_object=_processed_conjunction(sentence, record.object),
        object_before_subject=object_before_subject,
        in_minie_d=record.has_flag("in_minie_d"),
        in_minie_a=record.has_flag("in_minie_a"),
        relation_frequent=relation_frequencies.get(lemma, 0) >= frequent_threshold,
        extracts_quantity=bool(record.quantities),
        extracts_time=record.has_temporal(),
        extracts_space=record.has_spatial(),
    )


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfidenceModel:
    weights: Tuple[float, ...]
    bias: float
    regularization: float
    means: Tuple[float, ...]
    scales: Tuple[float, ...]
    feature_names: Tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self) -> None:
        dims = {len(self.weights), len(self.means), len(self.scales), len(self.feature_names)}
        if len(dims) != 1:
            raise ConfidenceError(f"model dimensions disagree: {sorted(dims)}")
        if any(s <= 0 for s in self.scales):
            raise ConfidenceError("model scales must be positive")
        if self.regularization < 0:
            raise ConfidenceError("regularization must be nonnegative")

    @property
    def dimension(self) -> int:
        return len(self.weights)

    def to_dict(self) -> Dict[str, object]:
        return {
            "weights": list(self.weights),
            "bias": self.bias,
            "reg": self.regularization,
            "means": list(self.means),
            "scales": list(self.scales),
            "feature_names": list(self.feature_names),
        }

    @classmethod
    def from_dict(cls, obj: Mapping[str, object]) -> "ConfidenceModel":
        try:
            validate_model(obj)
        except CorpusFormatError as e:
            raise ConfidenceError(f"bad model file: {e.message}") from e
        model = cls(
            weights=tuple(float(w) for w in obj["weights"]),
            bias=float(obj["bias"]),
            regularization=float(obj["reg"]),
            means=tuple(float(m) for m in obj["means"]),
            scales=tuple(float(s) for s in obj["scales"]),
            feature_names=tuple(obj["feature_names"]),
        )
        if model.feature_names != FEATURE_NAMES:
            raise ConfidenceError("bad model file: feature_names do not match this feature set")
        return model


def _sigmoid(margin: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * margin))


def _objective(z: np.ndarray, signs: np.ndarray, theta: np.ndarray, regularization: float) -> Tuple[float, np.ndarray]:
    """Mean logistic loss plus L2 on weights and bias, with its gradient."""
    margin = z @ theta[:-1] + theta[-1]
    loss = float(np.mean(np.logaddexp(0.0, -signs * margin))) + 0.5 * regularization * float(theta @ theta)
    residual = -signs * _sigmoid(-signs * margin) / len(signs)
    gradient = np.empty_like(theta)
    gradient[:-1] = z.T @ residual
    gradient[-1] = residual.sum()
    return loss, gradient + regularization * theta


def data_loss(model: ConfidenceModel, vectors: Sequence[Union[FeatureVector, np.ndarray]],
              labels: Sequence[bool]) -> float:
    """Unregularized mean logistic loss of a model on labeled vectors."""
    x = np.vstack([_as_array(v) for v in vectors])
    margin = _standardize(model, x) @ np.asarray(model.weights) + model.bias
    signs = np.where(np.asarray(labels, dtype=bool), 1.0, -1.0)
    return float(np.mean(np.logaddexp(0.0, -signs * margin)))


def train(labeled: Sequence[Tuple[Union[FeatureVector, np.ndarray], bool]],
          regularization: float = DEFAULT_REGULARIZATION,
          tolerance: float = GRADIENT_TOLERANCE,
          max_iterations: int = MAX_ITERATIONS) -> ConfidenceModel:
    """Fit standardized logistic regression from zero by gradient descent with backtracking."""
    if regularization < 0:
        raise ConfidenceError("regularization must be nonnegative")
    labels = [bool(label) for _, label in labeled]
    if len(set(labels)) < 2:
        raise ConfidenceError("degenerate labels")

    x = np.vstack([_as_array(v) for v, _ in labeled])
    means = x.mean(axis=0)
    deviation = x.std(axis=0)
    scales = np.where(deviation > 0, deviation, 1.0)
    z = (x - means) / scales
    signs = np.where(np.asarray(labels), 1.0, -1.0)

    theta = np.zeros(x.shape[1] + 1)
    loss, gradient = _objective(z, signs, theta, regularization)
    step = 1.0
    iteration = 0
    while float(np.linalg.norm(gradient)) > tolerance and iteration < max_iterations:
        iteration += 1
        squared = float(gradient @ gradient)
        while True:
            candidate = theta - step * gradient
            candidate_loss, candidate_gradient = _objective(z, signs, candidate, regularization)
            if candidate_loss <= loss - 0.5 * step * squared or step < 1e-12:
                break
            step *= 0.5
        theta, loss, gradient = candidate, candidate_loss, candidate_gradient
        step *= 2.0
    norm = float(np.linalg.norm(gradient))
    if norm > tolerance:
        logger.warning("Training stopped after %d iterations with gradient norm %.3g", iteration, norm)
    else:
        logger.info("Training converged after %d iterations (loss %.6f)", iteration, loss)

    names = FEATURE_NAMES if x.shape[1] == len(FEATURE_NAMES) else tuple(f"x{i}" for i in range(x.shape[1]))
    return ConfidenceModel(
        weights=tuple(float(w) for w in theta[:-1]),
        bias=float(theta[-1]),
        regularization=float(regularization),
        means=tuple(float(m) for m in means),
        scales=tuple(float(s) for s in scales),
        feature_names=names,
    )


def _as_array(features: Union[FeatureVector, np.ndarray, Sequence[float]]) -> np.ndarray:
    if isinstance(features, FeatureVector):
        return features.to_array()
    return np.asarray(features, dtype=np.float64)


def _standardize(model: ConfidenceModel, x: np.ndarray) -> np.ndarray:
    return (x - np.asarray(model.means)) / np.asarray(model.scales)


def score(model: ConfidenceModel, features: Union[FeatureVector, np.ndarray, Sequence[float]]) -> float:
    """sigmoid(w . standardized(x) + b)."""
    x = _as_array(features)
    if x.shape != (model.dimension,):
        raise ConfidenceError(f"feature dimension {x.shape} does not match model dimension {model.dimension}")
    margin = float(_standardize(model, x) @ np.asarray(model.weights)) + model.bias
    return float(np.clip(_sigmoid(np.float64(margin)), 0.0, 1.0))


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bucket:
    lower: float
    upper: float
    count: int
    correct: int

    @property
    def midpoint(self) -> float:
        return (self.lower + self.upper) / 2

    @property
    def precision(self) -> Optional[float]:
        return self.correct / self.count if self.count else None


@dataclass(frozen=True)
class BucketReport:
    buckets: Tuple[Bucket, ...]
    pearson: Optional[float]

    def to_dict(self) -> Dict[str, object]:
        return {
            "buckets": [
                {"lower": b.lower, "upper": b.upper, "count": b.count, "precision": b.precision}
                for b in self.buckets
            ],
            "pearson": self.pearson,
        }


def bucket_index(value: float, k: int) -> int:
    """Equi-width bucket of a score in [0, 1]; the last bucket is closed."""
    return min(int(np.floor(value * k)), k - 1)


def bucket_precision(scored: Iterable[Tuple[float, bool]], k: int = 10) -> BucketReport:
    if k < 2:
        raise ValueError("bucket count must be at least 2")
    counts = [0] * k
    correct = [0] * k
    for value, label in scored:
        i = bucket_index(value, k)
        counts[i] += 1
        correct[i] += 1 if label else 0
    buckets = tuple(Bucket(i / k, (i + 1) / k, counts[i], correct[i]) for i in range(k))
    filled = [b for b in buckets if b.count]
    pearson: Optional[float] = None
    if len(filled) >= 2:
        mids = np.asarray([b.midpoint for b in filled])
        precisions = np.asarray([b.precision for b in filled])
        if precisions.std() > 0:
            pearson = float(np.corrcoef(mids, precisions)[0, 1])
    return BucketReport(buckets, pearson)


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def load_model(path: str) -> ConfidenceModel:
    try:
        with open(path, "r", encoding="utf-8") as f:
            obj = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfidenceError(f"bad model file {path}: {e.msg}") from e
    model = ConfidenceModel.from_dict(obj)
    logger.info("Loaded confidence model %s (%d features)", path, model.dimension)
    return model


def model_to_json(model: ConfidenceModel) -> str:
    return json.dumps(model.to_dict(), indent=2) + "\n"


def load_relation_frequencies(path: str) -> Dict[str, int]:
    """Sum the `relation<TAB>subject_type<TAB>object_type<TAB>count` table per relation."""
    table: Dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_number, (relation, _, _, count) in read_tsv(f, 4):
            if not count.isdigit():
                raise CorpusFormatError("malformed-tsv", f"count {count!r} is not an integer", line_number)
            table[relation] = table.get(relation, 0) + int(count)
    return table


def iter_labeled(lines: Iterable[str]) -> Iterable[Tuple[AnnotatedSentence, ExtractionRecord, bool]]:
    """Read labeled data: sentence lines followed by triple lines carrying `label` 0 or 1."""
    sentence: Optional[AnnotatedSentence] = None
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = loads(line)
            if obj["kind"] == SENTENCE_KIND:
                sentence = decode_sentence(obj)
                continue
            if "label" not in obj:
                raise CorpusFormatError("missing-field", "labeled triple has no label")
            record = decode_record(obj)
            if sentence is None or sentence.key != (record.article_id, record.sentence_number):
                raise CorpusFormatError("orphan-extraction", f"labeled triple {record.key} has no preceding sentence")
        except CorpusFormatError as e:
            raise e.at_line(line_number)
        yield sentence, record, obj["label"] == 1
