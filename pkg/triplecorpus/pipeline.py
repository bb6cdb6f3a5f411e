"""
End-to-end corpus construction: ingest, SpaTe annotation, postprocessing,
confidence scoring, tier filtering, profiling and KB alignment.

Work is sharded by article. Per-article stages are pure functions of the
article and the loaded resources, so results are independent of the worker
count; the parent process sorts by record key and is the only writer.
"""

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import AbstractSet, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import psutil

from plugins.output.registry import open_output

from .confidence import ConfidenceModel, extract_features, load_model, load_relation_frequencies, score
from .config import STAGES, PipelineConfig
from .errors import CorpusError, CorpusFormatError, PipelineError
from .ingest import Document, RejectLog, group_articles, link_record, load_redirects, load_titles, parse_document, self_link_article
from .kb import KbIndex, add_date_hits, align, is_alignable, load_id_map, load_kb, load_meta_facts
from .model import AnnotatedSentence, ExtractionRecord
from .postprocess import filter_be_mismatch, rearrange_links
from .profiler import CorpusProfile, relation_frequency_tsv
from .serialization import dumps, encode_record, serialize, serialize_sentence
from .spate import annotate
from .tiers import TierVerdict, classify

logger = logging.getLogger(__name__)

# Stages that transform records one at a time inside a worker.
RECORD_STAGES = ("ingest", "spate", "postprocess", "confidence", "tiers")

OPIEC_FILE = "opiec.jsonl"
CLEAN_FILE = "clean.jsonl"
LINKED_FILE = "linked.jsonl"
REJECTS_FILE = "rejects.jsonl"
REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"
RELFREQ_FILE = "relfreq.tsv"
ALIGNMENT_JSON = "alignment.json"
ALIGNMENT_TEXT = "alignment.txt"
MANIFEST_FILE = "manifest.json"

# KB relations listed per open relation in alignment tables.
KB_TOP_RELATIONS = 3

# Config keys left out of the manifest so it stays identical across worker counts and output dirs.
_MANIFEST_EXCLUDED = ("jobs", "out")


@dataclass
class StageCount:
    """Conservation ledger for one stage: input = emitted + rejected + filtered."""

    input: int = 0
    emitted: int = 0
    rejected: int = 0
    filtered: int = 0

    def merge(self, other: "StageCount") -> "StageCount":
        return StageCount(self.input + other.input, self.emitted + other.emitted,
                          self.rejected + other.rejected, self.filtered + other.filtered)

    @property
    def balanced(self) -> bool:
        return self.input == self.emitted + self.rejected + self.filtered

    def to_dict(self) -> Dict[str, object]:
        return {"input": self.input, "emitted": self.emitted, "rejected": self.rejected,
                "filtered": self.filtered, "balanced": self.balanced}


def _empty_ledger() -> Dict[str, StageCount]:
    return {stage: StageCount() for stage in STAGES}


def merge_ledgers(a: Mapping[str, StageCount], b: Mapping[str, StageCount]) -> Dict[str, StageCount]:
    return {stage: a.get(stage, StageCount()).merge(b.get(stage, StageCount())) for stage in STAGES}


@dataclass(frozen=True)
class RecordOutcome:
    """Final state of one record: kept (with an optional tier verdict) or dropped by a stage."""

    record: ExtractionRecord
    verdict: Optional[TierVerdict] = None
    dropped: Optional[Tuple[str, str]] = None

    @property
    def kept(self) -> bool:
        return self.dropped is None


@dataclass
class ArticleResult:
    documents: List[Tuple[AnnotatedSentence, List[RecordOutcome]]]
    ledger: Dict[str, StageCount]
    profile: Optional[CorpusProfile] = None


def _reason_of(error: CorpusError) -> str:
    if isinstance(error, CorpusFormatError):
        return error.reason
    name = type(error).__name__.replace("Error", "")
    return "".join(f"-{c.lower()}" if c.isupper() else c for c in name).lstrip("-")


def _context(record: ExtractionRecord) -> str:
    return f"article {record.article_id} sentence {record.sentence_number} extraction {record.extraction_index}"


@dataclass(frozen=True)
class StageRunner:
    """Loaded resources plus the per-article stage chain."""

    config: PipelineConfig
    redirects: Mapping[str, str] = field(default_factory=dict)
    titles: AbstractSet[str] = frozenset()
    model: Optional[ConfidenceModel] = None
    relation_frequencies: Mapping[str, int] = field(default_factory=dict)

    def process(self, article: List[Document]) -> ArticleResult:
        ledger = _empty_ledger()
        if self.config.enabled("ingest"):
            article = self_link_article(article, self.config.self_link_scope)
        profile = CorpusProfile() if self.config.enabled("profile") else None

        documents = []
        for sentence, records in article:
            outcomes = [self._process_record(sentence, record, ledger) for record in records]
            if profile is not None:
                for outcome in outcomes:
                    if outcome.kept:
                        profile.add(sentence, outcome.record)
                        ledger["profile"].input += 1
                        ledger["profile"].emitted += 1
            documents.append((sentence, outcomes))
        return ArticleResult(documents, ledger, profile)

    def _process_record(self, sentence: AnnotatedSentence, record: ExtractionRecord,
                        ledger: Dict[str, StageCount]) -> RecordOutcome:
        verdict = None
        for stage in self.config.stages:
            if stage not in RECORD_STAGES:
                break
            counts = ledger[stage]
            counts.input += 1
            try:
                if stage == "ingest":
                    record = link_record(sentence, record, self.redirects)
                elif stage == "spate":
                    record = annotate(sentence, record)
                elif stage == "postprocess":
                    record = rearrange_links(record, sentence)
                    decision = filter_be_mismatch(record, sentence, self.config.be_filter_partial)
                    if not decision.keep:
                        counts.filtered += 1
                        logger.debug("Filtered %s: %s", _context(record), decision.reason)
                        return RecordOutcome(record, dropped=(stage, decision.reason))
                elif stage == "confidence":
                    features = extract_features(record, sentence, self.relation_frequencies,
                                                self.config.frequent_threshold)
                    record = replace(record, confidence=score(self.model, features))
                elif stage == "tiers":
                    verdict = classify(record, sentence, self.titles)
            except CorpusError as e:
                if self.config.strict:
                    raise PipelineError(stage, _context(record), e) from e
                counts.rejected += 1
                logger.warning("Rejected %s in stage %s: %s", _context(record), stage, e)
                return RecordOutcome(record, dropped=(stage, _reason_of(e)))
            counts.emitted += 1
        return RecordOutcome(record, verdict=verdict)


_WORKER: Optional[StageRunner] = None


def _init_worker(runner: StageRunner) -> None:
    global _WORKER
    _WORKER = runner


def _process_in_worker(article: List[Document]) -> ArticleResult:
    return _WORKER.process(article)


def process_articles(runner: StageRunner, articles: Sequence[List[Document]], jobs: int = 1) -> Iterator[ArticleResult]:
    """Run the stage chain over articles, yielding results in article order."""
    if jobs == 1 or len(articles) < 2:
        for article in articles:
            yield runner.process(article)
        return
    chunksize = max(1, len(articles) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(runner,)) as executor:
        yield from executor.map(_process_in_worker, articles, chunksize=chunksize)


def file_digest(path: str) -> str:
    sha = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            sha.update(block)
    return sha.hexdigest()


def read_documents(paths: Sequence[str], strict: bool, rejects: RejectLog) -> List[Document]:
    """Parse every input file and return documents sorted by sentence key."""
    documents: List[Document] = []
    for path in paths:
        logger.info("Reading %s", path)
        try:
            with open(path, "rb") as f:
                documents.extend(parse_document(f, strict, rejects))
        except CorpusFormatError as e:
            raise PipelineError("ingest", path, e) from e
    documents.sort(key=lambda d: d[0].key)
    return documents


def _sentence_block(sentence: AnnotatedSentence, records: Iterable[ExtractionRecord]) -> List[str]:
    lines = [serialize(r) for r in sorted(records, key=lambda r: r.extraction_index)]
    return [serialize_sentence(sentence)] + lines if lines else []


def _reject_line(outcome: RecordOutcome) -> str:
    if outcome.dropped is not None:
        stage, reason = outcome.dropped
    else:
        stage, reason = "tiers", ",".join(outcome.verdict.reasons)
    return dumps({**encode_record(outcome.record), "stage": stage, "reason": reason})


def _write(out_dir: str, name: str, lines: Iterable[str]) -> int:
    with open_output(os.path.join(out_dir, name)) as plugin:
        return plugin.output_all(lines)


@dataclass
class RunSummary:
    ledger: Dict[str, StageCount]
    ingest_rejects: Dict[str, int]
    tiers: Dict[str, int]
    outputs: Dict[str, int]
    elapsed: float = 0.0
    memory_mb: float = 0.0

    @property
    def balanced(self) -> bool:
        return all(count.balanced for count in self.ledger.values())


def load_runner(config: PipelineConfig, rejects: RejectLog) -> StageRunner:
    redirects: Dict[str, str] = {}
    if config.redirects:
        redirects = load_redirects(config.redirects, config.strict, rejects)
    titles: FrozenSet[str] = frozenset()
    if config.enabled("tiers"):
        titles = load_titles(config.titles)
    model = None
    relation_frequencies: Dict[str, int] = {}
    if config.enabled("confidence"):
        model = load_model(config.model)
        if config.relfreq:
            relation_frequencies = load_relation_frequencies(config.relfreq)
    return StageRunner(config, redirects, titles, model, relation_frequencies)


def load_indexes(config: PipelineConfig, rejects: RejectLog) -> Tuple[List[KbIndex], Optional[Mapping]]:
    id_map = load_id_map(config.kb_id_map, config.strict) if config.kb_id_map else {}
    indexes = [load_kb([path], id_map=id_map, strict=config.strict, rejects=rejects) for path in config.kb]
    meta_facts = load_meta_facts(config.meta_facts, id_map, config.strict) if config.meta_facts else None
    return indexes, meta_facts


def run(config: PipelineConfig) -> RunSummary:
    """Run the enabled stages and write every output into config.out.

    Raises ConfigError before any processing if the config is invalid, and
    PipelineError (stage plus record context) on a fatal error in strict mode.
    """
    config.validate()
    started = time.time()
    rejects = RejectLog()
    resource_rejects = RejectLog()
    try:
        runner = load_runner(config, resource_rejects)
        indexes, meta_facts = load_indexes(config, resource_rejects) if config.enabled("align") else ([], None)
    except CorpusError as e:
        raise PipelineError("ingest", "resource files", e) from e

    documents = read_documents(config.input, config.strict, rejects)
    articles = list(group_articles(documents))
    logger.info("Processing %d sentences in %d articles with %d worker(s)", len(documents), len(articles), config.jobs)

    ledger = _empty_ledger()
    ledger["ingest"].input += rejects.total
    ledger["ingest"].rejected += rejects.total
    profile = CorpusProfile()
    results: List[Tuple[AnnotatedSentence, List[RecordOutcome]]] = []
    for result in process_articles(runner, articles, config.jobs):
        ledger = merge_ledgers(ledger, result.ledger)
        results.extend(result.documents)
        if result.profile is not None:
            profile = profile.merge(result.profile)
    results.sort(key=lambda d: d[0].key)

    outputs = _write_outputs(config, results, profile, indexes, meta_facts, ledger)
    kept = [o for _, outcomes in results for o in outcomes if o.kept]
    tiers = {
        "opiec": len(kept),
        "clean": sum(o.verdict is not None and o.verdict.clean for o in kept),
        "linked": sum(o.verdict is not None and o.verdict.linked for o in kept),
    }
    manifest = {
        "inputs": [{"path": path, "sha256": file_digest(path)} for path in config.input],
        "config": {k: v for k, v in config.to_dict().items() if k not in _MANIFEST_EXCLUDED},
        "stages": {stage: ledger[stage].to_dict() for stage in STAGES if config.enabled(stage)},
        "ingest_rejects": dict(sorted(rejects.by_reason.items())),
        "resource_rejects": dict(sorted(resource_rejects.by_reason.items())),
        "tiers": tiers if config.enabled("tiers") else None,
        "outputs": dict(sorted(outputs.items())),
    }
    outputs[MANIFEST_FILE] = _write(config.out, MANIFEST_FILE, [json.dumps(manifest, indent=2, sort_keys=True)])

    summary = RunSummary(
        ledger={stage: ledger[stage] for stage in STAGES if config.enabled(stage)},
        ingest_rejects=dict(rejects.by_reason),
        tiers=tiers,
        outputs=outputs,
        elapsed=time.time() - started,
        memory_mb=psutil.Process().memory_info().rss / (1024 * 1024),
    )
    if not summary.balanced:
        logger.error("Conservation ledger does not balance: %s", manifest["stages"])
    return summary


def _write_outputs(config: PipelineConfig, results: List[Tuple[AnnotatedSentence, List[RecordOutcome]]],
                   profile: CorpusProfile, indexes: Sequence[KbIndex], meta_facts: Optional[Mapping],
                   ledger: Dict[str, StageCount]) -> Dict[str, int]:
    out = config.out
    os.makedirs(out, exist_ok=True)
    outputs: Dict[str, int] = {}

    def tier_lines(predicate) -> Iterator[str]:
        for sentence, outcomes in results:
            yield from _sentence_block(sentence, [o.record for o in outcomes if o.kept and predicate(o)])

    outputs[OPIEC_FILE] = _write(out, OPIEC_FILE, tier_lines(lambda o: True))
    rejected = [o for _, outcomes in results for o in outcomes
                if not o.kept or (o.verdict is not None and not o.verdict.clean)]
    outputs[REJECTS_FILE] = _write(out, REJECTS_FILE, (_reject_line(o) for o in rejected))
    if config.enabled("tiers"):
        outputs[CLEAN_FILE] = _write(out, CLEAN_FILE, tier_lines(lambda o: o.verdict.clean))
        outputs[LINKED_FILE] = _write(out, LINKED_FILE, tier_lines(lambda o: o.verdict.linked))

    if config.enabled("profile"):
        report = profile.report(config.top_k)
        outputs[REPORT_JSON] = _write(out, REPORT_JSON, [report.to_json().rstrip("\n")])
        outputs[REPORT_TEXT] = _write(out, REPORT_TEXT, [report.to_text().rstrip("\n")])
        outputs[RELFREQ_FILE] = _write(out, RELFREQ_FILE, relation_frequency_tsv(profile.relations).splitlines())

    if config.enabled("align"):
        linked = [(s, o.record) for s, outcomes in results for o in outcomes if o.kept and o.verdict.linked]
        alignable = [(s, r) for s, r in linked if is_alignable(s, r)]
        ledger["align"].input += len(linked)
        ledger["align"].emitted += len(alignable)
        ledger["align"].filtered += len(linked) - len(alignable)
        report = align(alignable, indexes, meta_facts, top_k=KB_TOP_RELATIONS)
        kept = [(s, o.record) for s, outcomes in results for o in outcomes if o.kept]
        add_date_hits(report, kept, indexes)
        outputs[ALIGNMENT_JSON] = _write(out, ALIGNMENT_JSON, [report.to_json().rstrip("\n")])
        outputs[ALIGNMENT_TEXT] = _write(out, ALIGNMENT_TEXT, [report.to_text().rstrip("\n")])
    return outputs


def read_triples(paths: Sequence[str], strict: bool = True,
                 rejects: Optional[RejectLog] = None) -> Iterator[Tuple[AnnotatedSentence, ExtractionRecord]]:
    """Stream (sentence, triple) pairs from pipeline outputs such as opiec.jsonl."""
    for path in paths:
        with open(path, "rb") as f:
            for sentence, records in parse_document(f, strict, rejects):
                for record in records:
                    yield sentence, record
