#!/usr/bin/env python3
"""
Command-line front end for the triple corpus toolkit.

Subcommands:
  run               full pipeline (ingest -> spate -> postprocess -> confidence -> tiers -> profile -> align)
  profile           corpus statistics over triple files
  relfreq           relation-frequency table over triple files
  align             KB alignment of linked triple files
  train-confidence  fit the confidence model on labeled data
  validate          check interchange files line by line
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List

from plugins.output.registry import open_output

from triplecorpus.config import STAGES, build_config
from triplecorpus.confidence import (
    DEFAULT_FREQUENT_THRESHOLD,
    DEFAULT_REGULARIZATION,
    bucket_precision,
    extract_features,
    iter_labeled,
    load_relation_frequencies,
    model_to_json,
    score,
    train,
)
from triplecorpus.errors import ConfigError, CorpusError
from triplecorpus.ingest import RejectLog, parse_document
from triplecorpus.kb import add_date_hits, align, load_id_map, load_kb, load_meta_facts
from triplecorpus.pipeline import (
    ALIGNMENT_JSON,
    ALIGNMENT_TEXT,
    KB_TOP_RELATIONS,
    REPORT_JSON,
    REPORT_TEXT,
    RunSummary,
    read_triples,
    run,
)
from triplecorpus.profiler import profile, relation_frequencies, relation_frequency_tsv

logger = logging.getLogger("corpus_pipeline")


def write_lines(path: str, text: str) -> None:
    """Write text through the file plugin, or to the terminal when path is "-" or empty."""
    with open_output(path) as plugin:
        plugin.output_all(text.rstrip("\n").split("\n"))


def print_summary(summary: RunSummary) -> None:
    print("\nPipeline summary")
    print(f"  {'stage':<14}{'input':>10}{'emitted':>10}{'rejected':>10}{'filtered':>10}")
    for stage, counts in summary.ledger.items():
        print(f"  {stage:<14}{counts.input:>10,}{counts.emitted:>10,}{counts.rejected:>10,}{counts.filtered:>10,}")
    if summary.ingest_rejects:
        print("  ingest rejects: " + ", ".join(f"{k}={v}" for k, v in sorted(summary.ingest_rejects.items())))
    if any(summary.tiers.values()):
        print("  tiers: " + ", ".join(f"{k}={v:,}" for k, v in summary.tiers.items()))
    processed = summary.ledger["ingest"].input if "ingest" in summary.ledger else 0
    rate = processed / summary.elapsed if summary.elapsed > 0 else 0.0
    print(f"  elapsed: {summary.elapsed:.2f}s ({rate:,.0f} records/s), memory: {summary.memory_mb:.1f} MB")
    print(f"  ledger balanced: {'yes' if summary.balanced else 'NO'}")


def cmd_run(args: argparse.Namespace) -> int:
    overrides: Dict[str, Any] = {
        "input": args.input,
        "out": args.out,
        "redirects": args.redirects,
        "titles": args.titles,
        "model": args.model,
        "kb": args.kb,
        "kb_id_map": args.kb_id_map,
        "meta_facts": args.meta_facts,
        "relfreq": args.relfreq,
        "jobs": args.jobs,
        "strict": args.strict,
        "stages": args.stages,
        "self_link_scope": args.self_link_scope,
        "be_filter_partial": args.be_filter_partial,
        "frequent_threshold": args.frequent_threshold,
        "top_k": args.top_k,
    }
    config = build_config(args.config, overrides)
    summary = run(config)
    print_summary(summary)
    print(f"Wrote outputs to {config.out}")
    return 0 if summary.balanced else 1


def cmd_profile(args: argparse.Namespace) -> int:
    report = profile(read_triples(args.input, args.strict), args.top_k)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_lines(os.path.join(args.out, REPORT_JSON), report.to_json())
        write_lines(os.path.join(args.out, REPORT_TEXT), report.to_text())
        print(f"Profiled {report.total_triples:,} triples into {args.out}")
    else:
        write_lines("-", report.to_text())
    return 0


def cmd_relfreq(args: argparse.Namespace) -> int:
    counts = relation_frequencies(read_triples(args.input, args.strict))
    write_lines(args.out, relation_frequency_tsv(counts) or "")
    return 0


def cmd_align(args: argparse.Namespace) -> int:
    id_map = load_id_map(args.kb_id_map, args.strict) if args.kb_id_map else {}
    indexes = [load_kb([path], id_map=id_map, strict=args.strict) for path in args.kb]
    meta_facts = load_meta_facts(args.meta_facts, id_map, args.strict) if args.meta_facts else None
    triples = list(read_triples(args.input, args.strict))
    report = align(triples, indexes, meta_facts, top_k=KB_TOP_RELATIONS)
    add_date_hits(report, triples, indexes)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_lines(os.path.join(args.out, ALIGNMENT_JSON), report.to_json())
        write_lines(os.path.join(args.out, ALIGNMENT_TEXT), report.to_text())
        print(f"Aligned {len(triples):,} triples against {len(indexes)} KB(s) into {args.out}")
    else:
        write_lines("-", report.to_text())
    return 0


def cmd_train_confidence(args: argparse.Namespace) -> int:
    frequencies = load_relation_frequencies(args.relfreq) if args.relfreq else {}
    with open(args.labeled, "r", encoding="utf-8") as f:
        examples = [
            (extract_features(record, sentence, frequencies, args.frequent_threshold), label)
            for sentence, record, label in iter_labeled(f)
        ]
    print(f"Training on {len(examples):,} labeled triples ({sum(l for _, l in examples):,} correct)")
    model = train(examples, regularization=args.reg)
    write_lines(args.out, model_to_json(model))
    calibration = bucket_precision(((score(model, v), l) for v, l in examples), args.buckets)
    print(f"{'bucket':<14}{'count':>8}{'precision':>11}")
    for bucket in calibration.buckets:
        precision = f"{bucket.precision:.3f}" if bucket.precision is not None else "-"
        print(f"[{bucket.lower:.1f}, {bucket.upper:.1f}){'':<3}{bucket.count:>8,}{precision:>11}")
    if calibration.pearson is not None:
        print(f"Pearson r between bucket midpoint and precision: {calibration.pearson:.3f}")
    print(f"Wrote model to {args.out}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    failed = False
    for path in args.input:
        rejects = RejectLog()
        sentences = records = 0
        with open(path, "rb") as f:
            for _, extractions in parse_document(f, strict=False, rejects=rejects):
                sentences += 1
                records += len(extractions)
        print(f"Validating {path}: {sentences:,} sentences, {records:,} extractions, {rejects.total:,} invalid lines")
        for entry in rejects.entries[:args.max_errors]:
            print(f"  line {entry['line']}: {entry['message']} [{entry['reason']}]")
        if rejects.total:
            failed = True
    if failed:
        print("Validation failed.")
        return 1
    print("All data is valid according to the schema!")
    return 0


def add_strictness(parser: argparse.ArgumentParser) -> None:
    """--strict/--lenient; left as None unless given so config files can decide."""
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--strict", dest="strict", action="store_true", default=None,
                       help="Abort on the first malformed line (default)")
    group.add_argument("--lenient", dest="strict", action="store_false",
                       help="Skip and count malformed lines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Build, annotate, filter, profile and align an open triple corpus")
    parser.add_argument("--log-level", type=str, default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level (default: INFO)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("run", help="Run the corpus pipeline")
    p.add_argument("--config", type=str, help="TOML or JSON config file; flags override its values")
    p.add_argument("--input", type=str, nargs="+", help="Interchange JSON Lines files")
    p.add_argument("--out", type=str, help="Output directory (default: out)")
    p.add_argument("--redirects", type=str, help="Redirect map TSV (source<TAB>target)")
    p.add_argument("--titles", type=str, help="Page-title list, one per line (required by the tiers stage)")
    p.add_argument("--model", type=str, help="Confidence model JSON (required by the confidence stage)")
    p.add_argument("--kb", type=str, nargs="+", help="KB TSV files, one KB per file (required by the align stage)")
    p.add_argument("--kb-id-map", type=str, help="KB id mapping TSV (kb_id<TAB>title)")
    p.add_argument("--meta-facts", type=str, help="Meta-fact TSV for alignment")
    p.add_argument("--relfreq", type=str, help="Relation-frequency TSV for the relation-frequent feature")
    p.add_argument("--jobs", type=int, help="Worker processes (default: 1)")
    add_strictness(p)
    p.add_argument("--stages", type=str, help=f"Comma-separated prefix of: {','.join(STAGES)}")
    p.add_argument("--self-link-scope", type=str, choices=["article", "first-sentence"],
                   help="Where first-phrase self-linking applies (default: article)")
    p.add_argument("--be-filter-partial", action="store_true", default=None,
                   help="Also drop 'be' triples with exactly one typed argument")
    p.add_argument("--frequent-threshold", type=int, help="Count at which a relation is frequent")
    p.add_argument("--top-k", type=int, help="Relations per type pair in the profile report")
    p.set_defaults(func=cmd_run)

    p = subparsers.add_parser("profile", help="Corpus statistics over triple files")
    p.add_argument("--input", type=str, nargs="+", required=True)
    p.add_argument("--out", type=str, help="Output directory for report.json/report.txt (default: print)")
    p.add_argument("--top-k", type=int, default=10)
    add_strictness(p)
    p.set_defaults(func=cmd_profile, strict=True)

    p = subparsers.add_parser("relfreq", help="Relation-frequency TSV over triple files")
    p.add_argument("--input", type=str, nargs="+", required=True)
    p.add_argument("--out", type=str, help="Output TSV path (default: print)")
    add_strictness(p)
    p.set_defaults(func=cmd_relfreq, strict=True)

    p = subparsers.add_parser("align", help="KB alignment of linked triple files")
    p.add_argument("--input", type=str, nargs="+", required=True)
    p.add_argument("--kb", type=str, nargs="+", required=True)
    p.add_argument("--kb-id-map", type=str)
    p.add_argument("--meta-facts", type=str)
    p.add_argument("--out", type=str, help="Output directory for alignment.json/alignment.txt (default: print)")
    add_strictness(p)
    p.set_defaults(func=cmd_align, strict=True)

    p = subparsers.add_parser("train-confidence", help="Fit the confidence model")
    p.add_argument("--labeled", type=str, required=True, help="Labeled JSON Lines (sentences + triples with label)")
    p.add_argument("--out", type=str, required=True, help="Model JSON output path")
    p.add_argument("--reg", type=float, default=DEFAULT_REGULARIZATION, help="L2 regularization strength")
    p.add_argument("--relfreq", type=str, help="Relation-frequency TSV")
    p.add_argument("--frequent-threshold", type=int, default=DEFAULT_FREQUENT_THRESHOLD)
    p.add_argument("--buckets", type=int, default=10, help="Calibration buckets to report")
    p.set_defaults(func=cmd_train_confidence)

    p = subparsers.add_parser("validate", help="Check interchange files line by line")
    p.add_argument("input", type=str, nargs="+")
    p.add_argument("--max-errors", type=int, default=20, help="Invalid lines to print per file")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: List[str] = None) -> int:
    """Main function to parse arguments and dispatch the subcommand."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return 2
    except CorpusError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
