#!/usr/bin/env python3
"""
End-to-end smoke test for the triple corpus toolkit.
This script generates a synthetic corpus, runs every command on it and checks
the outputs, including that the pipeline output does not depend on the worker count.
Unit tests live under tests/ and run with pytest.
"""

import filecmp
import json
import os
import subprocess
import sys
from typing import List, Tuple

# ANSI color codes for terminal output
GREEN = "\033[92m"
YELLOW = "\033[93m"
RED = "\033[91m"
BLUE = "\033[94m"
BOLD = "\033[1m"
RESET = "\033[0m"

# Directory for test results
TEST_RESULTS_DIR = "tests/results"
DATA_DIR = os.path.join(TEST_RESULTS_DIR, "data")

def print_header(message: str) -> None:
    """Print a formatted header message."""
    print(f"\n{BOLD}{BLUE}{'=' * 80}{RESET}")
    print(f"{BOLD}{BLUE}= {message}{RESET}")
    print(f"{BOLD}{BLUE}{'=' * 80}{RESET}\n")

def print_result(test_name: str, success: bool, message: str = "") -> None:
    """Print a formatted test result."""
    status = f"{GREEN}PASS{RESET}" if success else f"{RED}FAIL{RESET}"
    print(f"{BOLD}{test_name}:{RESET} {status} {message}")

def run_command(command: str) -> Tuple[int, str]:
    """Run a shell command and return the exit code and output."""
    process = subprocess.Popen(
        command,
        shell=True,
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True
    )
    output, _ = process.communicate()
    return process.returncode, output

def count_triples(file_path: str) -> Tuple[bool, int]:
    """Validate that a file contains JSON Lines and count the triple lines."""
    try:
        count = 0
        with open(file_path, 'r', encoding='utf-8') as f:
            for line in f:
                line = line.strip()
                if line and json.loads(line)["kind"] == "triple":
                    count += 1
        return True, count
    except (OSError, ValueError, KeyError) as e:
        print(f"Error reading JSON Lines: {e}")
        return False, 0

def same_outputs(first: str, second: str) -> Tuple[bool, List[str]]:
    """Compare two output directories file by file."""
    names = sorted(os.listdir(first))
    if names != sorted(os.listdir(second)):
        return False, ["<file list>"]
    _, mismatch, errors = filecmp.cmpfiles(first, second, names, shallow=False)
    return not mismatch and not errors, mismatch + errors

def cleanup_test_files() -> None:
    """Remove test files created during testing."""
    if os.path.exists(TEST_RESULTS_DIR):
        for root, _, files in os.walk(TEST_RESULTS_DIR, topdown=False):
            for file in files:
                os.remove(os.path.join(root, file))

def ensure_test_dir_exists() -> None:
    """Ensure the test results directory exists."""
    os.makedirs(DATA_DIR, exist_ok=True)

def run_tests() -> bool:
    """Run all tests and report results."""
    test_results = []
    ensure_test_dir_exists()
    data = lambda name: os.path.join(DATA_DIR, name)
    resources = (f"--redirects {data('redirects.tsv')} --titles {data('titles.txt')} "
                 f"--model {data('model.json')} --kb {data('kb.tsv')} --meta-facts {data('meta-facts.tsv')}")

    # Test 1: Corpus generation
    print_header("Test 1: Synthetic Corpus Generation")
    exit_code, output = run_command(
        f"python generate_corpus.py --articles 200 --labeled 1500 --seed 42 --output file --output-dir {DATA_DIR}")
    success = exit_code == 0 and "Generated 200 articles" in output
    test_results.append(("Corpus Generation", success))
    print_result("Corpus Generation", success)
    print(f"{YELLOW}Output:{RESET}\n{output}")

    # Test 2: Validation of the generated corpus
    print_header("Test 2: Validation of Generated Corpus")
    exit_code, output = run_command(f"python corpus_pipeline.py validate {data('corpus.jsonl')}")
    success = exit_code == 0 and "All data is valid" in output
    test_results.append(("Corpus Validation", success))
    print_result("Corpus Validation", success)
    print(f"{YELLOW}Output:{RESET}\n{output}")

    # Test 3: Confidence training
    print_header("Test 3: Confidence Model Training")
    exit_code, output = run_command(
        f"python corpus_pipeline.py train-confidence --labeled {data('labeled.jsonl')} --out {data('model.json')} --buckets 10")
    pearson = None
    for line in output.split('\n'):
        if line.startswith("Pearson r"):
            pearson = float(line.rsplit(':', 1)[1])
    success = exit_code == 0 and pearson is not None and pearson >= 0.9
    test_results.append(("Confidence Training", success))
    print_result("Confidence Training", success, f"(Pearson r: {pearson})")
    print(f"{YELLOW}Output excerpt:{RESET}\n{output[-600:]}")

    # Test 4: Full pipeline with one worker
    print_header("Test 4: Full Pipeline (1 worker)")
    out_one = os.path.join(TEST_RESULTS_DIR, "run-1")
    exit_code, output = run_command(
        f"python corpus_pipeline.py run --input {data('corpus.jsonl')} {resources} --out {out_one} --jobs 1")
    file_success, triples = count_triples(os.path.join(out_one, "opiec.jsonl"))
    success = exit_code == 0 and "ledger balanced: yes" in output and file_success and triples > 0
    test_results.append(("Pipeline (1 worker)", success))
    print_result("Pipeline (1 worker)", success, f"({triples} triples)")
    print(f"{YELLOW}Output:{RESET}\n{output}")

    # Test 5: Full pipeline with eight workers
    print_header("Test 5: Full Pipeline (8 workers)")
    out_eight = os.path.join(TEST_RESULTS_DIR, "run-8")
    exit_code, output = run_command(
        f"python corpus_pipeline.py run --input {data('corpus.jsonl')} {resources} --out {out_eight} --jobs 8")
    identical, differing = same_outputs(out_one, out_eight)
    success = exit_code == 0 and identical
    test_results.append(("Worker-count Determinism", success))
    print_result("Worker-count Determinism", success, "" if identical else f"(differs: {', '.join(differing)})")
    print(f"{YELLOW}Output excerpt:{RESET}\n{output[-400:]}")

    # Test 6: Config file
    print_header("Test 6: Config File with Flag Overrides")
    out_config = os.path.join(TEST_RESULTS_DIR, "run-config")
    exit_code, output = run_command(
        f"python corpus_pipeline.py run --config configs/pipeline.toml --input {data('corpus.jsonl')} "
        f"{resources} --out {out_config} --stages ingest,spate,postprocess --lenient")
    file_success, triples = count_triples(os.path.join(out_config, "opiec.jsonl"))
    success = exit_code == 0 and file_success and triples > 0 and not os.path.exists(os.path.join(out_config, "clean.jsonl"))
    test_results.append(("Config File", success))
    print_result("Config File", success)
    print(f"{YELLOW}Output:{RESET}\n{output}")

    # Test 7: Standalone profile, relfreq and align
    print_header("Test 7: Profile, Relation Frequencies and Alignment")
    standalone = os.path.join(TEST_RESULTS_DIR, "standalone")
    commands = [
        f"python corpus_pipeline.py profile --input {out_one}/opiec.jsonl --out {standalone}",
        f"python corpus_pipeline.py relfreq --input {out_one}/opiec.jsonl --out {standalone}/relfreq.tsv",
        f"python corpus_pipeline.py align --input {out_one}/linked.jsonl --kb {data('kb.tsv')} "
        f"--meta-facts {data('meta-facts.tsv')} --out {standalone}",
    ]
    outputs = [run_command(command) for command in commands]
    same_report = filecmp.cmp(os.path.join(out_one, "relfreq.tsv"), os.path.join(standalone, "relfreq.tsv"), shallow=False)
    success = all(code == 0 for code, _ in outputs) and same_report
    test_results.append(("Standalone Commands", success))
    print_result("Standalone Commands", success, "(relfreq.tsv matches the pipeline's)" if same_report else "")
    print(f"{YELLOW}Output:{RESET}\n" + "\n".join(out for _, out in outputs))

    # Test 8: Strict mode stops on a malformed line
    print_header("Test 8: Strict Mode on Malformed Input")
    broken = data("broken.jsonl")
    with open(data("corpus.jsonl"), 'r', encoding='utf-8') as source, open(broken, 'w', encoding='utf-8') as target:
        target.write(source.readline())
        target.write('{"kind": "sentence", "article_id": 1}\n')
        target.write(source.read())
    exit_code, output = run_command(
        f"python corpus_pipeline.py run --input {broken} --stages ingest --out {os.path.join(TEST_RESULTS_DIR, 'run-broken')}")
    success = exit_code == 1 and "stage 'ingest' failed" in output
    test_results.append(("Strict Mode", success))
    print_result("Strict Mode", success)
    print(f"{YELLOW}Output:{RESET}\n{output}")

    # Summary
    print_header("Test Summary")
    all_passed = all(result[1] for result in test_results)

    for test_name, success in test_results:
        status = f"{GREEN}PASS{RESET}" if success else f"{RED}FAIL{RESET}"
        print(f"{test_name}: {status}")

    overall_status = f"{GREEN}ALL TESTS PASSED{RESET}" if all_passed else f"{RED}SOME TESTS FAILED{RESET}"
    print(f"\n{BOLD}Overall: {overall_status} ({sum(1 for _, s in test_results if s)}/{len(test_results)}){RESET}")
    return all_passed

if __name__ == "__main__":
    try:
        # Clean up any previous test files
        cleanup_test_files()

        # Run all tests
        sys.exit(0 if run_tests() else 1)

    except KeyboardInterrupt:
        print(f"\n{YELLOW}Test execution interrupted.{RESET}")
        sys.exit(1)
