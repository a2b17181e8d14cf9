"""Throughput comparison of the two identifier-scanner backends.

Usage: python benchmarks/bench_scan.py [--texts N] [--repeat K]

Scans the same synthetic answer-text corpus with the compiled kernel and
the pure-Python fallback, checks they agree, and reports MB/s for each plus
the end-to-end extraction rate through the active backend.
"""

import argparse
import random
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from textgen import random_text  # noqa: E402

from multidimer.extract import SCANNER_BACKEND, extract_commit_refs  # noqa: E402
from multidimer.extract import _scan_py  # noqa: E402

try:
    from multidimer.extract import _scan
except ImportError:
    _scan = None


def build_corpus(n_texts: int) -> list[bytes]:
    rng = random.Random(8080)
    prose = (
        "The retry handler kept the queue draining during the upgrade. "
        "Fixed by commit {sha} after review; see gerrit for the change. "
    )
    corpus = []
    for i in range(n_texts):
        sha = "".join(rng.choice("0123456789abcdef") for _ in range(rng.choice([7, 12, 40])))
        text = prose.format(sha=sha) + random_text(rng)
        corpus.append(text.encode("utf-8"))
    return corpus


def time_backend(scan, corpus: list[bytes], repeat: int) -> float:
    runs = []
    for _ in range(repeat):
        start = time.perf_counter()
        for data in corpus:
            scan(data)
        runs.append(time.perf_counter() - start)
    return min(runs)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--texts", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    corpus = build_corpus(args.texts)
    total_bytes = sum(len(data) for data in corpus)
    mb = total_bytes / 1e6
    print(f"corpus: {args.texts} texts, {mb:.1f} MB")

    mismatches = sum(
        1 for data in corpus if _scan is not None and _scan.scan(data) != _scan_py.scan(data)
    )
    if _scan is not None:
        print(f"backend agreement: {'ok' if mismatches == 0 else f'{mismatches} MISMATCHES'}")

    py_time = time_backend(_scan_py.scan, corpus, args.repeat)
    print(f"python scanner : {py_time:.3f}s  ({mb / py_time:8.1f} MB/s)")
    if _scan is not None:
        cy_time = time_backend(_scan.scan, corpus, args.repeat)
        print(f"cython scanner : {cy_time:.3f}s  ({mb / cy_time:8.1f} MB/s)")
        print(f"speedup        : {py_time / cy_time:.2f}x")
    else:
        print("cython scanner : not built")

    texts = [data.decode("utf-8") for data in corpus]
    start = time.perf_counter()
    refs = 0
    for i, text in enumerate(texts):
        refs += len(extract_commit_refs(text, f"B{i}"))
    elapsed = time.perf_counter() - start
    print(
        f"full extraction ({SCANNER_BACKEND} backend): "
        f"{len(texts) / elapsed:,.0f} texts/s, {refs} refs"
    )
    return 0 if mismatches == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
