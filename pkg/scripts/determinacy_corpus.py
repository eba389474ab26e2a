#!/usr/bin/env python3
"""Determinacy experiment: translate a corpus of random diagrams under every
strategy (feedback-parallel, incremental, N random resolutions, feedbackless)
and fill the pairwise equivalence matrix for each.

    python scripts/determinacy_corpus.py [--count 30] [--seeds 20] [--samples 200]
"""

import argparse
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from hbd.frontend import normalize, to_io_diagrams
from hbd.gen import corpus
from hbd.harness import run_determinacy


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--count", type=int, default=30)
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--samples", type=int, default=200)
    args = parser.parse_args()

    t0 = time.perf_counter()
    bad = 0
    for i, doc in enumerate(corpus(args.count)):
        diagrams, _ = to_io_diagrams(normalize(doc))
        report = run_determinacy(
            diagrams, seeds=range(args.seeds), samples=args.samples
        )
        sizes = sorted(run.size for run in report.runs)
        verdict = "ok" if report.all_equivalent else "INEQUIVALENT"
        print(
            f"{doc.name:>10}: {len(doc.blocks):2d} blocks, {len(report.runs):2d} strategies, "
            f"term sizes {sizes[0]}..{sizes[-1]}, {verdict}"
        )
        if not report.all_equivalent:
            bad += 1
            print(report.render())
    print(f"done in {time.perf_counter() - t0:.1f}s, {bad} failing diagrams")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
