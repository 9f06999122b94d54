#!/usr/bin/env python3
"""Benchmark both strategies (staged engine vs raw prompt) on the bundled
corpus with stub backends and print the comparison tables side by side."""

import tempfile
from pathlib import Path

from semanticdraw.evaluation import benchmark
from semanticdraw.pipeline import stub_backends

CORPUS_DIR = Path(__file__).parent / "corpus"


def main() -> None:
    texts = [p.read_text(encoding="utf-8") for p in sorted(CORPUS_DIR.glob("*.txt"))]
    print(f"corpus: {len(texts)} texts from {CORPUS_DIR}\n")

    with tempfile.TemporaryDirectory(prefix="sde-bench-") as tmp:
        backends = stub_backends(tmp)
        for strategy in ("sde", "raw_prompt"):
            report = benchmark(texts, strategy, backends, n_repro=3)
            print(report.render_table())
            print()


if __name__ == "__main__":
    main()
