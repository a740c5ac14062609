"""Benchmark-oriented smoke tests.

The full-size comparison is deselected by default; run it with ``pytest -m slow``.
"""
import time

import pytest
from rich.console import Console

from sentibench.config import load_config
from sentibench.harness import BenchmarkHarness
from sentibench.synthetic import generate_corpus, write_corpus


def test_compare_benchmark_smoke(small_config):
    """Collect a basic timing metric without strict performance assertions."""
    harness = BenchmarkHarness(small_config, jobs=3, quiet=True, console=Console(quiet=True))
    start = time.perf_counter()
    summary = harness.compare()
    elapsed = time.perf_counter() - start

    assert summary["complete"]
    # Loose bound: catches hangs, not noise.
    assert elapsed < 60.0


@pytest.mark.slow
def test_compare_on_6000_generated_documents(tmp_path):
    data = write_corpus(generate_corpus(6000, seed=0), tmp_path / "synthetic.csv")
    config = load_config(None, {"seed": 0, "data.path": str(data), "output_dir": str(tmp_path / "out")})
    start = time.perf_counter()
    summary = BenchmarkHarness(config, jobs=3, quiet=True, console=Console(quiet=True)).compare()
    elapsed = time.perf_counter() - start

    assert summary["complete"]
    accuracy = {row["model"]: row["metrics"]["accuracy"] for row in summary["models"]}
    assert all(value > 1 / 3 for value in accuracy.values())
    assert accuracy["bilstm"] >= accuracy["lexicon-rf"] >= accuracy["nb"]
    assert summary["class_distribution"]["test"] == {"-1": 500, "0": 500, "1": 500}
    assert elapsed < 15 * 60
