"""
test_studies.py

Paired multi-seed studies. These train many models and only run with
--run-slow; the Cora checks also need GDB_CORA_DIR to point at a dataset
directory holding the public Cora split.
"""
import os

import numpy as np
import pytest

CORA_DIR = os.environ.get("GDB_CORA_DIR")
needs_cora = pytest.mark.skipif(CORA_DIR is None, reason="GDB_CORA_DIR is not set")


def mean_accuracy(rows, method, grid_value=None):
    accs = [
        row.test_acc
        for row in rows
        if row.method == method and (grid_value is None or row.grid_value == grid_value)
    ]
    assert accs, f"no rows for {method}"
    return float(np.mean(accs))


@pytest.mark.slow
@needs_cora
def test_cora_transductive():
    from graphdistill.harness import run_experiment

    rows = run_experiment(
        {
            "kind": "transductive",
            "dataset": CORA_DIR,
            "split": {"mode": "file"},
            "methods": ["teacher_only", "glnn", "adagmlp"],
        }
    )
    teacher = mean_accuracy(rows, "teacher_only")
    glnn = mean_accuracy(rows, "glnn")
    adagmlp = mean_accuracy(rows, "adagmlp")
    assert 0.79 <= teacher <= 0.85
    assert 0.79 <= glnn <= 0.85
    assert adagmlp >= glnn - 0.003
    assert adagmlp >= 0.81


@pytest.mark.slow
@needs_cora
def test_cora_low_label_rate():
    from graphdistill.harness import run_experiment

    rows = run_experiment(
        {"kind": "label_rate_sweep", "dataset": CORA_DIR, "grid": {"values": [0.01]}}
    )
    assert mean_accuracy(rows, "adagmlp") > mean_accuracy(rows, "glnn")


@pytest.mark.slow
@needs_cora
def test_cora_missing_features():
    from graphdistill.harness import run_experiment

    rows = run_experiment(
        {
            "kind": "feature_missing_sweep",
            "dataset": CORA_DIR,
            "split": {"mode": "file"},
            "methods": ["glnn", "adagmlp"],
            "grid": {"values": [0.5]},
        }
    )
    assert mean_accuracy(rows, "adagmlp") > mean_accuracy(rows, "glnn")


@pytest.mark.slow
def test_adaboost_combiner_is_not_worse():
    from graphdistill.harness import run_experiment

    rows = run_experiment({"kind": "ensemble_compare", "dataset": "preset:test"})
    adaboost = mean_accuracy(rows, "adagmlp")
    for method in ("average", "vote", "bagging"):
        assert adaboost >= mean_accuracy(rows, method) - 0.002, method


@pytest.mark.slow
def test_latency_grows_with_students():
    from graphdistill.harness import run_experiment

    rows = run_experiment(
        {
            "kind": "latency_bench",
            "dataset": "preset:latency",
            "seeds": [0],
            "methods": ["adagmlp"],
            "distill": {"max_epochs": 5},
            "grid": {"key": "k", "values": [2, 4]},
            "latency": {"warmups": 5, "repeats": 50},
        }
    )
    by_k = {row.extra["k"]: row.infer_ms for row in rows}
    assert set(by_k) == {2, 4}
    assert 1.6 <= by_k[4] / by_k[2] <= 2.6
