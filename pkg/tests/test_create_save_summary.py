import os

import pandas as pd
import pytest
from numpy.testing import assert_almost_equal

from graphdistill.constants_harness import MetricRow
from graphdistill.create_save_summary import (
    CreateSaveSummary,
    emit_report,
    read_rows,
    summarize_rows,
)


@pytest.fixture()
def rows():
    return [
        MetricRow("label_rate_sweep", "adagmlp", "label_rate", 0.01, seed, acc, acc, 10.0, 1.0)
        for seed, acc in enumerate([1.0, 2.0, 3.0])
    ] + [MetricRow("label_rate_sweep", "glnn", "label_rate", 0.01, 0, 0.5, 0.5, 5.0, 0.5)]


def test_summarize_rows(rows):
    summary = summarize_rows(rows)
    assert list(summary["method"]) == ["adagmlp", "glnn"]
    adagmlp = summary.iloc[0]
    assert adagmlp["n"] == 3
    assert_almost_equal(adagmlp["test_acc_mean"], 2.0)
    assert_almost_equal(adagmlp["test_acc_std_population"], 0.8165, decimal=4)
    assert summary.iloc[1]["test_acc_std_population"] == 0.0


def test_summarize_no_rows():
    summary = summarize_rows([])
    assert summary.empty
    assert "test_acc_mean" in summary.columns


@pytest.mark.parametrize("filename", ["runs.csv", "runs.jsonl"])
def test_write_and_read_rows(tmpdir, rows, filename):
    path = os.path.join(tmpdir, "out", filename)
    summary_path = emit_report(rows, path)
    assert summary_path == os.path.join(tmpdir, "out", "runs.summary.csv")
    test = read_rows(path)
    assert [r.method for r in test] == [r.method for r in rows]
    assert [r.test_acc for r in test] == [r.test_acc for r in rows]
    summary = pd.read_csv(summary_path)
    assert list(summary["n"]) == [3, 1]


def test_csv_header(tmpdir):
    path = os.path.join(tmpdir, "empty.csv")
    saver = CreateSaveSummary([], path, summary=False)
    saver.write_rows()
    assert saver.maybe_write_summary() is None
    with open(path) as f:
        header = f.read().strip()
    assert header == "experiment,method,grid_key,grid_value,seed,test_acc,val_acc,train_ms,infer_ms"
    assert not os.path.exists(os.path.join(tmpdir, "empty.summary.csv"))


def test_unknown_format(tmpdir):
    from graphdistill.errors import ConfigError

    with pytest.raises(ConfigError):
        CreateSaveSummary([], os.path.join(tmpdir, "runs.csv"), fmt="parquet")
