import csv
import json
import os

import numpy as np
import pandas as pd

from graphdistill.constants_harness import (
    REPORT_COLUMNS,
    REPORT_FORMATS,
    SUMMARY_DDOF,
    SUMMARY_GROUP_COLUMNS,
    SUMMARY_METRICS,
    MetricRow,
)
from graphdistill.errors import ConfigError
from graphdistill.log_utils import get_logger
from graphdistill.os_utils import maybe_make_parent_dir

logger = get_logger(__file__)

SUMMARY_SUFFIX = ".summary.csv"
# Spelled out in the summary header so readers know which std it is
STD_LABEL = "std_population" if SUMMARY_DDOF == 0 else f"std_ddof{SUMMARY_DDOF}"


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def write_json(data, path, description="results"):
    maybe_make_parent_dir(path)
    logger.info("Writing {} to {}".format(description, path))
    with open(path, "w") as f:
        json.dump(data, f, indent=2, default=_jsonable)


def summary_path_for(path):
    """``runs.csv`` -> ``runs.summary.csv``"""
    root, _ = os.path.splitext(path)
    return root + SUMMARY_SUFFIX


def rows_to_dataframe(rows):
    records = [[getattr(row, column) for column in REPORT_COLUMNS] for row in rows]
    return pd.DataFrame(records, columns=REPORT_COLUMNS)


def summarize_rows(rows):
    """Mean and population std of every metric per (experiment, method, grid point)

    Returns
    -------
    summary : pandas.DataFrame
        One row per group with ``n`` plus ``<metric>_mean`` and
        ``<metric>_std_population`` columns
    """
    columns = (
        SUMMARY_GROUP_COLUMNS
        + ["n"]
        + [f"{m}_{stat}" for m in SUMMARY_METRICS for stat in ("mean", STD_LABEL)]
    )
    df = rows_to_dataframe(rows)
    if df.empty:
        return pd.DataFrame(columns=columns)
    df["grid_value"] = df["grid_value"].astype(str)
    grouped = df.groupby(SUMMARY_GROUP_COLUMNS, sort=False, dropna=False)
    summary = grouped[SUMMARY_METRICS].agg(["mean", lambda x: np.std(x, ddof=SUMMARY_DDOF)])
    summary.columns = [f"{m}_{stat}" for m in SUMMARY_METRICS for stat in ("mean", STD_LABEL)]
    summary.insert(0, "n", grouped.size())
    return summary.reset_index()[columns]


def read_rows(path):
    """MetricRows back from a CSV or JSON-lines report"""
    if path.endswith(".jsonl"):
        rows = []
        with open(path) as f:
            for line in f:
                if line.strip():
                    rows.append(MetricRow(**json.loads(line)))
        return rows
    df = pd.read_csv(path, keep_default_na=False, dtype={"grid_value": str})
    return [MetricRow(**record) for record in df.to_dict(orient="records")]


class CreateSaveSummary:
    """Writes experiment rows and their per-group summary

    Parameters
    ----------
    rows : list of MetricRow
    path : str
        Row file; ``.jsonl`` paths get JSON lines unless ``fmt`` says otherwise
    fmt : str or None
        "csv" or "jsonl"
    summary : str, bool or None
        Summary CSV path. None derives it from ``path``, False skips it
    """

    def __init__(self, rows, path, fmt=None, summary=None):
        self.rows = list(rows)
        self.path = path
        if fmt is None:
            fmt = "jsonl" if path.endswith(".jsonl") else "csv"
        if fmt not in REPORT_FORMATS:
            raise ConfigError(f"Unknown report format {fmt!r}, choose from {REPORT_FORMATS}")
        self.fmt = fmt
        self.summary = summary_path_for(path) if summary is None else summary

    def write_csv(self):
        logger.info("Writing {} metric rows to {}".format(len(self.rows), self.path))
        with open(self.path, "w") as csvfile:
            csvwriter = csv.writer(csvfile, lineterminator="\n")
            csvwriter.writerow(REPORT_COLUMNS)
            csvwriter.writerows(
                [getattr(row, column) for column in REPORT_COLUMNS] for row in self.rows
            )

    def write_jsonl(self):
        logger.info("Writing {} metric rows to {}".format(len(self.rows), self.path))
        with open(self.path, "w") as f:
            for row in self.rows:
                f.write(json.dumps(row._asdict(), default=_jsonable) + "\n")

    def write_rows(self):
        maybe_make_parent_dir(self.path)
        if self.fmt == "csv":
            self.write_csv()
        else:
            self.write_jsonl()

    def maybe_write_summary(self):
        if not self.summary:
            return None
        summary = summarize_rows(self.rows)
        maybe_make_parent_dir(self.summary)
        logger.info("Writing summary of {} groups to {}".format(len(summary), self.summary))
        summary.to_csv(self.summary, index=False)
        return summary


def emit_report(rows, path, fmt=None, summary=None):
    """Write ``rows`` to ``path`` and the mean/std summary next to it

    Returns
    -------
    summary_path : str or None
    """
    saver = CreateSaveSummary(rows, path, fmt, summary)
    saver.write_rows()
    saver.maybe_write_summary()
    return saver.summary or None
