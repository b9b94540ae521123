"""CSV and JSON exchange formats between pipeline stages.

Every CSV starts with ``# key=value`` comment lines that echo the effective
configuration, followed by a header row. Readers skip comment lines.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .detector import Label, Verdict
from .evaluate import EvaluationReport, RocPoint, SweepRow
from .metrics import SnapshotMetrics
from .simulate import TrajectoryPoint

METRICS_COLUMNS = ["bin_id", "node_count", "edge_count", "giant_fraction", "d_max",
                   "d_effective", "sp", "r", "degenerate", "mode", "sample_size", "seed"]
VERDICT_COLUMNS = ["tick", "r", "label", "domain"]
LABEL_COLUMNS = ["tick", "label"]
TRAJECTORY_COLUMNS = ["removed_fraction", "d_max", "d_effective", "sp", "r", "giant_fraction"]
SWEEP_COLUMNS = ["k", "accuracy", "precision", "recall", "f1"]
ROC_COLUMNS = ["lambda", "fpr", "tpr"]


class SchemaError(ValueError):
    """Input file does not have the expected columns or values."""


def header_lines(config: Mapping) -> list[str]:
    return [f"{k}={_fmt_header(v)}" for k, v in config.items()]


def _fmt_header(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def _write(path: str | Path | None, columns: Sequence[str], rows: Iterable[Sequence],
           header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _read(path: str | Path, columns: Sequence[str]) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    reader = csv.DictReader(lines)
    missing = [c for c in columns if c not in (reader.fieldnames or [])]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    return list(reader)


def _opt_int(s: str) -> int | None:
    return None if s == "" else int(s)


def write_metrics_csv(path, metrics: Sequence[SnapshotMetrics], header=()) -> str:
    rows = ([m.bin_id, m.node_count, m.edge_count, m.giant_fraction, m.d_max,
             m.d_effective, m.sp, m.r if m.r is not None else float("nan"),
             int(m.degenerate), m.mode, m.sample_size, m.seed] for m in metrics)
    return _write(path, METRICS_COLUMNS, rows, header)


def read_metrics_csv(path) -> list[SnapshotMetrics]:
    out = []
    for i, row in enumerate(_read(path, METRICS_COLUMNS)):
        try:
            degenerate = row["degenerate"] == "1"
            out.append(SnapshotMetrics(
                int(row["bin_id"]), int(row["node_count"]), int(row["edge_count"]),
                float(row["giant_fraction"]), float(row["d_max"]),
                float(row["d_effective"]), float(row["sp"]),
                None if degenerate else float(row["r"]), row["mode"],
                _opt_int(row["sample_size"]), _opt_int(row["seed"]),
            ))
        except ValueError as exc:
            raise SchemaError(f"{path}: bad metrics row {i + 1}: {exc}") from exc
    return out


def _fmt_domain(domain) -> str:
    return ";".join(f"{lo!r}..{hi!r}" for lo, hi in domain)


def parse_domain(text: str) -> tuple:
    if not text:
        return ()
    out = []
    for part in text.split(";"):
        lo, hi = part.split("..")
        out.append((float(lo), float(hi)))
    return tuple(out)


def write_verdicts_csv(path, verdicts: Sequence[Verdict], header=()) -> str:
    rows = ([v.tick, v.r, v.label.value, _fmt_domain(v.domain)] for v in verdicts)
    return _write(path, VERDICT_COLUMNS, rows, header)


def read_verdicts_csv(path) -> list[Verdict]:
    out = []
    for row in _read(path, VERDICT_COLUMNS):
        try:
            out.append(Verdict(int(row["tick"]), float(row["r"]) if row["r"] else None,
                               Label(row["label"]), parse_domain(row["domain"])))
        except ValueError as exc:
            raise SchemaError(f"{path}: bad verdict row: {exc}") from exc
    return out


def write_labels_csv(path, ticks: Sequence[int], labels: Sequence[bool], header=()) -> str:
    rows = ([t, Label.ABNORMAL.value if a else Label.NORMAL.value] for t, a in zip(ticks, labels))
    return _write(path, LABEL_COLUMNS, rows, header)


def read_labels_csv(path) -> tuple[list[int], list[bool]]:
    ticks, labels = [], []
    for row in _read(path, LABEL_COLUMNS):
        try:
            lab = Label(row["label"])
        except ValueError as exc:
            raise SchemaError(f"{path}: bad label {row['label']!r}") from exc
        if lab is Label.SKIPPED:
            raise SchemaError(f"{path}: ground-truth labels must be NORMAL or ABNORMAL")
        ticks.append(int(row["tick"]))
        labels.append(lab is Label.ABNORMAL)
    return ticks, labels


def write_trajectory_csv(path, points: Sequence[TrajectoryPoint], header=()) -> str:
    def r(m):
        return m.r if m.r is not None else float("nan")
    rows = ([p.removed_fraction, p.metrics.d_max, p.metrics.d_effective, p.metrics.sp,
             r(p.metrics), p.metrics.giant_fraction] for p in points)
    return _write(path, TRAJECTORY_COLUMNS, rows, header)


def read_trajectory_csv(path) -> list[dict]:
    return [{k: float(v) for k, v in row.items()} for row in _read(path, TRAJECTORY_COLUMNS)]


def write_sweep_csv(path, rows: Sequence[SweepRow], header=()) -> str:
    return _write(path, SWEEP_COLUMNS,
                  ([s.k, s.accuracy, s.precision, s.recall, s.f1] for s in rows), header)


def write_roc_csv(path, points: Sequence[RocPoint], header=()) -> str:
    return _write(path, ROC_COLUMNS, ([p.lam, p.fpr, p.tpr] for p in points), header)


def write_report_json(path, report: EvaluationReport, extra: Mapping | None = None) -> str:
    doc = report.as_dict()
    if extra:
        doc.update(extra)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
