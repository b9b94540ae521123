"""Scoring verdict streams against ground truth: confusion, F-scores, sweeps, ROC."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .detector import DetectorConfig, Label, Verdict, run_stream
from .metrics import SnapshotMetrics


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    skipped: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class Scores:
    """Accuracy, precision, recall and F_b; None where a ratio is 0/0."""

    accuracy: float | None
    precision: float | None
    recall: float | None
    f_score: float | None


@dataclass(frozen=True)
class EvaluationReport:
    counts: ConfusionCounts
    scores: Scores
    config: DetectorConfig
    b: float = 1.0

    def as_dict(self) -> dict:
        c = self.counts
        return {
            "counts": {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn},
            "skipped": c.skipped,
            "scores": {
                "accuracy": self.scores.accuracy,
                "precision": self.scores.precision,
                "recall": self.scores.recall,
                "f_score": self.scores.f_score,
                "b": self.b,
            },
            "config": self.config.as_dict(),
        }


def _as_flag(label) -> bool:
    if isinstance(label, bool):
        return label
    return Label(label) is Label.ABNORMAL


def confusion(verdicts: Sequence[Verdict], labels: Sequence[bool],
              label_ticks: Sequence[int] | None = None) -> ConfusionCounts:
    """Four-way counts of ABNORMAL verdicts against anomalous ground truth.

    SKIPPED verdicts are left out of every cell and counted in ``skipped``.
    If ``label_ticks`` is given it must match the verdict ticks one for one.
    """
    if len(verdicts) != len(labels):
        raise ValueError(f"{len(verdicts)} verdicts but {len(labels)} labels")
    if label_ticks is not None and [v.tick for v in verdicts] != list(label_ticks):
        raise ValueError("verdict and label ticks are misaligned")
    tp = fp = tn = fn = skipped = 0
    for v, truth in zip(verdicts, labels):
        if v.label is Label.SKIPPED:
            skipped += 1
            continue
        flagged = v.label is Label.ABNORMAL
        truth = _as_flag(truth)
        if flagged and truth:
            tp += 1
        elif flagged:
            fp += 1
        elif truth:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, tn, fn, skipped)


def _ratio(num: float, den: float) -> float | None:
    return None if den == 0 else num / den


def scores(c: ConfusionCounts, b: float = 1.0) -> Scores:
    p = _ratio(c.tp, c.tp + c.fp)
    r = _ratio(c.tp, c.tp + c.fn)
    return Scores(_ratio(c.tp + c.tn, c.total), p, r, f_beta(p, r, b))


def f_beta(p: float | None, r: float | None, b: float = 1.0) -> float | None:
    if p is None or r is None:
        return None
    return _ratio((1 + b * b) * p * r, b * b * p + r)


def evaluate(stream: Sequence[SnapshotMetrics], labels: Sequence[bool],
             cfg: DetectorConfig, b: float = 1.0) -> EvaluationReport:
    counts = confusion(run_stream(stream, cfg), labels)
    return EvaluationReport(counts, scores(counts, b), cfg, b)


@dataclass(frozen=True)
class SweepRow:
    k: int
    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None


def k_sweep(stream: Sequence[SnapshotMetrics], labels: Sequence[bool],
            cfg_base: DetectorConfig, k_grid: Sequence[int]) -> list[SweepRow]:
    if not k_grid:
        raise ValueError("k grid is empty")
    rows = []
    for k in k_grid:
        s = evaluate(stream, labels, replace(cfg_base, k=k)).scores
        rows.append(SweepRow(k, s.accuracy, s.precision, s.recall, s.f_score))
    return rows


@dataclass(frozen=True)
class RocPoint:
    fpr: float | None
    tpr: float | None
    lam: float


def roc_points_from_counts(counts: Sequence[ConfusionCounts],
                           lambdas: Sequence[float]) -> list[RocPoint]:
    return [RocPoint(_ratio(c.fp, c.fp + c.tn), _ratio(c.tp, c.tp + c.fn), lam)
            for c, lam in zip(counts, lambdas)]


def auc(points: Sequence[RocPoint]) -> float | None:
    """Trapezoidal area under the ROC points, anchored at (0, 0) and (1, 1).

    Returns None when no point has both rates defined.
    """
    xy = sorted((p.fpr, p.tpr) for p in points if p.fpr is not None and p.tpr is not None)
    if not xy:
        return None
    xy = [(0.0, 0.0)] + xy + [(1.0, 1.0)]
    area = 0.0
    for (x0, y0), (x1, y1) in zip(xy, xy[1:]):
        area += (x1 - x0) * (y0 + y1) / 2
    return area


def roc_curve(stream: Sequence[SnapshotMetrics], labels: Sequence[bool],
              cfg_base: DetectorConfig,
              lambda_grid: Sequence[float]) -> tuple[list[RocPoint], float | None]:
    """One (FPR, TPR) point per lambda plus the curve's AUC."""
    if not lambda_grid:
        raise ValueError("lambda grid is empty")
    if any(b <= a for a, b in zip(lambda_grid, lambda_grid[1:])):
        raise ValueError("lambda grid must be ascending")
    counts = [confusion(run_stream(stream, replace(cfg_base, lam=lam)), labels)
              for lam in lambda_grid]
    points = roc_points_from_counts(counts, lambda_grid)
    return points, auc(points)
