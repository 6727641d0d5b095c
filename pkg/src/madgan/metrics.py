"""Point-wise detection metrics and threshold sweeps.

Evaluation is per timestep. Timesteps not covered by any window are excluded
from counting and reported separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(predicted, truth, mask=None) -> ConfusionCounts:
    """Count TP/FP/TN/FN per timestep; mask selects which timesteps count."""
    pred = np.asarray(getattr(predicted, "labels", predicted), dtype=np.int64)
    true = np.asarray(truth, dtype=np.int64)
    if pred.shape != true.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {true.shape}")
    if mask is not None:
        pred = pred[mask]
        true = true[mask]
    tp = int(np.sum((pred == 1) & (true == 1)))
    fp = int(np.sum((pred == 1) & (true == 0)))
    tn = int(np.sum((pred == 0) & (true == 0)))
    fn = int(np.sum((pred == 0) & (true == 1)))
    return ConfusionCounts(tp, fp, tn, fn)


def precision(counts: ConfusionCounts) -> float:
    denom = counts.tp + counts.fp
    return counts.tp / denom if denom else 0.0


def recall(counts: ConfusionCounts) -> float:
    denom = counts.tp + counts.fn
    return counts.tp / denom if denom else 0.0


def f1(counts: ConfusionCounts) -> float:
    pre = precision(counts)
    rec = recall(counts)
    return 2.0 * pre * rec / (pre + rec) if (pre + rec) else 0.0


def is_degenerate(counts: ConfusionCounts) -> bool:
    """True when any metric hit a zero denominator and was defined as 0."""
    return counts.tp + counts.fp == 0 or counts.tp + counts.fn == 0


@dataclass(frozen=True)
class SweepRow:
    tau: float
    quantile: float
    precision: float
    recall: float
    f1: float


@dataclass
class SweepTable:
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def best_precision(self) -> SweepRow:
        return max(self.rows, key=lambda r: r.precision)

    @property
    def best_recall(self) -> SweepRow:
        return max(self.rows, key=lambda r: r.recall)

    @property
    def best_f1(self) -> SweepRow:
        return max(self.rows, key=lambda r: r.f1)


def sweep_tau(scores, truth, grid: np.ndarray | None = None) -> SweepTable:
    """Evaluate thresholds at every score quantile in the grid.

    `scores` is a detector ScoreSeries; uncovered timesteps are excluded.
    """
    from .detector import threshold_labels  # local import to avoid a cycle

    if grid is None:
        grid = np.linspace(0.0, 1.0, 201)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("empty threshold grid")
    truth = np.asarray(truth, dtype=np.int64)
    covered = scores.covered
    covered_scores = scores.drs[covered]
    table = SweepTable()
    for q in grid:
        tau = float(np.quantile(covered_scores, q))
        labels = threshold_labels(scores, tau)
        counts = confusion(labels.labels, truth, mask=covered)
        table.rows.append(SweepRow(tau=tau, quantile=float(q),
                                   precision=precision(counts),
                                   recall=recall(counts), f1=f1(counts)))
    return table
