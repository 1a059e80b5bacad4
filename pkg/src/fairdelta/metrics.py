"""Accuracy and fairness metrics for real-valued predictions.

Fairness is demographic parity measured as the largest gap between a group's
prediction CDF and the pooled prediction CDF (a Kolmogorov-Smirnov style
statistic). Accuracy is the mean of the task's native loss.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

SQUARE_LOSS = "square_loss"
LOGISTIC_LOSS = "logistic_loss"
TASK_KINDS = (SQUARE_LOSS, LOGISTIC_LOSS)

_LOG_CLIP = 1e-12


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous step CDF of a finite sample, ``P[X <= z]``."""

    sorted_values: np.ndarray
    n: int

    def __call__(self, z):
        counts = np.searchsorted(self.sorted_values, z, side="right")
        return counts / self.n


@dataclass(frozen=True)
class MetricsRow:
    loss_std: float
    dp_disp: float


def empirical_cdf(values) -> EmpiricalCdf:
    arr = np.sort(np.asarray(values, dtype=float).ravel())
    if arr.size == 0:
        raise ValidationError("empirical_cdf needs at least one value")
    return EmpiricalCdf(sorted_values=arr, n=int(arr.size))


def _as_groups(predictions, sensitive):
    pred = np.asarray(predictions, dtype=float).ravel()
    sens = np.asarray(sensitive, dtype=bool).ravel()
    if pred.shape != sens.shape:
        raise ValidationError(
            f"predictions and sensitive differ in length: {pred.size} != {sens.size}")
    if sens.all() or not sens.any():
        raise ValidationError("dp_disparity needs both sensitive groups to be non-empty")
    return pred, sens


def dp_disparity(predictions, sensitive) -> float:
    """Demographic-parity disparity of ``predictions`` w.r.t. a boolean attribute.

    Returns ``max_a sup_z |CDF_a(z) - CDF_all(z)|`` over the two groups. Both
    CDFs are step functions that only jump at sample points, so the supremum
    is attained at one of the distinct prediction values (the left limit at a
    jump equals the value at the previous jump, or 0 before the first one).
    """
    pred, sens = _as_groups(predictions, sensitive)
    grid = np.unique(pred)
    pooled = np.sort(pred)
    cdf_all = np.searchsorted(pooled, grid, side="right") / pooled.size
    worst = 0.0
    for mask in (sens, ~sens):
        group = np.sort(pred[mask])
        cdf_group = np.searchsorted(group, grid, side="right") / group.size
        worst = max(worst, float(np.max(np.abs(cdf_group - cdf_all))))
    return worst


def standard_loss(predictions, targets, kind: str) -> float:
    """Mean squared error or mean log-loss, depending on ``kind``."""
    p = np.asarray(predictions, dtype=float).ravel()
    y = np.asarray(targets, dtype=float).ravel()
    if p.shape != y.shape:
        raise ValidationError(f"length mismatch: {p.size} predictions, {y.size} targets")
    if kind == SQUARE_LOSS:
        return float(np.mean((p - y) ** 2))
    if kind == LOGISTIC_LOSS:
        p = np.clip(p, _LOG_CLIP, 1.0 - _LOG_CLIP)
        return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log1p(-p))))
    raise ValidationError(f"unknown task kind {kind!r}; expected one of {TASK_KINDS}")


def metrics_row(predictions, targets, sensitive, kind: str) -> MetricsRow:
    return MetricsRow(loss_std=standard_loss(predictions, targets, kind),
                      dp_disp=dp_disparity(predictions, sensitive))
