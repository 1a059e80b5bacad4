"""Fair predictions by group-conditional quantile matching.

Each group's predictions are mapped through that group's empirical CDF onto
the pooled quantile function, which makes the group distributions (nearly)
identical on the training sample. A weight ``lam`` interpolates between the
original prediction (0) and the fully repaired one (1); ``fit_repair`` picks
the smallest weight on a 1/64 grid that brings the training disparity under
``epsilon_target``.
"""
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, ValidationError
from .metrics import dp_disparity

LAMBDA_STEPS = 64


@dataclass(frozen=True)
class QuantileMap:
    """Monotone piecewise-linear map between values and quantile levels."""

    values: np.ndarray
    levels: np.ndarray

    def to_level(self, x):
        return np.interp(x, self.values, self.levels)

    def to_value(self, q):
        return np.interp(q, self.levels, self.values)


@dataclass(frozen=True)
class RepairModel:
    group_quantile_maps: dict
    pooled: QuantileMap
    lam: float
    epsilon_target: float

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValidationError(f"lambda must be in [0, 1], got {self.lam}")


def _quantile_map(values) -> QuantileMap:
    # ties collapse to one knot at their mid-rank so knots stay strictly increasing
    v = np.sort(np.asarray(values, dtype=float))
    u, counts = np.unique(v, return_counts=True)
    before = np.cumsum(counts) - counts
    return QuantileMap(values=u, levels=(before + counts / 2.0) / v.size)


def _pooled_map(values) -> QuantileMap:
    v = np.sort(np.asarray(values, dtype=float))
    return QuantileMap(values=v, levels=(np.arange(v.size) + 0.5) / v.size)


def _check_inputs(predictions, sensitive):
    p = np.asarray(predictions, dtype=float).ravel()
    s = np.asarray(sensitive, dtype=bool).ravel()
    if p.shape != s.shape:
        raise ValidationError(f"{p.size} predictions but {s.size} sensitive values")
    if p.size and (np.nanmin(p) < 0.0 or np.nanmax(p) > 1.0 or np.isnan(p).any()):
        raise ValidationError("predictions must lie in [0, 1]")
    return p, s


def _full_repair(maps, pooled, p, s):
    out = np.empty_like(p)
    for key, mask in ((True, s), (False, ~s)):
        if mask.any():
            out[mask] = pooled.to_value(maps[key].to_level(p[mask]))
    return out


def _blend(p, repaired, lam):
    return np.clip((1.0 - lam) * p + lam * repaired, 0.0, 1.0)


def fit_repair(base_predictions_train, sensitive_train, epsilon_target: float) -> RepairModel:
    p, s = _check_inputs(base_predictions_train, sensitive_train)
    if s.all() or not s.any():
        raise DataError("repair needs training predictions from both sensitive groups")
    if not 0.0 <= epsilon_target <= 1.0:
        raise ValidationError(f"epsilon_target must be in [0, 1], got {epsilon_target}")
    maps = {True: _quantile_map(p[s]), False: _quantile_map(p[~s])}
    pooled = _pooled_map(p)
    repaired = _full_repair(maps, pooled, p, s)
    lam = 1.0
    for k in range(LAMBDA_STEPS + 1):
        cand = k / LAMBDA_STEPS
        if dp_disparity(_blend(p, repaired, cand), s) <= epsilon_target:
            lam = cand
            break
    return RepairModel(group_quantile_maps=maps, pooled=pooled, lam=lam,
                       epsilon_target=float(epsilon_target))


def apply_repair(m: RepairModel, base_predictions, sensitive) -> np.ndarray:
    p, s = _check_inputs(base_predictions, sensitive)
    if m.lam == 0.0:
        return p.copy()
    return _blend(p, _full_repair(m.group_quantile_maps, m.pooled, p, s), m.lam)


def with_lambda(m: RepairModel, lam: float) -> RepairModel:
    """Same maps, different interpolation weight."""
    return RepairModel(group_quantile_maps=m.group_quantile_maps, pooled=m.pooled,
                       lam=float(lam), epsilon_target=m.epsilon_target)


def save_repair(m: RepairModel, path):
    def dump(qm):
        return {"values": qm.values.tolist(), "levels": qm.levels.tolist()}
    doc = {"lambda": m.lam, "epsilon_target": m.epsilon_target,
           "groups": {"true": dump(m.group_quantile_maps[True]),
                      "false": dump(m.group_quantile_maps[False])},
           "pooled": dump(m.pooled)}
    Path(path).write_text(json.dumps(doc) + "\n")


def load_repair(path) -> RepairModel:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"repair model not found: {path}")
    try:
        doc = json.loads(path.read_text())

        def load(d):
            return QuantileMap(values=np.array(d["values"], dtype=float),
                               levels=np.array(d["levels"], dtype=float))
        return RepairModel(
            group_quantile_maps={True: load(doc["groups"]["true"]),
                                 False: load(doc["groups"]["false"])},
            pooled=load(doc["pooled"]), lam=float(doc["lambda"]),
            epsilon_target=float(doc["epsilon_target"]))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: not a repair model file ({exc})") from exc
