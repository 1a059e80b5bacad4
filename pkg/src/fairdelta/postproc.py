"""Individual-level comparison of baseline and fair outputs, and the
post-processing steps that bound how far fair outputs may move.

Every operation works on the per-point differences ``delta_i = f_i - b_i``.
Two targets are supported: non-positive evolution (no output increases
relative to its baseline) and budget neutrality (the mean difference is zero).

Outputs are not clamped to [0, 1] unless ``clamp=True`` is passed; clamping
breaks the exact mean and translation guarantees.
"""
import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, ValidationError

PAIR_COLUMNS = ("row_id", "baseline", "fair", "postprocessed", "sensitive", "target")


@dataclass(frozen=True)
class PredictionPair:
    """Baseline and fair outputs for the same points, with attribute and truth."""

    baseline: np.ndarray
    fair: np.ndarray
    sensitive: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.baseline, dtype=float).ravel()
        f = np.asarray(self.fair, dtype=float).ravel()
        s = np.asarray(self.sensitive, dtype=bool).ravel()
        y = np.asarray(self.targets, dtype=float).ravel()
        if b.size == 0:
            raise ValidationError("a prediction pair needs at least one point")
        if not (b.size == f.size == s.size == y.size):
            raise ValidationError(
                f"sequence lengths differ: baseline={b.size}, fair={f.size}, "
                f"sensitive={s.size}, targets={y.size}")
        object.__setattr__(self, "baseline", b)
        object.__setattr__(self, "fair", f)
        object.__setattr__(self, "sensitive", s)
        object.__setattr__(self, "targets", y)

    def __len__(self):
        return self.baseline.size

    @property
    def diffs(self) -> np.ndarray:
        return self.fair - self.baseline


@dataclass(frozen=True)
class DiffDistribution:
    diffs: np.ndarray
    max_increase: float
    max_decrease: float
    mean_diff: float


@dataclass(frozen=True)
class RangeParams:
    """Target range ``[a, b]`` for normalised differences and cap threshold."""

    a: float = 0.0
    b: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        _check_range(self.a, self.b)


def _check_range(a, b):
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValidationError(f"range bounds must be finite, got a={a}, b={b}")
    if a > b:
        raise ValidationError(f"range minimum a={a} exceeds maximum b={b}")


def _finish(y, clamp):
    return np.clip(y, 0.0, 1.0) if clamp else y


def summarize_diffs(diffs) -> DiffDistribution:
    d = np.asarray(diffs, dtype=float).ravel()
    if d.size == 0:
        raise ValidationError("cannot summarise an empty set of differences")
    return DiffDistribution(diffs=d, max_increase=float(d.max()),
                            max_decrease=float(d.min()), mean_diff=float(d.mean()))


def diff_distribution(pair: PredictionPair) -> DiffDistribution:
    """Differences ``F - B`` and their extremes and mean."""
    return summarize_diffs(pair.diffs)


def cap(pair: PredictionPair, theta: float, clamp: bool = False) -> np.ndarray:
    """Limit every increase to at most ``theta`` above the baseline.

    ``theta`` may be negative, which forces every output below its baseline.
    """
    y = np.minimum(pair.fair, pair.baseline + theta)
    return _finish(y, clamp)


def translate_nonpositive(pair: PredictionPair, clamp: bool = False) -> np.ndarray:
    """Shift all fair outputs down by the largest difference.

    The point with the largest increase lands on its baseline, so
    ``max(Y - B)`` is 0 up to rounding and never positive; if every
    difference was negative the shift is upward.
    """
    shift = np.max(pair.diffs)
    y = pair.fair - shift
    # f - (f - b) can round an ulp above b; nudge the common shift rather than
    # patching single points, so ties in F (and hence DP disparity) survive
    while np.any(y > pair.baseline):
        shift = np.nextafter(shift, np.inf)
        y = pair.fair - shift
    return _finish(y, clamp)


def normalize_diffs(d, a: float, b: float) -> np.ndarray:
    """Min-max rescale differences onto ``[a, b]``.

    ``d`` is a :class:`DiffDistribution` or a plain sequence. When all
    differences are equal the rescaling is undefined and every value maps to
    ``b``.
    """
    _check_range(a, b)
    diffs = d.diffs if isinstance(d, DiffDistribution) else np.asarray(d, dtype=float).ravel()
    lo, hi = diffs.min(), diffs.max()
    if hi == lo:
        return np.full(diffs.shape, float(b))
    out = a + (diffs - lo) * (b - a) / (hi - lo)
    # pin the endpoints; rounding can leave them one ulp off
    out[diffs == lo] = a
    out[diffs == hi] = b
    return out


def normalize_translate_nonpositive(pair: PredictionPair, a: float, b: float,
                                    clamp: bool = False) -> np.ndarray:
    """Rescale differences onto ``[a, b]`` and shift so the largest is zero.

    The final differences span ``[a - b, 0]``.
    """
    d = normalize_diffs(pair.diffs, a, b)
    d = d - d.max()
    return _finish(pair.baseline + d, clamp)


def translate_budget_neutral(pair: PredictionPair, clamp: bool = False) -> np.ndarray:
    """Shift all fair outputs by the mean difference so it becomes zero."""
    return _finish(pair.fair - pair.diffs.mean(), clamp)


def normalize_translate_budget_neutral(pair: PredictionPair, a: float, b: float,
                                       clamp: bool = False) -> np.ndarray:
    """Rescale differences onto ``[a, b]``, then remove their mean."""
    d = normalize_diffs(pair.diffs, a, b)
    return _finish(pair.baseline + (d - d.mean()), clamp)


ALGORITHMS = {
    "cap": cap,
    "translate-nonpos": translate_nonpositive,
    "norm-nonpos": normalize_translate_nonpositive,
    "translate-budget": translate_budget_neutral,
    "norm-budget": normalize_translate_budget_neutral,
}


def apply_postprocess(name: str, pair: PredictionPair, theta: float = 0.0,
                      a: float = None, b: float = None, clamp: bool = False) -> np.ndarray:
    """Dispatch to one of the five algorithms by its CLI name."""
    if name not in ALGORITHMS:
        raise ValidationError(f"unknown post-processing {name!r}; choose from {sorted(ALGORITHMS)}")
    if name == "cap":
        return cap(pair, theta, clamp=clamp)
    if name in ("norm-nonpos", "norm-budget"):
        if a is None or b is None:
            raise ValidationError(f"{name} needs both range bounds a and b")
        return ALGORITHMS[name](pair, a, b, clamp=clamp)
    return ALGORITHMS[name](pair, clamp=clamp)


def write_pairs(path, pair: PredictionPair, row_ids=None, postprocessed=None):
    """Write ``row_id,baseline,fair,postprocessed,sensitive,target`` rows."""
    n = len(pair)
    ids = np.arange(n) if row_ids is None else np.asarray(row_ids)
    if ids.size != n or (postprocessed is not None and len(postprocessed) != n):
        raise ValidationError("row ids and post-processed outputs must align with the pair")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PAIR_COLUMNS)
        for i in range(n):
            post = "" if postprocessed is None else repr(float(postprocessed[i]))
            w.writerow([int(ids[i]), repr(float(pair.baseline[i])), repr(float(pair.fair[i])),
                        post, int(pair.sensitive[i]), repr(float(pair.targets[i]))])


def read_pairs(path):
    """Read a pairs file; returns ``(pair, row_ids, postprocessed or None)``."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"prediction pairs file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(PAIR_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing columns {sorted(missing)}")
        rows = list(reader)
    if not rows:
        raise DataError(f"{path}: no data rows")
    try:
        ids = np.array([int(r["row_id"]) for r in rows])
        pair = PredictionPair(
            baseline=[float(r["baseline"]) for r in rows],
            fair=[float(r["fair"]) for r in rows],
            sensitive=[_parse_bool(r["sensitive"]) for r in rows],
            targets=[float(r["target"]) for r in rows])
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
    post_cells = [r["postprocessed"] for r in rows]
    post = None
    if all(c.strip() for c in post_cells):
        post = np.array([float(c) for c in post_cells])
    return pair, ids, post


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "t", "yes"):
        return True
    if t in ("0", "false", "f", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")
