"""Loading, encoding and splitting of tabular benchmark data.

A dataset is described by a schema file (INI syntax) that names the target
and sensitive columns and gives every other column a kind: ``numeric``,
``categorical`` or ``drop``. Example::

    [dataset]
    files = adult.data, adult.test
    header = none
    names = age, workclass, ..., income
    missing = ?
    strip = .
    task = logistic_loss
    target = income
    target_rule = == >50K
    sensitive = sex
    sensitive_rule = == Male
    default_kind = numeric

    [columns]
    workclass = categorical
    fnlwgt = drop

Numeric columns and the target are min-max scaled on the whole file,
categoricals are one-hot encoded with levels in sorted order, and rows with a
missing value in any retained column are dropped.
"""
import configparser
import operator
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DataError, ValidationError
from .metrics import TASK_KINDS

KINDS = ("numeric", "categorical", "drop")

_OPS = {"==": operator.eq, "!=": operator.ne, ">=": operator.ge,
        "<=": operator.le, ">": operator.gt, "<": operator.lt}


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    sensitive: np.ndarray
    target: np.ndarray
    feature_names: tuple
    task_kind: str
    row_ids: np.ndarray = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        s = np.asarray(self.sensitive, dtype=bool).ravel()
        y = np.asarray(self.target, dtype=float).ravel()
        if x.ndim != 2:
            raise ValidationError(f"features must be 2-D, got shape {x.shape}")
        if not (x.shape[0] == s.size == y.size):
            raise ValidationError(
                f"row counts differ: features={x.shape[0]}, sensitive={s.size}, target={y.size}")
        if x.shape[1] != len(self.feature_names):
            raise ValidationError("feature_names does not match the feature column count")
        if y.size and (y.min() < 0.0 or y.max() > 1.0):
            raise ValidationError("target values must lie in [0, 1]")
        if self.task_kind not in TASK_KINDS:
            raise ValidationError(f"unknown task kind {self.task_kind!r}")
        ids = np.arange(y.size) if self.row_ids is None else np.asarray(self.row_ids, dtype=int)
        if ids.size != y.size:
            raise ValidationError("row_ids does not match the row count")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "sensitive", s)
        object.__setattr__(self, "target", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "row_ids", ids)

    def __len__(self):
        return self.target.size

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(features=self.features[idx], sensitive=self.sensitive[idx],
                       target=self.target[idx], feature_names=self.feature_names,
                       task_kind=self.task_kind, row_ids=self.row_ids[idx])

    def check_groups(self):
        if self.sensitive.all() or not self.sensitive.any():
            raise DataError("dataset needs at least one row in each sensitive group")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.5
    comparison_sample_size: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if int(self.comparison_sample_size) < 1:
            raise ValidationError("comparison_sample_size must be positive")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


@dataclass
class Schema:
    target: str
    sensitive: str
    task: str
    files: list = field(default_factory=list)
    header: bool = True
    names: list = None
    missing: list = field(default_factory=lambda: ["", "?"])
    strip: str = ""
    target_rule: str = None
    sensitive_rule: str = None
    default_kind: str = "drop"
    columns: dict = field(default_factory=dict)
    max_missing_fraction: float = 1.0
    comment: str = None
    name: str = ""
    base_dir: Path = None

    def kind_of(self, column):
        return self.columns.get(column, self.default_kind)


def _split_list(text):
    return [t.strip() for t in text.replace("\n", ",").split(",") if t.strip()]


def load_schema(source) -> Schema:
    """Read a schema file; ``source`` is a path or the name of a bundled schema."""
    path = Path(source)
    if not path.is_file():
        bundled = resources.files("fairdelta") / "schemas" / f"{source}.ini"
        if not bundled.is_file():
            raise FileNotFoundError(f"schema not found: {source}")
        path = Path(str(bundled))
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read(path)
    if "dataset" not in cp:
        raise ValidationError(f"{path}: missing [dataset] section")
    sec = cp["dataset"]
    for key in ("target", "sensitive", "task"):
        if key not in sec:
            raise ValidationError(f"{path}: [dataset] needs '{key}'")
    header = sec.get("header", "first").strip().lower()
    if header not in ("first", "none"):
        raise ValidationError(f"{path}: header must be 'first' or 'none'")
    schema = Schema(
        target=sec["target"].strip(), sensitive=sec["sensitive"].strip(),
        task=sec["task"].strip(), files=_split_list(sec.get("files", "")),
        header=header == "first",
        names=_split_list(sec["names"]) if "names" in sec else None,
        missing=_split_list(sec["missing"]) + [""] if "missing" in sec else ["", "?"],
        strip=sec.get("strip", ""),
        target_rule=sec.get("target_rule"), sensitive_rule=sec.get("sensitive_rule"),
        default_kind=sec.get("default_kind", "drop").strip(),
        max_missing_fraction=sec.getfloat("max_missing_fraction", 1.0),
        comment=sec.get("comment") or None,
        name=sec.get("name", path.stem), base_dir=path.parent)
    if schema.task not in TASK_KINDS:
        raise ValidationError(f"{path}: task must be one of {TASK_KINDS}")
    if "columns" in cp:
        schema.columns = {k: v.strip() for k, v in cp["columns"].items()}
    bad = {k: v for k, v in schema.columns.items() if v not in KINDS}
    if schema.default_kind not in KINDS or bad:
        raise ValidationError(f"{path}: column kinds must be one of {KINDS}: {bad or schema.default_kind}")
    if not schema.header and not schema.names:
        raise ValidationError(f"{path}: header = none requires a 'names' list")
    return schema


def _parse_rule(rule):
    rule = rule.strip()
    for sym in sorted(_OPS, key=len, reverse=True):
        if rule.startswith(sym):
            return _OPS[sym], rule[len(sym):].strip()
    raise ValidationError(f"cannot parse rule {rule!r}; expected '<op> <value>'")


def _apply_rule(series, rule):
    op, value = _parse_rule(rule)
    numeric = pd.to_numeric(series, errors="coerce")
    try:
        v = float(value)
    except ValueError:
        return op(series.astype(str), value).to_numpy()
    if numeric.isna().any():
        return op(series.astype(str), value).to_numpy()
    return op(numeric, v).to_numpy()


def _read_frame(paths, schema):
    frames = []
    for p in paths:
        p = Path(p)
        if not p.is_file():
            raise FileNotFoundError(f"data file not found: {p}")
        df = pd.read_csv(p, header=0 if schema.header else None,
                         names=None if schema.header else schema.names,
                         dtype=str, keep_default_na=False, skipinitialspace=True,
                         comment=schema.comment, skip_blank_lines=True)
        frames.append(df)
    df = pd.concat(frames, ignore_index=True)
    df = df.apply(lambda c: c.str.strip())
    if schema.strip:
        df = df.apply(lambda c: c.str.rstrip(schema.strip))
    return df.replace({m: np.nan for m in schema.missing})


def load_dataset(path, schema) -> Dataset:
    """Load one CSV (or the list of files a schema names) into a Dataset.

    ``path`` may be a single file, a list of files, or a directory; for a
    directory the schema's ``files`` are resolved inside it.
    """
    if not isinstance(schema, Schema):
        schema = load_schema(schema)
    if isinstance(path, (list, tuple)):
        paths = list(path)
    else:
        path = Path(path)
        paths = [path / f for f in schema.files] if path.is_dir() and schema.files else [path]
    df = _read_frame(paths, schema)
    for col in (schema.target, schema.sensitive):
        if col not in df.columns:
            raise DataError(f"column {col!r} not found in {', '.join(map(str, paths))}")

    kinds = {c: schema.kind_of(c) for c in df.columns if c not in (schema.target, schema.sensitive)}
    if schema.max_missing_fraction < 1.0:
        frac = df.isna().mean()
        for c in list(kinds):
            if frac[c] > schema.max_missing_fraction:
                kinds[c] = "drop"
    kept = [c for c, k in kinds.items() if k != "drop"]
    df = df.dropna(subset=kept + [schema.target, schema.sensitive]).reset_index(drop=True)
    if len(df) < 2:
        raise DataError(f"fewer than 2 rows left after dropping missing values ({len(df)})")

    if schema.target_rule:
        target = _apply_rule(df[schema.target], schema.target_rule).astype(float)
    else:
        target = _numeric(df[schema.target], schema.target)
    lo, hi = target.min(), target.max()
    if hi == lo:
        raise DataError(f"target {schema.target!r} is constant; cannot scale to [0, 1]")
    target = (target - lo) / (hi - lo)

    if schema.sensitive_rule:
        sensitive = _apply_rule(df[schema.sensitive], schema.sensitive_rule).astype(bool)
    else:
        sensitive = _boolean(df[schema.sensitive], schema.sensitive)

    blocks, names = [], []
    for c in kept:
        if kinds[c] == "numeric":
            v = _numeric(df[c], c)
            span = v.max() - v.min()
            blocks.append(((v - v.min()) / span if span > 0 else np.zeros_like(v))[:, None])
            names.append(c)
        else:
            levels = sorted(df[c].unique())
            codes = df[c].to_numpy()
            blocks.append(np.stack([codes == lv for lv in levels], axis=1).astype(float))
            names.extend(f"{c}={lv}" for lv in levels)
    x = np.hstack(blocks) if blocks else np.empty((len(df), 0))
    ds = Dataset(features=x, sensitive=sensitive, target=target, feature_names=names,
                 task_kind=schema.task)
    ds.check_groups()
    return ds


def _numeric(series, name):
    v = pd.to_numeric(series, errors="coerce")
    if v.isna().any():
        bad = series[v.isna()].iloc[0]
        raise DataError(f"column {name!r} has non-numeric value {bad!r}")
    return v.to_numpy(dtype=float)


def _boolean(series, name):
    mapping = {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}
    low = series.str.lower()
    if not low.isin(list(mapping)).all():
        raise DataError(f"sensitive column {name!r} is not boolean; add a sensitive_rule")
    return low.map(mapping).to_numpy(dtype=bool)


def split(ds: Dataset, spec: SplitSpec):
    """Seeded train/test partition plus a comparison sample drawn from test.

    Returns ``(train, test, comparison_indices)``; the indices point into
    ``test`` and are sorted.
    """
    n = len(ds)
    n_train = int(np.floor(spec.train_fraction * n + 0.5))
    n_test = n - n_train
    if spec.comparison_sample_size > n_test:
        raise ValidationError(
            f"comparison sample of {spec.comparison_sample_size} exceeds the {n_test} test rows")
    rng = np.random.default_rng(int(spec.seed))
    perm = rng.permutation(n)
    train_idx, test_idx = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    sample = np.sort(rng.choice(n_test, size=int(spec.comparison_sample_size), replace=False))
    return ds.take(train_idx), ds.take(test_idx), sample


def dump_encoded(ds: Dataset, path):
    """Debug dump: ``row_id,<feature_names...>,sensitive,target``."""
    cols = {"row_id": ds.row_ids}
    for j, name in enumerate(ds.feature_names):
        cols[name] = ds.features[:, j]
    cols["sensitive"] = ds.sensitive.astype(int)
    cols["target"] = ds.target
    pd.DataFrame(cols).to_csv(path, index=False)
