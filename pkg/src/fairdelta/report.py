"""Experiment runner, result rows and difference histograms."""
import configparser
import csv
import io
from dataclasses import dataclass, field, fields
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from . import learners
from .data import SplitSpec, load_dataset, load_schema, split
from .errors import DataError, ValidationError
from .metrics import LOGISTIC_LOSS, dp_disparity, standard_loss
from .postproc import ALGORITHMS, PredictionPair, apply_postprocess, summarize_diffs
from .repair import apply_repair, fit_repair

CSV_COLUMNS = ("baseline_learner", "baseline_loss", "baseline_dp", "epsilon", "fair_learner",
               "fair_loss", "fair_dp", "max_increase", "max_decrease", "avg_difference",
               "postproc_name", "postproc_loss", "postproc_dp")

DEFAULT_BINS = 50
LEARNER_LABELS = {"ols": "OLS", "logistic": "LR"}


@dataclass
class ExperimentReport:
    baseline_learner: str
    baseline_loss: float
    baseline_dp: float
    epsilon: float
    fair_learner: str
    fair_loss: float
    fair_dp: float
    max_increase: float
    max_decrease: float
    avg_difference: float
    postproc_name: str = None
    postproc_loss: float = None
    postproc_dp: float = None
    # not part of the CSV row
    task_kind: str = field(default=None, repr=False)
    diffs: np.ndarray = field(default=None, repr=False)
    postproc_diffs: np.ndarray = field(default=None, repr=False)
    notes: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self.max_decrease <= self.avg_difference <= self.max_increase:
            # the mean of a sample always lies between its extremes, up to rounding
            slack = 1e-12 * max(1.0, abs(self.avg_difference))
            if not self.max_decrease - slack <= self.avg_difference <= self.max_increase + slack:
                raise ValidationError("avg_difference must lie between max_decrease and max_increase")

    @property
    def postproc_summary(self):
        return None if self.postproc_diffs is None else summarize_diffs(self.postproc_diffs)


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray


def histogram(diffs, bin_count: int = DEFAULT_BINS) -> Histogram:
    """Equal-width bins over ``[min, max]``; the last bin is closed.

    A sample with a single distinct value gets one bin of width 1e-9 centred
    on it.
    """
    d = np.asarray(diffs, dtype=float).ravel()
    if d.size == 0:
        raise ValidationError("histogram needs at least one value")
    if int(bin_count) < 1:
        raise ValidationError("bin_count must be positive")
    lo, hi = float(d.min()), float(d.max())
    if lo == hi:
        return Histogram(bin_edges=np.array([lo - 5e-10, lo + 5e-10]),
                         counts=np.array([d.size]))
    counts, edges = np.histogram(d, bins=int(bin_count), range=(lo, hi))
    return Histogram(bin_edges=edges, counts=counts)


def build_report(pair: PredictionPair, task_kind: str, baseline_learner: str,
                 fair_learner: str, epsilon: float, postproc_name: str = None,
                 postprocessed=None) -> ExperimentReport:
    """Metrics and difference statistics for one baseline/fair comparison."""
    d = summarize_diffs(pair.diffs)
    r = ExperimentReport(
        baseline_learner=baseline_learner,
        baseline_loss=standard_loss(pair.baseline, pair.targets, task_kind),
        baseline_dp=dp_disparity(pair.baseline, pair.sensitive),
        epsilon=epsilon, fair_learner=fair_learner,
        fair_loss=standard_loss(pair.fair, pair.targets, task_kind),
        fair_dp=dp_disparity(pair.fair, pair.sensitive),
        max_increase=d.max_increase, max_decrease=d.max_decrease,
        avg_difference=d.mean_diff, task_kind=task_kind, diffs=d.diffs)
    if postprocessed is not None:
        y = np.asarray(postprocessed, dtype=float)
        r.postproc_name = postproc_name
        r.postproc_loss = standard_loss(y, pair.targets, task_kind)
        r.postproc_dp = dp_disparity(y, pair.sensitive)
        r.postproc_diffs = y - pair.baseline
    return r


@dataclass
class ExperimentConfig:
    data: Path
    schema: object
    seed: int = 0
    train_fraction: float = 0.5
    sample_size: int = 1000
    learner: str = "auto"
    max_iter: int = 2000
    tol: float = 1e-4
    fair: str = "repair"
    epsilon: float = 0.05
    fair_predictions: Path = None
    fair_learner: str = None
    postprocess: str = None
    theta: float = 0.0
    a: float = None
    b: float = None
    clamp: bool = False
    bins: int = DEFAULT_BINS
    name: str = ""


def _field_error(key, msg):
    return ValidationError(f"[experiment] {key}: {msg}")


def load_config(path) -> ExperimentConfig:
    """Parse an ``[experiment]`` INI file; relative paths resolve against it."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    if "experiment" not in cp:
        raise ValidationError(f"{path}: missing [experiment] section")
    sec = cp["experiment"]
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(sec) - known
    if unknown:
        raise _field_error(sorted(unknown)[0], "unknown key")
    for key in ("data", "schema"):
        if key not in sec:
            raise _field_error(key, "required")
    base = path.parent

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    def get(key, conv, default):
        if key not in sec or sec[key].strip() == "":
            return default
        try:
            return conv(sec[key].strip())
        except ValueError:
            raise _field_error(key, f"cannot parse {sec[key]!r}") from None

    def boolean(text):
        t = text.lower()
        if t in ("1", "true", "yes", "on"):
            return True
        if t in ("0", "false", "no", "off"):
            return False
        raise ValueError(text)

    schema = sec["schema"].strip()
    if resolve(schema).is_file():
        schema = resolve(schema)
    post = get("postprocess", str, None)
    cfg = ExperimentConfig(
        data=resolve(sec["data"].strip()), schema=schema,
        seed=get("seed", int, 0), train_fraction=get("train_fraction", float, 0.5),
        sample_size=get("sample_size", int, 1000), learner=get("learner", str, "auto"),
        max_iter=get("max_iter", int, 2000), tol=get("tol", float, 1e-4),
        fair=get("fair", str, "repair"), epsilon=get("epsilon", float, 0.05),
        fair_predictions=get("fair_predictions", resolve, None),
        fair_learner=get("fair_learner", str, None),
        postprocess=None if post in (None, "none") else post,
        theta=get("theta", float, 0.0), a=get("a", float, None), b=get("b", float, None),
        clamp=get("clamp", boolean, False), bins=get("bins", int, DEFAULT_BINS),
        name=get("name", str, path.stem))
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig):
    if cfg.learner not in ("auto", "ols", "logistic"):
        raise _field_error("learner", "must be auto, ols or logistic")
    if cfg.fair not in ("repair", "file"):
        raise _field_error("fair", "must be repair or file")
    if cfg.fair == "file" and cfg.fair_predictions is None:
        raise _field_error("fair_predictions", "required when fair = file")
    if not 0.0 <= cfg.epsilon <= 1.0:
        raise _field_error("epsilon", "must be in [0, 1]")
    if not 0.0 < cfg.train_fraction < 1.0:
        raise _field_error("train_fraction", "must be in (0, 1)")
    if cfg.sample_size < 1:
        raise _field_error("sample_size", "must be positive")
    if cfg.bins < 1:
        raise _field_error("bins", "must be positive")
    if cfg.postprocess is not None:
        if cfg.postprocess not in ALGORITHMS:
            raise _field_error("postprocess", f"must be none or one of {sorted(ALGORITHMS)}")
        if cfg.postprocess.startswith("norm-"):
            if cfg.a is None or cfg.b is None:
                raise _field_error("a" if cfg.a is None else "b", f"required by {cfg.postprocess}")
            if cfg.a > cfg.b:
                raise _field_error("a", f"range minimum {cfg.a} exceeds maximum {cfg.b}")


def run_experiment(config) -> ExperimentReport:
    """Load, split, fit the baseline, produce fair outputs, compare, post-process.

    ``config`` is an :class:`ExperimentConfig` or a path to a config file.
    """
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config)
    validate_config(cfg)
    schema = load_schema(cfg.schema)
    ds = load_dataset(cfg.data, schema)
    train, test, sample = split(ds, SplitSpec(cfg.train_fraction, cfg.sample_size, cfg.seed))
    kind = _learner_kind(cfg, ds)
    kwargs = {"max_iter": cfg.max_iter, "tol": cfg.tol} if kind == "logistic" else {}
    model, fit = learners.fit_baseline(train, kind, **kwargs)
    notes = []
    if not fit.converged:
        notes.append(f"baseline did not converge in {fit.iterations} iterations")
    comp = test.take(sample)
    b = learners.predict(model, comp.features)

    if cfg.fair == "repair":
        rm = fit_repair(learners.predict(model, train.features), train.sensitive, cfg.epsilon)
        f = apply_repair(rm, b, comp.sensitive)
        fair_label = cfg.fair_learner or "repair"
        notes.append(f"repair lambda = {rm.lam:g}")
    else:
        ids, vals = learners.read_predictions(cfg.fair_predictions)
        lookup = dict(zip(ids.tolist(), vals.tolist()))
        missing = [i for i in comp.row_ids.tolist() if i not in lookup]
        if missing:
            raise DataError(f"{cfg.fair_predictions}: no prediction for row_id {missing[0]} "
                            f"({len(missing)} comparison rows missing)")
        f = np.array([lookup[i] for i in comp.row_ids.tolist()])
        fair_label = cfg.fair_learner or "external"

    pair = PredictionPair(baseline=b, fair=f, sensitive=comp.sensitive, targets=comp.target)
    post = None
    if cfg.postprocess:
        post = apply_postprocess(cfg.postprocess, pair, theta=cfg.theta, a=cfg.a, b=cfg.b,
                                 clamp=cfg.clamp)
    r = build_report(pair, ds.task_kind, LEARNER_LABELS[model.kind], fair_label, cfg.epsilon,
                     cfg.postprocess, post)
    r.notes = notes
    return r


def _learner_kind(cfg, ds):
    if cfg.learner != "auto":
        return cfg.learner
    return "logistic" if ds.task_kind == LOGISTIC_LOSS else "ols"


def _fmt(v, precision):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if precision is None:
        return repr(float(v))
    return f"{v:.{precision}f}"


def _row(r, precision):
    return [_fmt(getattr(r, c), precision) for c in CSV_COLUMNS]


def render_report(r: ExperimentReport, h: Histogram = None, format: str = "csv",
                  precision: int = 3) -> bytes:
    """Serialise a report as CSV, an aligned text block, or an SVG histogram.

    ``precision=None`` writes floats at full precision.
    """
    if format == "csv":
        return render_table([r], "csv", precision)
    if format == "text":
        return _render_text(r, h, precision)
    if format == "svg":
        if h is None:
            if r.diffs is None:
                raise ValidationError("svg output needs a histogram")
            h = histogram(r.diffs)
        return render_svg(h)
    raise ValidationError(f"unknown format {format!r}; expected csv, text or svg")


def render_table(reports, format: str = "csv", precision: int = 3) -> bytes:
    """Several report rows in one table.

    In text form the column extremes (largest increase, largest decrease,
    lowest average difference) are wrapped in asterisks.
    """
    rows = [_row(r, precision) for r in reports]
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(rows)
        return buf.getvalue().encode()
    if format != "text":
        raise ValidationError(f"tables render as csv or text, not {format!r}")
    if len(reports) > 1:
        picks = {"max_increase": max, "max_decrease": min, "avg_difference": min}
        for col, pick in picks.items():
            j = CSV_COLUMNS.index(col)
            best = pick(getattr(r, col) for r in reports)
            for r, row in zip(reports, rows):
                if getattr(r, col) == best:
                    row[j] = f"*{row[j]}*"
    widths = [max(len(c), *(len(row[j]) for row in rows)) for j, c in enumerate(CSV_COLUMNS)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(CSV_COLUMNS, widths)).rstrip()]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in rows]
    return ("\n".join(lines) + "\n").encode()


def _render_text(r, h, precision):
    loss_name = "mean log-loss" if r.task_kind == LOGISTIC_LOSS else "mean squared error"
    f = lambda v: _fmt(v, precision)  # noqa: E731
    items = [
        ("baseline learner", r.baseline_learner),
        (f"baseline loss ({loss_name})", f(r.baseline_loss)),
        ("baseline DP disparity", f(r.baseline_dp)),
        ("repair epsilon target" if r.fair_learner == "repair" else "epsilon", f(r.epsilon)),
        ("fair learner", r.fair_learner),
        (f"fair loss ({loss_name})", f(r.fair_loss)),
        ("fair DP disparity", f(r.fair_dp)),
        ("max increase", f(r.max_increase)),
        ("max decrease", f(r.max_decrease)),
        ("avg difference", f(r.avg_difference)),
    ]
    if r.postproc_name:
        items += [("post-processing", r.postproc_name),
                  (f"post-processed loss ({loss_name})", f(r.postproc_loss)),
                  ("post-processed DP disparity", f(r.postproc_dp))]
        s = r.postproc_summary
        if s is not None:
            items += [("post-processed max increase", f(s.max_increase)),
                      ("post-processed max decrease", f(s.max_decrease)),
                      ("post-processed avg difference", f(s.mean_diff))]
    width = max(len(k) for k, _ in items)
    lines = [f"{k.ljust(width)}  {v}" for k, v in items]
    for note in r.notes:
        lines.append(f"note: {note}")
    if h is not None:
        lines.append("")
        lines.append("histogram of differences (bin start, count)")
        for lo, c in zip(h.bin_edges[:-1], h.counts):
            lines.append(f"  {lo: .{precision or 6}f}  {int(c)}")
    return ("\n".join(lines) + "\n").encode()


def render_svg(h: Histogram, width: int = 640, height: int = 400) -> bytes:
    """Static bar chart of a histogram, one ``rect`` per non-empty bin."""
    left, right, top, bottom = 60, 20, 20, 50
    pw, ph = width - left - right, height - top - bottom
    edges = np.asarray(h.bin_edges, dtype=float)
    counts = np.asarray(h.counts)
    x0, x1 = edges[0], edges[-1]
    ymax = max(int(counts.max()), 1)

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        if c == 0:
            continue
        bh = c / ymax * ph
        parts.append(f'<rect x="{sx(lo):.2f}" y="{top + ph - bh:.2f}" '
                     f'width="{max(sx(hi) - sx(lo), 0.5):.2f}" height="{bh:.2f}" fill="steelblue"/>')
    tick = lambda v: f"{v:.3g}"  # noqa: E731
    parts += [
        f'<text x="{left}" y="{top + ph + 16}" font-size="11" text-anchor="middle">{escape(tick(x0))}</text>',
        f'<text x="{left + pw}" y="{top + ph + 16}" font-size="11" text-anchor="middle">{escape(tick(x1))}</text>',
        f'<text x="{left - 6}" y="{top + 4}" font-size="11" text-anchor="end">{ymax}</text>',
        f'<text x="{left - 6}" y="{top + ph}" font-size="11" text-anchor="end">0</text>',
        f'<text x="{left + pw / 2}" y="{height - 12}" font-size="13" text-anchor="middle">δ</text>',
        f'<text x="16" y="{top + ph / 2}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2})">count</text>',
        "</svg>",
    ]
    return ("\n".join(parts) + "\n").encode("utf-8")
