"""Unconstrained baseline learners: ridge OLS and logistic regression.

Both produce a :class:`Predictor` whose outputs always lie in [0, 1]: OLS
outputs are clamped, logistic outputs go through the sigmoid.
"""
import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .errors import DataError, ValidationError
from .metrics import LOGISTIC_LOSS, SQUARE_LOSS

log = logging.getLogger(__name__)

OLS = "ols"
LOGISTIC = "logistic"

OLS_RIDGE = 1e-8
LOGISTIC_RIDGE = 1e-6


@dataclass(frozen=True)
class Predictor:
    weights: np.ndarray
    intercept: float
    kind: str
    clamp_range: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.kind not in (OLS, LOGISTIC):
            raise ValidationError(f"unknown predictor kind {self.kind!r}")
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float).ravel())
        object.__setattr__(self, "intercept", float(self.intercept))


@dataclass(frozen=True)
class FitReport:
    converged: bool
    iterations: int
    final_training_loss: float
    loss_history: list = field(default_factory=list, repr=False)


def _design(ds_or_x):
    x = getattr(ds_or_x, "features", ds_or_x)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValidationError(f"feature matrix must be 2-D, got shape {x.shape}")
    return x


def fit_ols(train, ridge: float = OLS_RIDGE):
    """Least squares with a small ridge penalty on the weights.

    The intercept is not penalised: features and target are centred, the
    ridge system is solved for the weights and the intercept is recovered
    from the means.
    """
    kind = getattr(train, "task_kind", SQUARE_LOSS)
    if kind != SQUARE_LOSS:
        raise ValidationError(f"fit_ols expects a square_loss dataset, got {kind}")
    x = _design(train)
    y = np.asarray(train.target, dtype=float)
    x_mean = x.mean(axis=0)
    y_mean = y.mean()
    xc = x - x_mean
    gram = xc.T @ xc
    gram[np.diag_indices_from(gram)] += ridge * x.shape[0]
    try:
        w = np.linalg.solve(gram, xc.T @ (y - y_mean))
    except np.linalg.LinAlgError as exc:
        raise DataError(f"normal equations are singular even with ridge={ridge}") from exc
    b = y_mean - x_mean @ w
    p = Predictor(weights=w, intercept=b, kind=OLS)
    resid = x @ w + b - y
    loss = float(np.mean(resid ** 2))
    return p, FitReport(converged=True, iterations=1, final_training_loss=loss, loss_history=[loss])


def _logistic_objective(x, y, w, b, ridge):
    z = x @ w + b
    # log(1 + e^z) - y z, stable for large |z|
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * ridge * (w @ w)
    return float(loss), z


def fit_logistic(train, max_iter: int = 2000, tol: float = 1e-4, ridge: float = LOGISTIC_RIDGE):
    """Full-batch gradient descent on the mean log-loss with backtracking.

    Each step starts from twice the previously accepted step size and halves
    it until the Armijo condition holds, so the objective never increases.
    ``converged`` is set once the largest gradient component drops below
    ``tol``.
    """
    kind = getattr(train, "task_kind", LOGISTIC_LOSS)
    if kind != LOGISTIC_LOSS:
        raise ValidationError(f"fit_logistic expects a logistic_loss dataset, got {kind}")
    if max_iter < 1 or tol <= 0:
        raise ValidationError("max_iter must be positive and tol must be > 0")
    x = _design(train)
    y = np.asarray(train.target, dtype=float)
    n, d = x.shape
    w = np.zeros(d)
    b = 0.0
    loss, z = _logistic_objective(x, y, w, b, ridge)
    history = [loss]
    step = 1.0
    converged = False
    it = 0
    while it < max_iter:
        r = expit(z) - y
        gw = x.T @ r / n + ridge * w
        gb = float(r.mean())
        gmax = max(float(np.max(np.abs(gw))) if d else 0.0, abs(gb))
        if gmax < tol:
            converged = True
            break
        gnorm2 = float(gw @ gw) + gb * gb
        step *= 2.0
        while True:
            w_new = w - step * gw
            b_new = b - step * gb
            new_loss, z_new = _logistic_objective(x, y, w_new, b_new, ridge)
            if not np.isfinite(new_loss):
                raise DataError("logistic loss became non-finite; are the features scaled?")
            if new_loss <= loss - 0.5 * step * gnorm2:
                break
            step *= 0.5
            if step < 1e-20:
                break
        if new_loss > loss:
            # no descent possible at machine precision
            break
        w, b, loss, z = w_new, b_new, new_loss, z_new
        history.append(loss)
        it += 1
    if not converged:
        log.info("logistic fit stopped after %d iterations without reaching tol=%g", it, tol)
    p = Predictor(weights=w, intercept=b, kind=LOGISTIC)
    return p, FitReport(converged=converged, iterations=it, final_training_loss=loss,
                        loss_history=history)


def fit_baseline(train, kind: str = "auto", **kwargs):
    """Fit OLS for square-loss data and logistic regression otherwise."""
    if kind == "auto":
        kind = OLS if train.task_kind == SQUARE_LOSS else LOGISTIC
    if kind == OLS:
        return fit_ols(train, **kwargs)
    if kind == LOGISTIC:
        return fit_logistic(train, **kwargs)
    raise ValidationError(f"unknown learner {kind!r}; expected 'ols', 'logistic' or 'auto'")


def predict(p: Predictor, features) -> np.ndarray:
    x = _design(features)
    if x.shape[1] != p.weights.size:
        raise ValidationError(
            f"feature matrix has {x.shape[1]} columns, predictor expects {p.weights.size}")
    z = x @ p.weights + p.intercept
    if p.kind == LOGISTIC:
        return expit(z)
    lo, hi = p.clamp_range
    return np.clip(z, lo, hi)


def save_predictor(p: Predictor, path):
    # json writes floats with repr, the shortest string that round-trips
    doc = {"kind": p.kind, "intercept": p.intercept,
           "weights": [float(v) for v in p.weights],
           "clamp_range": list(p.clamp_range)}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_predictor(path) -> Predictor:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"predictor file not found: {path}")
    try:
        doc = json.loads(path.read_text())
        return Predictor(weights=doc["weights"], intercept=doc["intercept"], kind=doc["kind"],
                         clamp_range=tuple(doc.get("clamp_range", (0.0, 1.0))))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: not a predictor file ({exc})") from exc


def write_predictions(path, row_ids, predictions):
    """Export ``row_id,prediction`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row_id", "prediction"])
        for i, v in zip(row_ids, predictions):
            w.writerow([int(i), repr(float(v))])


def read_predictions(path):
    """Read a ``row_id,prediction`` file into ``(row_ids, predictions)`` arrays."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"prediction file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or {"row_id", "prediction"} - set(reader.fieldnames):
            raise DataError(f"{path}: expected header row_id,prediction")
        try:
            rows = [(int(r["row_id"]), float(r["prediction"])) for r in reader]
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: no predictions")
    ids, vals = zip(*rows)
    return np.array(ids), np.array(vals)
