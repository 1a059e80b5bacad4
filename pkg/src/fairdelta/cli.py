"""Command-line interface.

Exit codes: 0 success, 1 invalid arguments or configuration, 2 data or
runtime errors.
"""
import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import learners
from .data import SplitSpec, load_dataset, load_schema, split
from .errors import FairDeltaError, ValidationError
from .postproc import PredictionPair, apply_postprocess, read_pairs, write_pairs
from .repair import apply_repair, fit_repair, load_repair, save_repair
from .report import (DEFAULT_BINS, LEARNER_LABELS, build_report, histogram, load_config,
                     render_report, run_experiment)

log = logging.getLogger("fairdelta")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(data: bytes, out):
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _load(args):
    schema = load_schema(args.schema)
    return schema, load_dataset(args.data, schema)


def _align(ds, ids, what):
    index = {int(r): i for i, r in enumerate(ds.row_ids)}
    missing = [int(i) for i in ids if int(i) not in index]
    if missing:
        raise ValidationError(f"{what}: row_id {missing[0]} is not in the dataset")
    return ds.take([index[int(i)] for i in ids])


def cmd_train(args):
    _, ds = _load(args)
    train, test, sample = split(ds, SplitSpec(args.train_fraction, args.sample_size, args.seed))
    kwargs = {}
    if args.learner == "logistic" or (args.learner == "auto" and ds.task_kind == "logistic_loss"):
        kwargs = {"max_iter": args.max_iter, "tol": args.tol}
    model, fit = learners.fit_baseline(train, args.learner, **kwargs)
    if not fit.converged:
        log.warning("baseline did not converge after %d iterations", fit.iterations)
    if args.model_out:
        learners.save_predictor(model, args.model_out)
    comp = test.take(sample)
    learners.write_predictions(args.predictions_out, comp.row_ids,
                               learners.predict(model, comp.features))
    if args.train_predictions_out:
        learners.write_predictions(args.train_predictions_out, train.row_ids,
                                   learners.predict(model, train.features))
    print(f"{LEARNER_LABELS[model.kind]}: {len(train)} training rows, "
          f"training loss {fit.final_training_loss:.6g}, converged={fit.converged}")


def cmd_repair(args):
    _, ds = _load(args)
    if args.model:
        rm = load_repair(args.model)
    else:
        if not args.train_predictions:
            raise ValidationError("--train-predictions is required unless --model is given")
        ids, vals = learners.read_predictions(args.train_predictions)
        rm = fit_repair(vals, _align(ds, ids, args.train_predictions).sensitive, args.epsilon)
        if args.model_out:
            save_repair(rm, args.model_out)
    ids, vals = learners.read_predictions(args.predictions)
    fair = apply_repair(rm, vals, _align(ds, ids, args.predictions).sensitive)
    learners.write_predictions(args.out, ids, fair)
    print(f"repair lambda = {rm.lam:g} (epsilon target {rm.epsilon_target:g})")


def cmd_compare(args):
    _, ds = _load(args)
    bid, b = learners.read_predictions(args.baseline)
    fid, f = learners.read_predictions(args.fair)
    if not np.array_equal(bid, fid):
        raise ValidationError("baseline and fair files must list the same row_ids in the same order")
    rows = _align(ds, bid, args.baseline)
    pair = PredictionPair(baseline=b, fair=f, sensitive=rows.sensitive, targets=rows.target)
    if args.out:
        write_pairs(args.out, pair, row_ids=bid)
    r = build_report(pair, ds.task_kind, args.baseline_learner, args.fair_learner, args.epsilon)
    _emit(render_report(r, None, args.format, None if args.full_precision else 3), None)


def cmd_postprocess(args):
    pair, ids, _ = read_pairs(args.pairs)
    y = apply_postprocess(args.algorithm, pair, theta=getattr(args, "theta", 0.0),
                          a=getattr(args, "a", None), b=getattr(args, "b", None), clamp=args.clamp)
    write_pairs(args.out, pair, row_ids=ids, postprocessed=y)


def cmd_report(args):
    pair, _, post = read_pairs(args.pairs)
    r = build_report(pair, args.task, args.baseline_learner, args.fair_learner, args.epsilon,
                     args.postproc_name if post is not None else None, post)
    diffs = r.postproc_diffs if (post is not None and args.histogram_of == "postprocessed") else r.diffs
    h = histogram(diffs, args.bins)
    _emit(render_report(r, h, args.format, None if args.full_precision else 3), args.out)


def cmd_run(args):
    cfg = load_config(args.config)
    r = run_experiment(cfg)
    h = histogram(r.diffs if r.postproc_diffs is None else r.postproc_diffs, cfg.bins)
    precision = None if args.full_precision else 3
    _emit(render_report(r, h, args.format, precision), args.out)
    if args.histogram_out:
        Path(args.histogram_out).write_bytes(render_report(r, h, "svg"))


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV file or directory with the schema's files")
    p.add_argument("--schema", required=True, help="bundled schema name or schema file path")


def build_parser():
    parser = _Parser(prog="fairdelta", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="fit a baseline and export its predictions")
    _add_data_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--sample-size", type=int, default=1000)
    p.add_argument("--learner", choices=("auto", "ols", "logistic"), default="auto")
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--model-out")
    p.add_argument("--predictions-out", required=True,
                   help="row_id,prediction for the comparison sample")
    p.add_argument("--train-predictions-out", help="row_id,prediction for the training rows")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("repair", help="fit and/or apply the quantile repair")
    _add_data_args(p)
    p.add_argument("--train-predictions", help="baseline predictions on the training rows")
    p.add_argument("--predictions", required=True, help="baseline predictions to repair")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--model", help="existing repair model; skips fitting")
    p.add_argument("--model-out")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("compare", help="metrics and difference statistics for B vs F")
    _add_data_args(p)
    p.add_argument("--baseline", required=True)
    p.add_argument("--fair", required=True)
    p.add_argument("--baseline-learner", default="baseline")
    p.add_argument("--fair-learner", default="fair")
    p.add_argument("--epsilon", type=float, default=float("nan"))
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.add_argument("--full-precision", action="store_true")
    p.add_argument("--out", help="write the aligned prediction pairs CSV here")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("postprocess", help="apply one post-processing algorithm")
    algs = p.add_subparsers(dest="algorithm", required=True, parser_class=_Parser)
    for name, needs in (("cap", "theta"), ("translate-nonpos", None), ("norm-nonpos", "ab"),
                        ("translate-budget", None), ("norm-budget", "ab")):
        q = algs.add_parser(name)
        q.add_argument("--pairs", required=True, help="input pairs CSV")
        q.add_argument("--out", required=True, help="output pairs CSV")
        q.add_argument("--clamp", action="store_true", help="clamp outputs to [0, 1]")
        if needs == "theta":
            q.add_argument("--theta", type=float, default=0.0)
        elif needs == "ab":
            q.add_argument("--a", type=float, required=True)
            q.add_argument("--b", type=float, required=True)
        q.set_defaults(func=cmd_postprocess)

    p = sub.add_parser("report", help="render a report from a pairs CSV")
    p.add_argument("--pairs", required=True)
    p.add_argument("--task", choices=("square_loss", "logistic_loss"), required=True)
    p.add_argument("--format", choices=("csv", "text", "svg"), default="csv")
    p.add_argument("--baseline-learner", default="baseline")
    p.add_argument("--fair-learner", default="fair")
    p.add_argument("--epsilon", type=float, default=float("nan"))
    p.add_argument("--postproc-name", default="postprocessed")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--histogram-of", choices=("fair", "postprocessed"), default="fair")
    p.add_argument("--full-precision", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run", help="end-to-end experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--format", choices=("csv", "text", "svg"), default="csv")
    p.add_argument("--full-precision", action="store_true")
    p.add_argument("--out")
    p.add_argument("--histogram-out", help="also write the difference histogram as SVG")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"fairdelta: {exc}", file=sys.stderr)
        return 1
    except (FairDeltaError, OSError) as exc:
        print(f"fairdelta: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
