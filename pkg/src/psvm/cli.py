"""Command-line entry point: train, predict, eval, cv, and bench workflows.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Reports go to standard output (canonical ordering, no timings, so identical
configurations produce identical bytes); logs and timings go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from . import bench
from .data import (Dataset, SplitSpec, load_csv, load_matrix, map_binary_labels,
                   standardize, train_test_split, Standardizer)
from .dual import DEFAULT_EPS, DEFAULT_MAX_ITER, DEFAULT_SEED, Hyperparams
from .exceptions import (DegenerateDataError, InvalidInputError, NonPSDKernelError,
                         NumericFailureError, OracleFailureError, ParseError, PsvmError)
from .kernels import Kernel, default_gaussian_sigma
from .models import fit_multiclass, load_model, predict_multiclass_batch, save_model
from .selection import (DEFAULT_C_GRID, DEFAULT_P_GRID, GridSpec, cross_validate, evaluate)

logger = logging.getLogger("psvm")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_data_flags(sub, label_required=True):
    sub.add_argument("--data", required=True, help="delimited text file")
    sub.add_argument("--delim", default=",", help="field delimiter (default ',')")
    sub.add_argument("--label-col", default="-1" if label_required else None,
                     help="label column index or header name (default: last column)")
    header = sub.add_mutually_exclusive_group()
    header.add_argument("--header", dest="header", action="store_const", const=True,
                        default=None, help="first row is a header")
    header.add_argument("--no-header", dest="header", action="store_const", const=False,
                        help="first row is data")


def _add_model_flags(sub):
    sub.add_argument("--p", type=float, required=True, help="hinge-loss exponent, >= 1")
    sub.add_argument("--C", type=float, required=True, help="slack penalty weight")
    sub.add_argument("--eps", type=float, default=DEFAULT_EPS)
    sub.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    sub.add_argument("--kernel", choices=("gaussian", "linear"), default="gaussian")
    sub.add_argument("--sigma", type=float, default=None,
                     help="gaussian bandwidth (default: 2*sigma^2 = M*Var[X] on train)")


def build_parser() -> _Parser:
    parser = _Parser(prog="psvm", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--verbose", action="store_true", help="chatty logs on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a model, report held-out accuracy")
    _add_data_flags(p_train)
    _add_model_flags(p_train)
    p_train.add_argument("--split", type=float, default=0.7, help="train fraction (0,1)")
    p_train.add_argument("--stratified", action="store_true")
    p_train.add_argument("--model-out", default="model.psvm")
    p_train.add_argument("--jobs", type=int, default=1)

    p_pred = sub.add_parser("predict", help="write predicted labels for a file")
    p_pred.add_argument("--model", required=True)
    _add_data_flags(p_pred, label_required=False)
    p_pred.add_argument("--out", default=None, help="output path (default stdout)")

    p_eval = sub.add_parser("eval", help="accuracy/nSV report for a model on labeled data")
    p_eval.add_argument("--model", required=True)
    _add_data_flags(p_eval)

    p_cv = sub.add_parser("cv", help="grid search with k-fold cross-validation")
    _add_data_flags(p_cv)
    p_cv.add_argument("--p-grid", default=",".join(str(v) for v in DEFAULT_P_GRID))
    p_cv.add_argument("--C-grid", default=",".join(str(v) for v in DEFAULT_C_GRID))
    p_cv.add_argument("--folds", type=int, default=5)
    p_cv.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p_cv.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p_cv.add_argument("--kernel", choices=("gaussian", "linear"), default="gaussian")
    p_cv.add_argument("--sigma", type=float, default=None)
    p_cv.add_argument("--jobs", type=int, default=1)

    p_bench = sub.add_parser("bench", help="reproduce a named experiment")
    p_bench.add_argument("name", help="one of: " + ", ".join(bench.EXPERIMENT_NAMES))
    p_bench.add_argument("--data-dir", default="data")
    p_bench.add_argument("--oracle", action="store_true",
                         help="cross-check a small subsample against the reference solver")
    p_bench.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p_bench.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p_bench.add_argument("--jobs", type=int, default=1)
    return parser


def _sniff_header(path, delim, label_col) -> bool:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
    if delim.isspace():
        fields = first.split()
    else:
        fields = [f.strip() for f in first.rstrip("\n").split(delim)]
    width = len(fields)
    idx = None
    if label_col is not None:
        try:
            idx = int(label_col)
            if idx < 0:
                idx += width
        except ValueError:
            return True  # label addressed by name: needs a header
    for col, tok in enumerate(fields):
        if col == idx or tok == "":
            continue
        try:
            float(tok)
        except ValueError:
            return True
    return False


def _label_col_arg(raw):
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        return raw


def _load_labeled(args) -> Dataset:
    label_col = _label_col_arg(args.label_col)
    header = args.header
    if header is None:
        header = _sniff_header(args.data, args.delim, args.label_col)
    ds = load_csv(args.data, has_header=header, label_column=label_col, delimiter=args.delim)
    vals = set(np.unique(ds.y).tolist())
    if vals == {0, 1}:
        ds = Dataset(X=ds.X, y=map_binary_labels(ds.y), feature_names=ds.feature_names,
                     standardized=ds.standardized)
    return ds


def _resolve_kernel(args, X_train) -> Kernel:
    if args.kernel == "linear":
        return Kernel("linear")
    sigma = args.sigma if args.sigma is not None else default_gaussian_sigma(X_train)
    return Kernel("gaussian", sigma=sigma)


def _validate_common(args):
    if getattr(args, "p", None) is not None and args.p < 1.0:
        raise UsageError(f"--p must be >= 1, got {args.p}")
    if getattr(args, "C", None) is not None and args.C <= 0.0:
        raise UsageError(f"--C must be positive, got {args.C}")
    if getattr(args, "eps", None) is not None and args.eps <= 0.0:
        raise UsageError("--eps must be positive")
    if getattr(args, "max_iter", None) is not None and args.max_iter < 1:
        raise UsageError("--max-iter must be >= 1")
    if getattr(args, "sigma", None) is not None and args.sigma <= 0.0:
        raise UsageError("--sigma must be positive")
    if getattr(args, "split", None) is not None and not (0.0 < args.split < 1.0):
        raise UsageError("--split must lie in (0, 1)")
    if getattr(args, "folds", None) is not None and args.folds < 2:
        raise UsageError("--folds must be >= 2")
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        raise UsageError("--jobs must be >= 1")


def _report_line(rep) -> str:
    return ("accuracy={:.6f}\tnsv_pct={:.4f}\ttrain_size={}\ttest_size={}\tp={:g}\tC={:g}"
            .format(rep.accuracy, 100.0 * rep.nsv_fraction, rep.train_size, rep.test_size,
                    rep.p, rep.C))


def cmd_train(args) -> int:
    raw = _load_labeled(args)
    st = Standardizer.fit(raw.X)
    ds = Dataset(X=st.apply(raw.X), y=raw.y, feature_names=raw.feature_names,
                 standardized=True)
    train, test = train_test_split(
        ds, SplitSpec(train_fraction=args.split, seed=args.seed, stratified=args.stratified))
    kernel = _resolve_kernel(args, train.X)
    hp = Hyperparams(p=args.p, C=args.C, eps=args.eps, max_iter=args.max_iter, seed=args.seed)
    t0 = time.perf_counter()
    model = fit_multiclass(train.X, train.y, hp, kernel, standardizer=st, n_jobs=args.jobs)
    wall = time.perf_counter() - t0
    logger.info("training took %.2f s", wall)
    save_model(model, args.model_out)
    rep = evaluate(model, test, wall_time=wall)
    print(_report_line(rep))
    return EXIT_OK


def _apply_model_transform(model, X):
    if model.standardizer is not None:
        return model.standardizer.apply(X)
    return X


def cmd_predict(args) -> int:
    model = load_model(args.model)
    if args.label_col is not None:
        ds = _load_labeled(args)
        X, truth = ds.X, ds.y
    else:
        header = args.header
        if header is None:
            header = _sniff_header(args.data, args.delim, None)
        X = load_matrix(args.data, has_header=header, delimiter=args.delim)
        truth = None
    preds = predict_multiclass_batch(model, _apply_model_transform(model, X))
    out = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8")
    try:
        for p in preds:
            out.write(f"{p}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if truth is not None:
        acc = sum(1 for p, t in zip(preds, truth.tolist()) if p == t) / len(preds)
        logger.info("accuracy on labeled input: %.6f", acc)
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    ds = _load_labeled(args)
    test = Dataset(X=_apply_model_transform(model, ds.X), y=ds.y,
                   feature_names=ds.feature_names, standardized=True)
    rep = evaluate(model, test)
    print(_report_line(rep))
    return EXIT_OK


def cmd_cv(args) -> int:
    raw = _load_labeled(args)
    ds = standardize(raw)
    try:
        p_values = tuple(float(v) for v in args.p_grid.split(","))
        c_values = tuple(float(v) for v in args.C_grid.split(","))
    except ValueError as err:
        raise UsageError(f"bad grid value: {err}")
    grid = GridSpec(p_values=p_values, C_values=c_values, folds=args.folds)
    kernel = _resolve_kernel(args, ds.X)
    result = cross_validate(ds, grid, kernel, args.seed, eps=args.eps,
                            max_iter=args.max_iter, n_jobs=args.jobs)
    print("p\\C\t" + "\t".join(f"{c:g}" for c in grid.C_values))
    for pi, p in enumerate(grid.p_values):
        print(f"{p:g}\t" + "\t".join(f"{result.mean_accuracy[pi, ci]:.6f}"
                                     for ci in range(len(grid.C_values))))
    print(f"best_p={result.best_p:g}\tbest_C={result.best_C:g}")
    return EXIT_OK


def cmd_bench(args) -> int:
    name = args.name
    if name == "fig2":
        rows = bench.run_fig2(args.data_dir, seed=args.seed, eps=args.eps,
                              max_iter=args.max_iter)
        print("p\tfraction\ttrain_acc\ttest_acc\tnsv_pct")
        for p, frac, tr, te, nsv in rows:
            print(f"{p:g}\t{frac:g}\t{tr:.6f}\t{te:.6f}\t{nsv:.2f}")
        return EXIT_OK
    try:
        kind, dataset = name.split(":", 1)
    except ValueError:
        raise UsageError(f"unknown experiment {name!r}; expected one of "
                         + ", ".join(bench.EXPERIMENT_NAMES))
    if kind == "table1" and dataset in bench.TABLE1:
        rows = bench.run_table1(dataset, args.data_dir, seed=args.seed, eps=args.eps,
                                max_iter=args.max_iter, n_jobs=args.jobs)
    elif kind == "table2" and dataset in bench.TABLE2:
        rows = bench.run_table2(dataset, args.data_dir, seed=args.seed, eps=args.eps,
                                max_iter=args.max_iter, n_jobs=args.jobs)
    else:
        raise UsageError(f"unknown experiment {name!r}; expected one of "
                         + ", ".join(bench.EXPERIMENT_NAMES))
    print("dataset\tp\tC\tacc_pct\tnsv_pct\tpublished_acc_pct\tpublished_nsv_pct")
    for r in rows:
        c_str = "/" if r.C is None else f"{r.C:g}"
        published_acc = r.published_acc if kind == "table1" else (
            None if r.published_acc is None else 100.0 * r.published_acc)
        pa = "-" if published_acc is None else f"{published_acc:.2f}"
        pn = "-" if r.published_nsv is None else f"{r.published_nsv:.1f}"
        print(f"{r.dataset}\t{r.p:g}\t{c_str}\t{100.0 * r.accuracy:.2f}\t"
              f"{r.nsv_pct:.1f}\t{pa}\t{pn}")
    if args.oracle:
        if kind == "table1":
            train, _, kernel = bench.prepare_table1(dataset, args.data_dir, seed=args.seed)
        else:
            ds = standardize(bench.TABLE2_LOADERS[dataset](args.data_dir))
            train, _ = train_test_split(ds, SplitSpec(train_fraction=0.8, seed=args.seed))
            kernel = Kernel("linear")
        print("oracle_check\tp\tsolver_obj\toracle_obj\trel_gap")
        for r in rows:
            if r.p == 1.0:
                continue
            hp = Hyperparams(p=r.p, C=r.C if r.C else 1.0, eps=args.eps,
                             max_iter=args.max_iter, seed=args.seed)
            sobj, robj, gap = bench.oracle_crosscheck(train, hp, kernel)
            print(f"oracle_check\t{r.p:g}\t{sobj:.10g}\t{robj:.10g}\t{gap:.3e}")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "cv": cmd_cv,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(stream=sys.stderr,
                            level=logging.DEBUG if args.verbose else logging.INFO,
                            format="%(levelname)s %(name)s: %(message)s")
        _validate_common(args)
        return COMMANDS[args.command](args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, DegenerateDataError, FileNotFoundError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except (NumericFailureError, NonPSDKernelError, OracleFailureError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidInputError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except PsvmError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
