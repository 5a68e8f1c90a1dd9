"""Grid search with k-fold cross-validation, evaluation reports, learning curves."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import seeding
from .data import Dataset, SplitSpec, stratified_kfold_indices, train_test_split
from .dual import DEFAULT_EPS, DEFAULT_MAX_ITER, Hyperparams
from .exceptions import InvalidInputError
from .kernels import Kernel
from .models import OvOModel, fit_multiclass, predict_multiclass_batch

logger = logging.getLogger(__name__)

DEFAULT_P_GRID = (1.0, 1.25, 1.29, 1.33, 1.4, 1.5, 1.67, 2.0, 3.0)
DEFAULT_C_GRID = (0.1, 0.5, 1.0, 5.0, 10.0)


@dataclass(frozen=True)
class GridSpec:
    p_values: tuple = DEFAULT_P_GRID
    C_values: tuple = DEFAULT_C_GRID
    folds: int = 5

    def __post_init__(self):
        if not self.p_values or not self.C_values:
            raise InvalidInputError("grid axes must be nonempty")
        if self.folds < 2:
            raise InvalidInputError(f"folds must be >= 2, got {self.folds}")


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    nsv_fraction: float
    train_size: int
    test_size: int
    p: float
    C: float
    wall_time: float = 0.0


@dataclass(frozen=True)
class CVResult:
    best_p: float
    best_C: float
    mean_accuracy: np.ndarray  # (len(p_values), len(C_values))
    grid: GridSpec


def _accuracy(predictions, truth) -> float:
    correct = sum(1 for p, t in zip(predictions, truth) if p == t)
    return correct / len(predictions)


def cross_validate(ds: Dataset, grid: GridSpec, kernel: Kernel, seed: int, *,
                   eps: float = DEFAULT_EPS, max_iter: int = DEFAULT_MAX_ITER,
                   n_jobs: int = 1) -> CVResult:
    """Mean stratified-fold accuracy per (p, C); best cell maximizes it,
    ties broken by smaller C, then smaller p."""
    folds = stratified_kfold_indices(ds.y, grid.folds, seed)
    all_idx = np.arange(ds.m)
    table = np.zeros((len(grid.p_values), len(grid.C_values)))
    for pi, p in enumerate(grid.p_values):
        for ci, C in enumerate(grid.C_values):
            hp = Hyperparams(p=p, C=C, eps=eps, max_iter=max_iter, seed=seed)
            accs = []
            for fi, fold in enumerate(folds):
                train_idx = np.setdiff1d(all_idx, fold)
                tr, te = ds.subset(train_idx), ds.subset(fold)
                try:
                    model = fit_multiclass(tr.X, tr.y, hp, kernel, n_jobs=n_jobs)
                except Exception as err:
                    raise type(err)(f"(p={p}, C={C}, fold={fi}) {err}") from err
                accs.append(_accuracy(predict_multiclass_batch(model, te.X), te.y.tolist()))
            table[pi, ci] = float(np.mean(accs))
    cells = [(-table[pi, ci], C, p)
             for pi, p in enumerate(grid.p_values)
             for ci, C in enumerate(grid.C_values)]
    _, best_C, best_p = min(cells)
    return CVResult(best_p=best_p, best_C=best_C, mean_accuracy=table, grid=grid)


def evaluate(model: OvOModel, test: Dataset, wall_time: float = 0.0) -> EvalReport:
    """Accuracy on the test set plus the support-vector fraction of training."""
    preds = predict_multiclass_batch(model, test.X)
    hp = model.pairs[0][2].hp_used
    n_sv = sum(bm.n_sv for _, _, bm in model.pairs)
    n_train = sum(bm.n_train for _, _, bm in model.pairs)
    return EvalReport(accuracy=_accuracy(preds, test.y.tolist()),
                      nsv_fraction=n_sv / n_train,
                      train_size=n_train if len(model.pairs) > 1 else model.pairs[0][2].n_train,
                      test_size=test.m,
                      p=hp.p, C=hp.C, wall_time=wall_time)


def learning_curve(ds: Dataset, fractions, hp: Hyperparams, kernel: Kernel,
                   split: SplitSpec) -> list[tuple[float, float, float, float]]:
    """Rows (fraction, train_acc, test_acc, nsv_pct) over nested subsets of the
    train split; train accuracy is measured on the subset actually used."""
    train, test = train_test_split(ds, split)
    order = seeding.rng_for(hp.seed, seeding.LEARNING_CURVE).permutation(train.m)
    rows = []
    for frac in fractions:
        if not (0.0 < frac <= 1.0):
            raise InvalidInputError(f"fractions must lie in (0, 1], got {frac}")
        n = int(np.floor(train.m * frac))
        sub = train.subset(order[:n])
        if n < 2 or len(set(sub.y.tolist())) < 2:
            logger.warning("fraction %.3f gives a single-class subset; row skipped", frac)
            continue
        model = fit_multiclass(sub.X, sub.y, hp, kernel)
        train_acc = _accuracy(predict_multiclass_batch(model, sub.X), sub.y.tolist())
        test_acc = _accuracy(predict_multiclass_batch(model, test.X), test.y.tolist())
        nsv = sum(bm.n_sv for _, _, bm in model.pairs)
        ntr = sum(bm.n_train for _, _, bm in model.pairs)
        rows.append((frac, train_acc, test_acc, 100.0 * nsv / ntr))
    return rows
