import numpy as np

from psvm.data import Dataset, SplitSpec
from psvm.dual import Hyperparams
from psvm.kernels import Kernel
from psvm.models import fit_multiclass, predict_multiclass_batch
from psvm.selection import (EvalReport, GridSpec, cross_validate, evaluate, learning_curve)

LINEAR = Kernel("linear")


def blobs_dataset(seed=0, n_per=30, labels=(0, 1)):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal((-2.5, 0), 0.6, (n_per, 2)),
                   rng.normal((2.5, 0), 0.6, (n_per, 2))])
    y = np.asarray([labels[0]] * n_per + [labels[1]] * n_per)
    return Dataset(X=X, y=y)


class TestCrossValidate:
    def test_single_cell_grid(self):
        ds = blobs_dataset()
        grid = GridSpec(p_values=(2.0,), C_values=(1.0,), folds=3)
        res = cross_validate(ds, grid, LINEAR, seed=42)
        assert (res.best_p, res.best_C) == (2.0, 1.0)
        assert res.mean_accuracy.shape == (1, 1)
        assert res.mean_accuracy[0, 0] == 1.0

    def test_tie_breaks_prefer_small_C_then_small_p(self):
        # perfectly separable blobs: every cell reaches accuracy 1.0
        ds = blobs_dataset()
        grid = GridSpec(p_values=(2.0, 1.5), C_values=(5.0, 0.5), folds=3)
        res = cross_validate(ds, grid, LINEAR, seed=42)
        assert (res.best_p, res.best_C) == (1.5, 0.5)

    def test_deterministic(self):
        ds = blobs_dataset(seed=1)
        grid = GridSpec(p_values=(1.5, 2.0), C_values=(0.5,), folds=3)
        r1 = cross_validate(ds, grid, LINEAR, seed=9)
        r2 = cross_validate(ds, grid, LINEAR, seed=9)
        assert np.array_equal(r1.mean_accuracy, r2.mean_accuracy)
        assert (r1.best_p, r1.best_C) == (r2.best_p, r2.best_C)


class TestEvaluate:
    def test_perfect_and_recount(self):
        ds = blobs_dataset(seed=2)
        hp = Hyperparams(p=2.0, C=1.0)
        model = fit_multiclass(ds.X, ds.y, hp, LINEAR)
        rep = evaluate(model, ds)
        assert isinstance(rep, EvalReport)
        assert rep.accuracy == 1.0
        # independent confusion-matrix recount
        preds = np.asarray(predict_multiclass_batch(model, ds.X))
        confusion = {}
        for t, p in zip(ds.y, preds):
            confusion[(t, p)] = confusion.get((t, p), 0) + 1
        diag = sum(v for (t, p), v in confusion.items() if t == p)
        assert rep.accuracy == diag / ds.m
        assert rep.test_size == ds.m
        assert 0.0 < rep.nsv_fraction <= 1.0
        assert rep.train_size == ds.m  # single pair: its training size

    def test_report_fields(self):
        ds = blobs_dataset(seed=3)
        hp = Hyperparams(p=1.5, C=0.5)
        model = fit_multiclass(ds.X, ds.y, hp, LINEAR)
        rep = evaluate(model, ds, wall_time=1.25)
        assert (rep.p, rep.C, rep.wall_time) == (1.5, 0.5, 1.25)


class TestLearningCurve:
    def test_rows_and_full_fraction(self):
        ds = blobs_dataset(seed=4, n_per=40)
        hp = Hyperparams(p=2.0, C=1.0, seed=13)
        rows = learning_curve(ds, (0.5, 1.0), hp, LINEAR, SplitSpec(0.5, seed=13))
        assert len(rows) == 2
        fracs = [r[0] for r in rows]
        assert fracs == [0.5, 1.0]
        for _, train_acc, test_acc, nsv_pct in rows:
            assert 0.0 <= train_acc <= 1.0 and 0.0 <= test_acc <= 1.0
            assert 0.0 <= nsv_pct <= 100.0

    def test_nested_subsets_monotone_sv_count(self):
        # the empirical check targets the high-slack regime where most
        # support vectors keep carrying slack as more data arrives
        rng = np.random.default_rng(5)
        X = np.vstack([rng.normal((-0.7, 0), 1.0, (60, 2)),
                       rng.normal((0.7, 0), 1.0, (60, 2))])
        ds = Dataset(X=X, y=np.asarray([0] * 60 + [1] * 60))
        hp = Hyperparams(p=2.0, C=1.0, seed=5)
        rows = learning_curve(ds, (0.25, 0.5, 0.75, 1.0), hp, LINEAR,
                              SplitSpec(0.8, seed=5))
        train_m = int(np.floor(ds.m * 0.8))
        counts = [round(nsv * np.floor(train_m * frac) / 100.0)
                  for frac, _, _, nsv in rows]
        assert all(c2 >= c1 for c1, c2 in zip(counts, counts[1:]))

    def test_single_class_fraction_skipped(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(40, 2))
        y = np.array([0] * 39 + [1])
        ds = Dataset(X=X, y=y)
        hp = Hyperparams(p=2.0, C=1.0, seed=3)
        rows = learning_curve(ds, (0.1, 1.0), hp, LINEAR, SplitSpec(0.9, seed=3))
        fracs = [r[0] for r in rows]
        assert 0.1 not in fracs and 1.0 in fracs

    def test_deterministic(self):
        ds = blobs_dataset(seed=7)
        hp = Hyperparams(p=1.5, C=1.0, seed=17)
        spec = SplitSpec(0.6, seed=17)
        assert learning_curve(ds, (0.5, 1.0), hp, LINEAR, spec) == \
            learning_curve(ds, (0.5, 1.0), hp, LINEAR, spec)
