import numpy as np
import pytest

from conftest import two_blobs
from psvm.data import Standardizer
from psvm.dual import Hyperparams
from psvm.exceptions import InvalidInputError, ParseError
from psvm.kernels import Kernel
from psvm.models import (BinaryModel, OvOModel, decision_value, decision_values,
                         fit_multiclass, load_model, predict_binary, predict_multiclass,
                         predict_multiclass_batch, save_model)

LINEAR = Kernel("linear")
HP = Hyperparams(p=2.0, C=1.0)


def stub_model(support, coef, b=0.0, kernel=LINEAR):
    support = np.atleast_2d(np.asarray(support, dtype=float))
    return BinaryModel(support_x=support, coef=np.asarray(coef, dtype=float), b=b,
                       kernel=kernel, hp_used=HP, n_train=max(1, len(coef)))


class TestDecision:
    def test_empty_support_returns_bias(self):
        m = BinaryModel(support_x=np.empty((0, 2)), coef=np.empty(0), b=-0.7,
                        kernel=LINEAR, hp_used=HP, n_train=4)
        assert decision_value(m, np.array([5.0, 5.0])) == -0.7

    def test_lone_gaussian_support_at_itself(self):
        sv = np.array([0.3, -1.0])
        m = stub_model([sv], [1.0], b=0.0, kernel=Kernel("gaussian", sigma=1.0))
        assert decision_value(m, sv) == 1.0

    def test_running_example_decision(self):
        # coefficients alpha_k y_k = (0.4, -0.4) on the two training points
        m = stub_model([[1.0, 0.0], [-1.0, 0.0]], [0.4, -0.4], b=0.0)
        assert decision_value(m, np.array([1.0, 0.0])) == pytest.approx(0.8, abs=1e-15)

    def test_dimension_mismatch(self):
        m = stub_model([[1.0, 0.0]], [1.0])
        with pytest.raises(InvalidInputError):
            decision_value(m, np.array([1.0, 2.0, 3.0]))

    def test_predict_sign_convention(self):
        m = stub_model([[1.0]], [1.0], b=0.0)
        assert predict_binary(m, np.array([0.8])) == 1
        assert predict_binary(m, np.array([-0.3])) == -1
        assert predict_binary(m, np.array([0.0])) == 1  # exact zero maps to +1

    def test_scaling_invariance_of_predictions(self):
        rng = np.random.default_rng(0)
        m = stub_model(rng.normal(size=(4, 3)), rng.normal(size=4), b=0.37)
        lam = 7.3
        scaled = BinaryModel(support_x=m.support_x, coef=lam * m.coef, b=lam * m.b,
                             kernel=m.kernel, hp_used=m.hp_used, n_train=m.n_train)
        for _ in range(50):
            x = rng.normal(size=3)
            assert predict_binary(m, x) == predict_binary(scaled, x)


class TestOvO:
    def three_class_data(self, rng):
        X = np.vstack([rng.normal((0, 0), 0.4, (15, 2)), rng.normal((4, 0), 0.4, (15, 2)),
                       rng.normal((0, 4), 0.4, (15, 2))])
        labels = np.array([0] * 15 + [1] * 15 + [2] * 15)
        return X, labels

    def test_pair_count_and_tags(self):
        rng = np.random.default_rng(1)
        X, labels = self.three_class_data(rng)
        model = fit_multiclass(X, labels, HP, LINEAR)
        assert model.classes == (0, 1, 2)
        assert [(a, b) for a, b, _ in model.pairs] == [(0, 1), (0, 2), (1, 2)]
        four = fit_multiclass(np.vstack([X, rng.normal((4, 4), 0.4, (15, 2))]),
                              np.concatenate([labels, np.full(15, 3)]), HP, LINEAR)
        assert len(four.pairs) == 6  # k(k-1)/2 for k = 4

    def test_two_class_votes_match_binary_path(self):
        rng = np.random.default_rng(2)
        X, y = two_blobs(rng, n_per=15)
        model = fit_multiclass(X, y.astype(int), HP, LINEAR)
        assert len(model.pairs) == 1
        ca, cb, bm = model.pairs[0]
        for x in rng.normal(scale=2.0, size=(40, 2)):
            expected = ca if predict_binary(bm, x) == 1 else cb
            assert predict_multiclass(model, x) == expected

    def test_unanimous_vote(self):
        rng = np.random.default_rng(3)
        X, labels = self.three_class_data(rng)
        model = fit_multiclass(X, labels, HP, LINEAR)
        centers = {0: [0, 0], 1: [4, 0], 2: [0, 4]}
        for c, center in centers.items():
            assert predict_multiclass(model, np.array(center, dtype=float)) == c

    def test_cyclic_votes_break_by_margin_sum(self):
        # a beats b (|d| = 0.9), b beats c (0.5), c beats a (0.1): a wins
        def const_model(value):
            # empty support set: the decision is the constant bias
            return stub_model(np.empty((0, 2)), [], b=value)

        pairs = (("a", "b", const_model(0.9)),   # votes a
                 ("b", "c", const_model(0.5)),   # votes b
                 ("a", "c", const_model(-0.1)))  # votes c
        model = OvOModel(classes=("a", "b", "c"), pairs=pairs)
        assert predict_multiclass(model, np.zeros(2)) == "a"

    def test_full_tie_breaks_by_class_order(self):
        pairs = (("a", "b", stub_model(np.empty((0, 2)), [], b=0.5)),
                 ("b", "c", stub_model(np.empty((0, 2)), [], b=0.5)),
                 ("a", "c", stub_model(np.empty((0, 2)), [], b=-0.5)))
        model = OvOModel(classes=("a", "b", "c"), pairs=pairs)
        # one vote each with equal margins: lowest class in order wins
        assert predict_multiclass(model, np.zeros(2)) == "a"

    def test_rejects_single_class(self):
        with pytest.raises(InvalidInputError):
            fit_multiclass(np.eye(3), np.zeros(3, dtype=int), HP, LINEAR)

    def test_parallel_fit_matches_serial(self):
        rng = np.random.default_rng(4)
        X, labels = self.three_class_data(rng)
        serial = fit_multiclass(X, labels, HP, LINEAR, n_jobs=1)
        parallel = fit_multiclass(X, labels, HP, LINEAR, n_jobs=2)
        for (_, _, b1), (_, _, b2) in zip(serial.pairs, parallel.pairs):
            assert np.array_equal(b1.coef, b2.coef)
            assert np.array_equal(b1.support_x, b2.support_x)
            assert b1.b == b2.b


class TestSerialization:
    def roundtrip(self, model, tmp_path):
        path = tmp_path / "model.psvm"
        save_model(model, path)
        return load_model(path), path

    def test_roundtrip_bit_identical_decisions(self, tmp_path):
        rng = np.random.default_rng(5)
        X = np.vstack([rng.normal((0, 0, 0), 0.5, (20, 3)), rng.normal((3, 1, 0), 0.5, (20, 3)),
                       rng.normal((0, 3, 1), 0.5, (20, 3))])
        labels = np.array([5] * 20 + [7] * 20 + [9] * 20)
        st = Standardizer.fit(X)
        model = fit_multiclass(st.apply(X), labels, Hyperparams(p=1.5, C=0.5),
                               Kernel("gaussian", sigma=1.7), standardizer=st)
        loaded, path = self.roundtrip(model, tmp_path)
        assert loaded.classes == model.classes
        grid = rng.normal(size=(30, 3))
        for (_, _, b1), (_, _, b2) in zip(model.pairs, loaded.pairs):
            assert np.array_equal(decision_values(b1, grid), decision_values(b2, grid))
        assert np.array_equal(loaded.standardizer.mean, st.mean)
        assert np.array_equal(loaded.standardizer.scale, st.scale)
        assert predict_multiclass_batch(loaded, grid) == predict_multiclass_batch(model, grid)
        # version tag leads the file
        assert path.read_text().splitlines()[0] == "psvm-model/1"

    def test_hp_provenance_round_trips(self, tmp_path):
        rng = np.random.default_rng(6)
        X, y = two_blobs(rng, n_per=10)
        hp = Hyperparams(p=1.5, C=0.25, eps=1e-6, seed=99)
        model = fit_multiclass(X, y.astype(int), hp, LINEAR)
        loaded, _ = self.roundtrip(model, tmp_path)
        got = loaded.pairs[0][2].hp_used
        assert (got.p, got.C, got.eps, got.seed) == (1.5, 0.25, 1e-6, 99)
        assert loaded.pairs[0][2].n_train == model.pairs[0][2].n_train

    def test_bad_files_rejected(self, tmp_path):
        bad = tmp_path / "bad.psvm"
        bad.write_text("not-a-model/9\n")
        with pytest.raises(ParseError):
            load_model(bad)
        truncated = tmp_path / "trunc.psvm"
        truncated.write_text("psvm-model/1\nkernel\tlinear\n")
        with pytest.raises(ParseError):
            load_model(truncated)

    def test_precomputed_models_not_serializable(self, tmp_path):
        K = np.eye(2)
        bm = BinaryModel(support_x=np.eye(2), coef=np.array([1.0, -1.0]), b=0.0,
                         kernel=Kernel("precomputed", matrix=K), hp_used=HP, n_train=2)
        model = OvOModel(classes=(-1, 1), pairs=((-1, 1, bm),))
        with pytest.raises(InvalidInputError):
            save_model(model, tmp_path / "x.psvm")
