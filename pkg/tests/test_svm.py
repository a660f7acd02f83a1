import numpy as np
import pytest

from crossynth.dataset import LabeledSet
from crossynth.svm import (
    EvalReport,
    LinearModel,
    SvmParams,
    decision_scores,
    evaluate,
    hinge_objective,
    hinge_subgradient,
    load_model,
    predict,
    predict_batch,
    save_model,
    train_one_vs_all,
)

from synthetic_corpus import make_corpus


def toy_problem(n=10, d=6, seed=11):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    w = rng.normal(size=d)
    b = float(rng.normal())
    return x, y, w, b


class TestObjective:
    def test_zero_weights_objective_is_c_times_n(self):
        x, y, _, _ = toy_problem()
        w = np.zeros(x.shape[1])
        # every margin is 0 < 1, each hinge contributes exactly 1
        assert hinge_objective(w, 0.0, x, y, c=2.5) == pytest.approx(2.5 * len(x))

    def test_separating_plane_with_margin_has_only_norm_term(self):
        x = np.array([[2.0, 0.0], [-2.0, 0.0]])
        y = np.array([1.0, -1.0])
        w = np.array([1.0, 0.0])
        assert hinge_objective(w, 0.0, x, y, c=3.0) == pytest.approx(0.5)

    def test_subgradient_matches_finite_differences(self):
        # smooth point check: no margin sits near the hinge kink, so central
        # differences of the objective converge to the subgradient
        x, y, w, b = toy_problem(n=10, d=6, seed=11)
        margins = y * (x @ w + b)
        assert np.abs(margins - 1.0).min() > 1e-3
        gw, gb = hinge_subgradient(w, b, x, y, c=1.7)
        eps = 1e-6

        def obj(wv, bv):
            return hinge_objective(wv, bv, x, y, c=1.7)

        for j in range(len(w)):
            e = np.zeros_like(w)
            e[j] = eps
            fd = (obj(w + e, b) - obj(w - e, b)) / (2 * eps)
            assert abs(fd - gw[j]) <= 1e-4 * max(1.0, abs(fd))
        fd_b = (obj(w, b + eps) - obj(w, b - eps)) / (2 * eps)
        assert abs(fd_b - gb) <= 1e-4 * max(1.0, abs(fd_b))


@pytest.fixture(scope="module")
def trained_toy():
    """Small separable 10-class problem: class k clusters at 4 * e_k."""
    rng = np.random.default_rng(0)
    n_per = 12
    centers = np.eye(10) * 4.0
    x = np.concatenate([centers[k] + 0.3 * rng.normal(size=(n_per, 10)) for k in range(10)])
    y = np.repeat(np.arange(10), n_per).astype(np.uint8)
    model = train_one_vs_all(x, y, SvmParams(epochs=30), record_objective=True)
    return x, y, model


class TestTraining:
    def test_learns_a_separable_problem(self, trained_toy):
        x, y, model = trained_toy
        assert (predict_batch(model, x) == y).mean() == 1.0

    def test_objective_decreases_overall(self, trained_toy):
        _, _, model = trained_toy
        hist = model.epoch_objectives
        assert hist is not None and hist.shape == (30, 10)
        assert (hist[-1] < hist[0]).all()

    def test_deterministic_per_shuffle_seed(self):
        x, y, _ = np.random.default_rng(3).normal(size=(20, 5)), None, None
        labels = np.arange(20) % 10
        a = train_one_vs_all(x, labels, SvmParams(epochs=3, shuffle_seed=7))
        b = train_one_vs_all(x, labels, SvmParams(epochs=3, shuffle_seed=7))
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.biases, b.biases)
        c = train_one_vs_all(x, labels, SvmParams(epochs=3, shuffle_seed=8))
        assert not np.array_equal(a.weights, c.weights)

    def test_input_validation(self):
        with pytest.raises(ValueError, match="empty"):
            train_one_vs_all(np.zeros((0, 4)), np.zeros(0, dtype=np.uint8))
        with pytest.raises(ValueError, match="labels"):
            train_one_vs_all(np.zeros((4, 2)), np.zeros(3, dtype=np.uint8))
        with pytest.raises(ValueError, match="positive"):
            SvmParams(c=0.0)

    def test_shared_shuffle_matches_single_class_run(self):
        # training all classes together must replay the exact update sequence
        # of any one binary problem trained alone under the same seed
        rng = np.random.default_rng(9)
        x = rng.normal(size=(15, 4))
        labels = rng.integers(0, 10, size=15).astype(np.uint8)
        params = SvmParams(epochs=2, shuffle_seed=5)
        model = train_one_vs_all(x, labels, params)

        k = 3
        y = np.where(labels == k, 1.0, -1.0)
        w = np.zeros(4)
        b = 0.0
        shuffle = np.random.default_rng(params.shuffle_seed)
        step = 0
        n = len(x)
        for _ in range(params.epochs):
            for i in shuffle.permutation(n):
                eta = params.eta0 / (1.0 + step * params.decay)
                if y[i] * (x[i] @ w + b) < 1.0:
                    w = w * (1.0 - eta / n) + eta * params.c * y[i] * x[i]
                    b = b + eta * params.c * y[i]
                else:
                    w = w * (1.0 - eta / n)
                step += 1
        assert np.allclose(model.weights[k], w, atol=1e-12)
        assert model.biases[k] == pytest.approx(b, abs=1e-12)


class TestPredict:
    def test_tie_goes_to_lowest_index(self):
        model = LinearModel(np.zeros((10, 3)), np.zeros(10))
        assert predict(model, np.array([1.0, 2.0, 3.0])) == 0

    def test_scores_shape_and_mismatch(self, trained_toy):
        x, _, model = trained_toy
        assert decision_scores(model, x).shape == (len(x), 10)
        with pytest.raises(ValueError, match="does not match"):
            decision_scores(model, np.zeros(7))

    def test_bias_shifts_decision(self):
        biases = np.zeros(10)
        biases[4] = 1.0
        model = LinearModel(np.zeros((10, 2)), biases)
        assert predict(model, np.zeros(2)) == 4


class TestEvaluate:
    def test_confusion_and_error_math(self):
        imgs, labels = make_corpus(30, rng_seed=12)
        test_set = LabeledSet(imgs, labels, provenance="glyphs")
        feats_dim = 1296
        rng = np.random.default_rng(1)
        model = LinearModel(rng.normal(size=(10, feats_dim)), np.zeros(10))
        report = evaluate(model, test_set)
        assert report.total == 30
        assert report.confusion.sum() == 30
        correct = int(np.trace(report.confusion))
        assert report.error_percent == pytest.approx(100.0 * (30 - correct) / 30)
        for k in range(10):
            assert report.confusion[k].sum() == int((labels == k).sum())

    def test_empty_set_rejected(self):
        model = LinearModel(np.zeros((10, 1296)), np.zeros(10))
        empty = LabeledSet(np.zeros((0, 28, 28), dtype=np.uint8), np.zeros(0, dtype=np.uint8))
        with pytest.raises(ValueError, match="empty"):
            evaluate(model, empty)

    def test_report_to_dict_is_json_friendly(self):
        report = EvalReport(12.5, np.eye(10, dtype=np.int64), 8)
        doc = report.to_dict()
        assert doc["error_percent"] == 12.5
        assert doc["total"] == 8
        assert doc["confusion"][0][0] == 1


class TestPersistence:
    def test_round_trip_is_exact(self, tmp_path, trained_toy):
        _, _, model = trained_toy
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert np.array_equal(loaded.weights, model.weights)
        assert np.array_equal(loaded.biases, model.biases)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="model file"):
            load_model(tmp_path / "nope.json")

    def test_wrong_format_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "something-else", "version": 1}\n')
        with pytest.raises(ValueError, match="not a model file"):
            load_model(path)

    def test_wrong_version_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "ova-linear-svm", "version": 99}\n')
        with pytest.raises(ValueError, match="version"):
            load_model(path)
