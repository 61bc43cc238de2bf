import numpy as np
import pytest

from titleqa.pipeline import CandidateAnswer
from titleqa.ranker import (
    FeatureMatrix,
    LogisticModel,
    TrainingConfig,
    load_model,
    logistic_loss_grad,
    predict_confidence,
    rank_candidates,
    save_model,
    train_logistic,
    train_model,
    train_naive_bayes,
)
from titleqa.scoring import ScoreVector


def toy_matrix(copies=20):
    rows = [[-1.0]] * copies + [[1.0]] * copies
    labels = [0.0] * copies + [1.0] * copies
    return FeatureMatrix(rows=np.array(rows), labels=np.array(labels), layout=("x",))


def vector(layout, values):
    return ScoreVector(values=tuple(values), layout=tuple(layout))


class TestLogistic:
    def test_separable_toy_reaches_full_accuracy(self):
        matrix = toy_matrix()
        model = train_logistic(matrix, TrainingConfig())
        preds = [model.predict(vector(("x",), (row[0],))) for row in matrix.rows]
        correct = [
            (p >= 0.5) == bool(label) for p, label in zip(preds, matrix.labels)
        ]
        assert all(correct)

    def test_zero_weight_model_predicts_half(self):
        model = LogisticModel(weights=np.zeros(3), bias=0.0, means=np.zeros(3),
                              stdevs=np.ones(3), layout=("a", "b", "c"))
        for values in ((0.0, 0.0, 0.0), (5.0, -2.0, 100.0)):
            assert model.predict(vector(("a", "b", "c"), values)) == 0.5

    def test_negating_parameters_flips_confidence(self):
        matrix = toy_matrix()
        model = train_logistic(matrix)
        flipped = LogisticModel(weights=-model.weights, bias=-model.bias,
                                means=model.means, stdevs=model.stdevs,
                                layout=model.layout)
        for x in (-2.0, 0.3, 1.7):
            v = vector(("x",), (x,))
            assert flipped.predict(v) == pytest.approx(1.0 - model.predict(v), abs=1e-12)

    def test_monotone_in_positive_weight_dimension(self):
        matrix = toy_matrix()
        model = train_logistic(matrix)
        assert model.weights[0] > 0
        values = [model.predict(vector(("x",), (x,))) for x in np.linspace(-3, 3, 21)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        rows = rng.normal(size=(20, 12))
        labels = rng.integers(0, 2, size=20).astype(float)
        labels[0], labels[1] = 0.0, 1.0
        weights = np.where(labels == 1.0, 2.0, 1.0)
        params = rng.normal(size=13) * 0.5
        _, grad = logistic_loss_grad(params, rows, labels, weights, l2=1e-3)
        h = 1e-5
        worst = 0.0
        for i in range(len(params)):
            bump = np.zeros_like(params)
            bump[i] = h
            lo, _ = logistic_loss_grad(params - bump, rows, labels, weights, 1e-3)
            hi, _ = logistic_loss_grad(params + bump, rows, labels, weights, 1e-3)
            numeric = (hi - lo) / (2 * h)
            worst = max(worst, abs(numeric - grad[i]) / max(1e-8, abs(numeric)))
        assert worst < 1e-4

    def test_training_is_bit_deterministic(self):
        matrix = toy_matrix()
        a = train_logistic(matrix, TrainingConfig())
        b = train_logistic(matrix, TrainingConfig())
        assert np.array_equal(a.weights, b.weights)
        assert a.bias == b.bias

    def test_column_rescaling_invariance(self):
        rng = np.random.default_rng(7)
        rows = rng.normal(size=(40, 4))
        labels = (rows[:, 0] + 0.2 * rng.normal(size=40) > 0).astype(float)
        layout = ("a", "b", "c", "d")
        base = train_logistic(FeatureMatrix(rows, labels, layout))
        scaled_rows = rows.copy()
        scaled_rows[:, 2] = 13.0 * scaled_rows[:, 2] + 5.0
        scaled = train_logistic(FeatureMatrix(scaled_rows, labels, layout))
        for i in range(10):
            v = vector(layout, rows[i])
            sv = vector(layout, scaled_rows[i])
            assert scaled.predict(sv) == pytest.approx(base.predict(v), abs=1e-9)

    def test_constant_column_gets_zero_weight(self):
        rows = np.array([[-1.0, 7.0], [1.0, 7.0], [-1.0, 7.0], [1.0, 7.0]])
        labels = np.array([0.0, 1.0, 0.0, 1.0])
        model = train_logistic(FeatureMatrix(rows, labels, ("x", "k")))
        assert model.weights[1] == 0.0
        assert model.stdevs[1] == 1.0

    def test_single_class_rejected(self):
        rows = np.ones((4, 2))
        with pytest.raises(ValueError):
            train_logistic(FeatureMatrix(rows, np.ones(4), ("a", "b")))

    def test_non_finite_features_rejected(self):
        rows = np.array([[1.0], [np.nan]])
        with pytest.raises(ValueError):
            FeatureMatrix(rows, np.array([0.0, 1.0]), ("a",))

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            TrainingConfig(epochs=0).validate()
        with pytest.raises(ValueError):
            TrainingConfig(learning_rate=0.0).validate()
        with pytest.raises(ValueError):
            TrainingConfig(l2=-1.0).validate()

    def test_layout_mismatch_rejected(self):
        model = train_logistic(toy_matrix())
        with pytest.raises(ValueError):
            model.predict(vector(("x", "y"), (1.0, 2.0)))

    def test_predict_confidence_helper(self):
        model = train_logistic(toy_matrix())
        v = vector(("x",), (1.0,))
        assert predict_confidence(model, v) == model.predict(v)


class TestNaiveBayes:
    def test_identical_class_conditionals_give_prior(self):
        rows = np.array([[1.0, 2.0], [3.0, 4.0]] * 6)
        labels = np.array([0.0, 0.0, 1.0, 1.0] * 3)
        model = train_naive_bayes(FeatureMatrix(rows, labels, ("a", "b")))
        post = model.predict(vector(("a", "b"), (2.0, 3.0)))
        assert post == pytest.approx(0.5, abs=1e-9)  # priors are equal here

    def test_separable_toy_reaches_full_accuracy(self):
        matrix = toy_matrix()
        model = train_naive_bayes(matrix)
        preds = [model.predict(vector(("x",), (row[0],))) for row in matrix.rows]
        assert all((p >= 0.5) == bool(label)
                   for p, label in zip(preds, matrix.labels))

    def test_constant_column_no_crash(self):
        rows = np.array([[-1.0, 7.0], [1.0, 7.0]] * 5)
        labels = np.array([0.0, 1.0] * 5)
        model = train_naive_bayes(FeatureMatrix(rows, labels, ("x", "k")))
        p = model.predict(vector(("x", "k"), (0.5, 7.0)))
        assert 0.0 <= p <= 1.0

    def test_single_class_rejected(self):
        rows = np.ones((4, 1))
        with pytest.raises(ValueError):
            train_naive_bayes(FeatureMatrix(rows, np.zeros(4), ("a",)))


class TestRegistry:
    def test_learners_by_name(self):
        matrix = toy_matrix()
        logistic = train_model("logistic", matrix, TrainingConfig())
        bayes = train_model("naive_bayes", matrix)
        assert logistic.learner_name == "logistic"
        assert bayes.learner_name == "naive_bayes"

    def test_unknown_learner(self):
        with pytest.raises(ValueError, match="unknown learner"):
            train_model("perceptron", toy_matrix())


class TestPersistence:
    @pytest.mark.parametrize("trainer", [train_logistic, train_naive_bayes])
    def test_round_trip_preserves_predictions(self, tmp_path, trainer):
        matrix = toy_matrix()
        model = trainer(matrix)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        for x in (-1.5, 0.0, 2.5):
            v = vector(("x",), (x,))
            assert loaded.predict(v) == pytest.approx(model.predict(v), abs=1e-15)

    def test_wrong_format_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"format": "other"}', encoding="utf-8")
        with pytest.raises(ValueError):
            load_model(path)


class _TableModel:
    def __init__(self, table, shift=0.0):
        self.table = table
        self.shift = shift

    def predict(self, vec):
        return self.table[vec.values[0]] + self.shift


class TestRankCandidates:
    def make(self, answers):
        return [
            CandidateAnswer(answer_text=a,
                            score_vector=vector(("id",), (float(i),)))
            for i, a in enumerate(answers)
        ]

    def test_sort_by_confidence(self):
        cands = self.make(["alpha", "beta", "gamma"])
        model = _TableModel({0.0: 0.9, 1.0: 0.1, 2.0: 0.5})
        ranked = rank_candidates(cands, model)
        assert [c.answer_text for c in ranked] == ["alpha", "gamma", "beta"]
        assert [c.final_rank for c in ranked] == [1, 2, 3]

    def test_equal_confidence_alphabetical(self):
        cands = self.make(["pear", "apple", "quince"])
        ranked = rank_candidates(cands, None)
        assert [c.answer_text for c in ranked] == ["apple", "pear", "quince"]

    def test_empty_list(self):
        assert rank_candidates([], None) == []

    def test_constant_confidence_shift_preserves_order(self):
        table = {0.0: 0.4, 1.0: 0.1, 2.0: 0.3}
        base = rank_candidates(self.make(["a", "b", "c"]), _TableModel(table))
        shifted = rank_candidates(self.make(["a", "b", "c"]),
                                  _TableModel(table, shift=0.2))
        assert [c.answer_text for c in base] == [c.answer_text for c in shifted]
