"""Confidence models: map a candidate's score vector to one probability.

The default learner is L2-regularized logistic regression trained by
full-batch gradient descent from zero weights (the loss is convex, so
initialization is immaterial and training is fully deterministic). A
Gaussian naive Bayes learner is kept as a comparative baseline. Learners
are pluggable by name so new ones can be registered without touching the
pipeline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scoring import ScoreVector, layout_hash

MODEL_FORMAT = "titleqa-model"
MODEL_VERSION = 1


@dataclass
class TrainingConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 1e-4
    pos_weight: float | None = None  # None: balance classes as #neg/#pos
    seed: int = 0

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.l2 < 0:
            raise ValueError("L2 strength must be >= 0")


@dataclass
class FeatureMatrix:
    rows: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,) of 0/1
    layout: tuple[str, ...]

    def __post_init__(self) -> None:
        self.rows = np.asarray(self.rows, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.rows.ndim != 2 or self.rows.shape[0] != self.labels.shape[0]:
            raise ValueError("rows and labels must have matching first dimension")
        if self.rows.shape[1] != len(self.layout):
            raise ValueError("row width must equal layout length")
        if not np.isfinite(self.rows).all():
            raise ValueError("feature matrix contains non-finite values")
        if not np.isin(self.labels, (0.0, 1.0)).all():
            raise ValueError("labels must be 0 or 1")

    @property
    def layout_hash(self) -> str:
        return layout_hash(self.layout)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def logistic_loss_grad(params: np.ndarray, rows: np.ndarray, labels: np.ndarray,
                       sample_weights: np.ndarray, l2: float) -> tuple[float, np.ndarray]:
    """Class-weighted cross-entropy plus L2 on the weights (not the bias).

    ``params`` stacks the weight vector and a trailing bias. Exposed
    separately so the analytic gradient can be checked against finite
    differences.
    """
    w = params[:-1]
    b = params[-1]
    z = rows @ w + b
    p = _sigmoid(z)
    eps = 1e-12
    n = rows.shape[0]
    loss = -np.sum(sample_weights * (labels * np.log(p + eps)
                                     + (1.0 - labels) * np.log(1.0 - p + eps))) / n
    loss += 0.5 * l2 * float(w @ w)
    residual = sample_weights * (p - labels)
    grad_w = rows.T @ residual / n + l2 * w
    grad_b = np.sum(residual) / n
    return float(loss), np.concatenate([grad_w, [grad_b]])


class LogisticModel:
    """Standardizing logistic regression scorer tied to a frozen layout."""

    learner_name = "logistic"

    def __init__(self, weights: np.ndarray, bias: float, means: np.ndarray,
                 stdevs: np.ndarray, layout: tuple[str, ...],
                 training: dict | None = None):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = float(bias)
        self.means = np.asarray(means, dtype=np.float64)
        self.stdevs = np.asarray(stdevs, dtype=np.float64)
        self.layout = tuple(layout)
        self.layout_hash = layout_hash(self.layout)
        self.training = training or {}

    def predict(self, vector: ScoreVector) -> float:
        if layout_hash(vector.layout) != self.layout_hash:
            raise ValueError("score vector layout does not match the model's layout")
        x = (np.asarray(vector.values, dtype=np.float64) - self.means) / self.stdevs
        return float(_sigmoid(np.array([x @ self.weights + self.bias]))[0])

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "learner": self.learner_name,
            "layout": list(self.layout),
            "layout_hash": self.layout_hash,
            "means": self.means.tolist(),
            "stdevs": self.stdevs.tolist(),
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "training": self.training,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "LogisticModel":
        return cls(
            weights=np.array(raw["weights"]),
            bias=raw["bias"],
            means=np.array(raw["means"]),
            stdevs=np.array(raw["stdevs"]),
            layout=tuple(raw["layout"]),
            training=raw.get("training", {}),
        )


def _check_two_classes(labels: np.ndarray) -> None:
    positives = int(labels.sum())
    if positives == 0 or positives == len(labels):
        raise ValueError("training needs at least one positive and one negative label")


def train_logistic(matrix: FeatureMatrix, cfg: TrainingConfig | None = None) -> LogisticModel:
    """Deterministic full-batch gradient descent on standardized columns."""
    cfg = cfg or TrainingConfig()
    cfg.validate()
    _check_two_classes(matrix.labels)

    means = matrix.rows.mean(axis=0)
    stdevs = matrix.rows.std(axis=0)
    stdevs[stdevs == 0.0] = 1.0  # constant columns standardize to zero
    standardized = (matrix.rows - means) / stdevs

    positives = float(matrix.labels.sum())
    negatives = float(len(matrix.labels) - positives)
    pos_weight = cfg.pos_weight if cfg.pos_weight is not None else negatives / positives
    sample_weights = np.where(matrix.labels == 1.0, pos_weight, 1.0)

    params = np.zeros(matrix.rows.shape[1] + 1, dtype=np.float64)
    for _ in range(cfg.epochs):
        _, grad = logistic_loss_grad(params, standardized, matrix.labels,
                                     sample_weights, cfg.l2)
        params -= cfg.learning_rate * grad

    training = {
        "learning_rate": cfg.learning_rate,
        "epochs": cfg.epochs,
        "l2": cfg.l2,
        "pos_weight": pos_weight,
        "seed": cfg.seed,
        "rows": int(matrix.rows.shape[0]),
        "positives": int(positives),
    }
    return LogisticModel(params[:-1], params[-1], means, stdevs, matrix.layout, training)


def predict_confidence(model, vector: ScoreVector) -> float:
    return model.predict(vector)


class NaiveBayesModel:
    """Per-class Gaussian likelihoods with a variance floor."""

    learner_name = "naive_bayes"
    VAR_FLOOR = 1e-9

    def __init__(self, priors: np.ndarray, means: np.ndarray, variances: np.ndarray,
                 layout: tuple[str, ...], training: dict | None = None):
        self.priors = np.asarray(priors, dtype=np.float64)  # (2,)
        self.means = np.asarray(means, dtype=np.float64)  # (2, d)
        self.variances = np.asarray(variances, dtype=np.float64)  # (2, d)
        self.layout = tuple(layout)
        self.layout_hash = layout_hash(self.layout)
        self.training = training or {}

    def predict(self, vector: ScoreVector) -> float:
        if layout_hash(vector.layout) != self.layout_hash:
            raise ValueError("score vector layout does not match the model's layout")
        x = np.asarray(vector.values, dtype=np.float64)
        log_post = np.log(self.priors).copy()
        for cls in (0, 1):
            var = self.variances[cls]
            log_post[cls] += float(
                -0.5 * np.sum(np.log(2.0 * np.pi * var) + (x - self.means[cls]) ** 2 / var)
            )
        shift = log_post.max()
        probs = np.exp(log_post - shift)
        return float(probs[1] / probs.sum())

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "learner": self.learner_name,
            "layout": list(self.layout),
            "layout_hash": self.layout_hash,
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "training": self.training,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "NaiveBayesModel":
        return cls(
            priors=np.array(raw["priors"]),
            means=np.array(raw["means"]),
            variances=np.array(raw["variances"]),
            layout=tuple(raw["layout"]),
            training=raw.get("training", {}),
        )


def train_naive_bayes(matrix: FeatureMatrix,
                      cfg: TrainingConfig | None = None) -> NaiveBayesModel:
    _check_two_classes(matrix.labels)
    labels = matrix.labels
    priors = np.array([np.mean(labels == 0.0), np.mean(labels == 1.0)])
    means = np.stack([matrix.rows[labels == c].mean(axis=0) for c in (0.0, 1.0)])
    variances = np.stack([matrix.rows[labels == c].var(axis=0) for c in (0.0, 1.0)])
    variances = np.maximum(variances, NaiveBayesModel.VAR_FLOOR)
    training = {"rows": int(matrix.rows.shape[0]), "positives": int(labels.sum())}
    return NaiveBayesModel(priors, means, variances, matrix.layout, training)


LEARNERS = {
    "logistic": train_logistic,
    "naive_bayes": train_naive_bayes,
}

_MODEL_CLASSES = {
    "logistic": LogisticModel,
    "naive_bayes": NaiveBayesModel,
}


def train_model(name: str, matrix: FeatureMatrix, cfg: TrainingConfig | None = None):
    try:
        trainer = LEARNERS[name]
    except KeyError:
        raise ValueError(f"unknown learner {name!r}; registered: {sorted(LEARNERS)}") from None
    return trainer(matrix, cfg)


def save_model(model, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), sort_keys=True, indent=1),
                          encoding="utf-8")


def load_model(path: str | Path):
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if raw.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    try:
        model_cls = _MODEL_CLASSES[raw["learner"]]
    except KeyError:
        raise ValueError(f"{path}: unknown learner {raw.get('learner')!r}") from None
    return model_cls.from_dict(raw)


def rank_candidates(candidates: list, model) -> list:
    """Sort by confidence descending, alphabetical answer on ties, and
    assign 1-based final ranks. A None model yields uniform 0.5."""
    for cand in candidates:
        cand.confidence = 0.5 if model is None else model.predict(cand.score_vector)
    ordered = sorted(candidates, key=lambda c: (-c.confidence, c.answer_text))
    for rank, cand in enumerate(ordered, start=1):
        cand.final_rank = rank
    return ordered
