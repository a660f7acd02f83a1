"""Hand-rolled linear one-vs-all SVM with per-sample subgradient descent.

Each class k gets a binary problem (label k -> +1, rest -> -1) minimizing
0.5 * ||w||^2 + C * sum_i max(0, 1 - y_i (w . x_i + b)). Training walks the
samples in a seeded shuffled order each epoch, with learning rate
eta0 / (1 + t * decay) at global step t. All ten classes share the shuffle,
so one pass over the data updates the whole (10, d) weight matrix; the
update sequence per class is identical to training that class alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import N_CLASSES, LabeledSet
from .hog import HogParams, hog_batch

MODEL_FORMAT = "ova-linear-svm"
MODEL_VERSION = 1


@dataclass(frozen=True)
class SvmParams:
    c: float = 1.0
    epochs: int = 20
    eta0: float = 0.1
    decay: float = 1e-3
    shuffle_seed: int = 0

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, got {self.epochs}")
        if self.eta0 <= 0:
            raise ValueError(f"eta0 must be positive, got {self.eta0}")
        if self.decay < 0:
            raise ValueError(f"decay must be non-negative, got {self.decay}")


@dataclass
class LinearModel:
    """weights: (10, d) float64, biases: (10,) float64."""

    weights: np.ndarray
    biases: np.ndarray
    epoch_objectives: np.ndarray | None = None  # (epochs, 10) when recorded

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2 or self.weights.shape[0] != N_CLASSES:
            raise ValueError(f"weights must be ({N_CLASSES}, d), got {self.weights.shape}")
        if self.biases.shape != (N_CLASSES,):
            raise ValueError(f"biases must be ({N_CLASSES},), got {self.biases.shape}")

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[1])


@dataclass
class EvalReport:
    error_percent: float
    confusion: np.ndarray  # (10, 10) int, rows = true label, cols = predicted
    total: int

    def to_dict(self) -> dict:
        return {
            "error_percent": self.error_percent,
            "total": self.total,
            "confusion": self.confusion.tolist(),
        }


def hinge_objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, c: float) -> float:
    """0.5 ||w||^2 + C * sum hinge, for one binary problem (y in {-1, +1})."""
    margins = y * (x @ w + b)
    return float(0.5 * w @ w + c * np.maximum(0.0, 1.0 - margins).sum())


def hinge_subgradient(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, c: float) -> tuple[np.ndarray, float]:
    """Full-batch subgradient of hinge_objective wrt (w, b).

    At a hinge kink (margin exactly 1) the violated branch is taken, matching
    the strict inequality used by the trainer.
    """
    margins = y * (x @ w + b)
    viol = margins < 1.0
    gw = w - c * (y[viol, None] * x[viol]).sum(axis=0)
    gb = -c * float(y[viol].sum())
    return gw, gb


def train_one_vs_all(
    features: np.ndarray,
    labels: np.ndarray,
    params: SvmParams = SvmParams(),
    record_objective: bool = False,
) -> LinearModel:
    """Train the ten binary problems over a shared seeded shuffle per epoch."""
    x = np.ascontiguousarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if x.ndim != 2:
        raise ValueError(f"features must be (n, d), got shape {x.shape}")
    n, d = x.shape
    if n == 0:
        raise ValueError("cannot train on an empty feature matrix")
    if labels.shape != (n,):
        raise ValueError(f"labels must be ({n},), got shape {labels.shape}")
    signed = np.where(labels[None, :] == np.arange(N_CLASSES)[:, None], 1.0, -1.0)

    weights = np.zeros((N_CLASSES, d))
    biases = np.zeros(N_CLASSES)
    history = np.zeros((params.epochs, N_CLASSES)) if record_objective else None
    rng = np.random.default_rng(params.shuffle_seed)
    step = 0
    for epoch in range(params.epochs):
        for i in rng.permutation(n):
            eta = params.eta0 / (1.0 + step * params.decay)
            xi = x[i]
            margins = signed[:, i] * (weights @ xi + biases)
            viol = margins < 1.0
            weights *= 1.0 - eta / n
            if viol.any():
                pull = (eta * params.c) * signed[viol, i]
                weights[viol] += pull[:, None] * xi[None, :]
                biases[viol] += pull
            step += 1
        if history is not None:
            for k in range(N_CLASSES):
                history[epoch, k] = hinge_objective(weights[k], biases[k], x, signed[k], params.c)
    return LinearModel(weights, biases, history)


def decision_scores(model: LinearModel, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[None]
    if features.shape[1] != model.n_features:
        raise ValueError(
            f"feature length {features.shape[1]} does not match model ({model.n_features})"
        )
    return features @ model.weights.T + model.biases


def predict(model: LinearModel, feature: np.ndarray) -> int:
    """Argmax of the ten decision scores; ties go to the lowest class index."""
    return int(np.argmax(decision_scores(model, feature)[0]))


def predict_batch(model: LinearModel, features: np.ndarray) -> np.ndarray:
    return np.argmax(decision_scores(model, features), axis=1)


def evaluate(model: LinearModel, test_set: LabeledSet, hog_params: HogParams = HogParams()) -> EvalReport:
    """Featurize a labeled set and score the model against its labels."""
    if len(test_set) == 0:
        raise ValueError("cannot evaluate on an empty set")
    pred = predict_batch(model, hog_batch(test_set.images, hog_params))
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(confusion, (test_set.labels.astype(np.int64), pred), 1)
    total = len(test_set)
    errors = total - int(np.trace(confusion))
    return EvalReport(100.0 * errors / total, confusion, total)


def save_model(model: LinearModel, path) -> None:
    """Persist weights as JSON; floats round-trip exactly via repr."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "classes": N_CLASSES,
        "n_features": model.n_features,
        "weights": model.weights.tolist(),
        "biases": model.biases.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path) -> LinearModel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a model file: format {doc.get('format')!r}")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    weights = np.array(doc["weights"], dtype=np.float64)
    biases = np.array(doc["biases"], dtype=np.float64)
    if weights.shape != (doc["classes"], doc["n_features"]):
        raise ValueError("model dimensions disagree with declared shape")
    return LinearModel(weights, biases)
