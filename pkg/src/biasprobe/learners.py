"""Reference learners with known, contrasting inductive biases.

Four learners exercise the harness end to end:

* ``oracle_linguistic`` / ``oracle_surface`` read the stamped labels and
  bracket the achievable bias-score range at exactly +1 / -1.
* ``bow_logistic`` is a text-only bag-of-tokens logistic regression; by
  construction it latches onto surface cues and lands near -1.
* ``dual_feature_meta`` sees exactly two inputs, the surface checker's
  output and the gold linguistic value, and demonstrates the inoculation
  transition mechanically.  The ``_meta`` suffix marks it as
  metadata-consuming so reports cannot confuse it with text-only learners.

Training is full-batch gradient descent with fixed hyperparameters, so
every run is bit-reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .features import check_surface, task_features, tokenize
from .metrics import Prediction

LEARNER_IDS = (
    "oracle_linguistic",
    "oracle_surface",
    "bow_logistic",
    "dual_feature_meta",
)

MODEL_FORMAT = "linear-model/1"


class LearnerError(ValueError):
    """Raised for unknown learners or records missing required metadata."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    l2: float = 1e-4
    grad_tol: float = 1e-3

    def to_dict(self):
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "l2": self.l2,
            "grad_tol": self.grad_tol,
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(**payload)


def sigmoid(z):
    z = np.clip(z, -60.0, 60.0)
    return 1.0 / (1.0 + np.exp(-z))


def logistic_loss_and_grad(X, y, weights, bias, l2, fit_bias=True):
    """Mean cross-entropy with L2 on the weights (bias unregularized)."""
    z = X @ weights + bias
    p = sigmoid(z)
    eps = 1e-12
    loss = -np.mean(y * np.log(p + eps) + (1.0 - y) * np.log(1.0 - p + eps))
    loss += 0.5 * l2 * float(weights @ weights)
    residual = (p - y) / len(y)
    grad_w = X.T @ residual + l2 * weights
    grad_b = float(np.sum(residual)) if fit_bias else 0.0
    return loss, grad_w, grad_b


def _fit(X, y, config, fit_bias=True):
    """Zero-initialized full-batch gradient descent; returns diagnostics too."""
    weights = np.zeros(X.shape[1], dtype=np.float64)
    bias = 0.0
    loss = grad_norm = 0.0
    for _ in range(config.epochs):
        loss, grad_w, grad_b = logistic_loss_and_grad(
            X, y, weights, bias, config.l2, fit_bias=fit_bias)
        weights -= config.learning_rate * grad_w
        if fit_bias:
            bias -= config.learning_rate * grad_b
    loss, grad_w, grad_b = logistic_loss_and_grad(
        X, y, weights, bias, config.l2, fit_bias=fit_bias)
    grad_norm = float(math.sqrt(float(grad_w @ grad_w) + grad_b * grad_b))
    diagnostics = {
        "final_loss": float(loss),
        "grad_norm": grad_norm,
        "converged": grad_norm <= config.grad_tol,
        "epochs_run": config.epochs,
    }
    return weights, bias, diagnostics


# --- featurizers -----------------------------------------------------------

def _caps_fraction_flag(tokens):
    if not tokens:
        return 0.0
    capitalized = sum(1 for tok in tokens if tok[:1].isupper())
    return 1.0 if capitalized / len(tokens) > 0.5 else 0.0


def bow_state(records):
    """Vocabulary state from training records only (no test leakage)."""
    unigrams = set()
    first_tokens = set()
    counts = set()
    for record in records:
        tokens = tokenize(record.text)
        unigrams.update(tok.lower() for tok in tokens)
        if tokens:
            first_tokens.add(tokens[0].lower())
        counts.add(len(tokens))
    return {
        "unigrams": sorted(unigrams),
        "first_tokens": sorted(first_tokens),
        "counts": sorted(counts),
    }


def bow_feature_names(state):
    names = [f"has:{tok}" for tok in state["unigrams"]]
    names += [f"first:{tok}" for tok in state["first_tokens"]]
    names += [f"len:{count}" for count in state["counts"]]
    names.append("mostly_capitalized")
    return tuple(names)


def bow_featurize(state, records):
    unigram_index = {tok: i for i, tok in enumerate(state["unigrams"])}
    first_index = {tok: i for i, tok in enumerate(state["first_tokens"])}
    count_index = {c: i for i, c in enumerate(state["counts"])}
    n_unigram = len(unigram_index)
    n_first = len(first_index)
    n_count = len(count_index)
    width = n_unigram + n_first + n_count + 1
    X = np.zeros((len(records), width), dtype=np.float64)
    for row, record in enumerate(records):
        tokens = tokenize(record.text)
        for tok in tokens:
            idx = unigram_index.get(tok.lower())
            if idx is not None:
                X[row, idx] = 1.0
        if tokens:
            idx = first_index.get(tokens[0].lower())
            if idx is not None:
                X[row, n_unigram + idx] = 1.0
        idx = count_index.get(len(tokens))
        if idx is not None:
            X[row, n_unigram + n_first + idx] = 1.0
        X[row, width - 1] = _caps_fraction_flag(tokens)
    return X


def dual_state(task_id, length_threshold=None):
    linguistic, surface = task_features(task_id)
    return {
        "linguistic_feature": linguistic,
        "surface_feature": surface,
        "length_threshold": length_threshold,
    }


DUAL_FEATURE_NAMES = ("surface_check", "linguistic_value")


def dual_featurize(state, records):
    """Two centered inputs; a missing axis (control tasks) contributes 0."""
    surface = state["surface_feature"]
    threshold = state["length_threshold"]
    X = np.zeros((len(records), 2), dtype=np.float64)
    for row, record in enumerate(records):
        if surface is not None:
            value = check_surface(surface, record.text, threshold=threshold)
            X[row, 0] = value - 0.5
        if record.l_l is not None:
            X[row, 1] = record.l_l - 0.5
    return X


# --- models ----------------------------------------------------------------

@dataclass(frozen=True)
class OracleModel:
    """Reads the stamped label for its axis; no training involved."""

    learner_id: str

    @property
    def kind(self):
        return self.learner_id.split("_", 1)[1]

    def predict(self, records):
        out = []
        for record in records:
            value = record.l_l if self.kind == "linguistic" else record.l_s
            if value is None:
                # Control tasks stamp only one axis; fall back to the label
                # so the oracle stays a diagnostic upper bound everywhere.
                value = record.label
            out.append(Prediction(uid=record.uid, predicted_label=int(value),
                                  score=float(value)))
        return out

    def to_dict(self):
        return {"format": MODEL_FORMAT, "learner_id": self.learner_id}


@dataclass(frozen=True)
class LinearModel:
    """Trained logistic model plus everything needed to re-featurize."""

    learner_id: str
    feature_names: tuple
    weights: np.ndarray
    bias: float
    config: TrainConfig
    state: dict
    diagnostics: dict = field(default_factory=dict)

    def _featurize(self, records):
        if self.learner_id == "bow_logistic":
            return bow_featurize(self.state, records)
        if self.learner_id == "dual_feature_meta":
            return dual_featurize(self.state, records)
        raise LearnerError(f"no featurizer for {self.learner_id}")

    def decision_values(self, records):
        X = self._featurize(list(records))
        return X @ self.weights + self.bias

    def predict(self, records):
        records = list(records)
        z = self.decision_values(records)
        scores = sigmoid(z)
        out = []
        for record, value, score in zip(records, z, scores):
            # Predict 1 only on a strictly positive margin; exact ties go to 0.
            label = 1 if value > 0.0 else 0
            out.append(Prediction(uid=record.uid, predicted_label=label,
                                  score=float(min(max(score, 0.0), 1.0))))
        return out

    def to_dict(self):
        return {
            "format": MODEL_FORMAT,
            "learner_id": self.learner_id,
            "feature_names": list(self.feature_names),
            "weights": [float(w) for w in self.weights],
            "bias": self.bias,
            "config": self.config.to_dict(),
            "state": self.state,
            "diagnostics": self.diagnostics,
        }


def model_from_dict(payload):
    if payload.get("format") != MODEL_FORMAT:
        raise LearnerError(f"unsupported model format: {payload.get('format')!r}")
    learner_id = payload["learner_id"]
    if learner_id.startswith("oracle_"):
        return OracleModel(learner_id=learner_id)
    return LinearModel(
        learner_id=learner_id,
        feature_names=tuple(payload["feature_names"]),
        weights=np.asarray(payload["weights"], dtype=np.float64),
        bias=payload["bias"],
        config=TrainConfig.from_dict(payload["config"]),
        state=payload["state"],
        diagnostics=payload.get("diagnostics", {}),
    )


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as handle:
        return model_from_dict(json.load(handle))


def dump_weights(model):
    """Human-readable weight listing, largest magnitude first."""
    lines = [f"# {MODEL_FORMAT}", f"# learner: {model.learner_id}"]
    if isinstance(model, OracleModel):
        lines.append("# oracle; no trained weights")
        return "\n".join(lines) + "\n"
    lines.append(f"# bias: {model.bias:+.6f}")
    for key, value in sorted(model.diagnostics.items()):
        lines.append(f"# {key}: {value}")
    ranked = sorted(zip(model.feature_names, model.weights),
                    key=lambda item: -abs(item[1]))
    for name, weight in ranked:
        lines.append(f"{name}\t{weight:+.6f}")
    return "\n".join(lines) + "\n"


# --- training entry points --------------------------------------------------

def oracle_predict(kind, records):
    if kind not in ("linguistic", "surface"):
        raise LearnerError(f"unknown oracle kind: {kind!r}")
    return OracleModel(learner_id=f"oracle_{kind}").predict(records)


def _training_records(bundle):
    records = bundle.records.get("training") or bundle.records.get("control_train")
    if not records:
        raise LearnerError(f"{bundle.task.task_id}: no training records")
    return list(records)


def train_bow_logistic(bundle, config=None):
    config = config or TrainConfig()
    records = _training_records(bundle)
    state = bow_state(records)
    X = bow_featurize(state, records)
    y = np.asarray([r.label for r in records], dtype=np.float64)
    weights, bias, diagnostics = _fit(X, y, config, fit_bias=True)
    return LinearModel(
        learner_id="bow_logistic",
        feature_names=bow_feature_names(state),
        weights=weights,
        bias=bias,
        config=config,
        state=state,
        diagnostics=diagnostics,
    )


def train_dual_feature(bundle, config=None):
    # No bias term: the centered features make the balanced training set
    # exactly antisymmetric, which pins the uninoculated test margin to 0.
    config = config or TrainConfig()
    records = _training_records(bundle)
    state = dual_state(bundle.task.task_id,
                       length_threshold=bundle.manifest.get("length_threshold"))
    X = dual_featurize(state, records)
    y = np.asarray([r.label for r in records], dtype=np.float64)
    weights, bias, diagnostics = _fit(X, y, config, fit_bias=False)
    return LinearModel(
        learner_id="dual_feature_meta",
        feature_names=DUAL_FEATURE_NAMES,
        weights=weights,
        bias=bias,
        config=config,
        state=state,
        diagnostics=diagnostics,
    )


def train_learner(learner_id, bundle, config=None):
    """Uniform entry point used by the experiment runner."""
    if learner_id == "oracle_linguistic":
        return OracleModel(learner_id=learner_id)
    if learner_id == "oracle_surface":
        return OracleModel(learner_id=learner_id)
    if learner_id == "bow_logistic":
        return train_bow_logistic(bundle, config)
    if learner_id == "dual_feature_meta":
        return train_dual_feature(bundle, config)
    raise LearnerError(f"unknown learner: {learner_id!r}")
