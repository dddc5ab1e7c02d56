"""Per-turn binary cut-point classifier: explicit features, linear map, sigmoid.

The per-turn representation is a fixed 12-dimensional feature vector; an
external encoder can bypass this model entirely by injecting probabilities
through the --probs file interface.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Dialogue
from .intent import IntentLabel
from .metrics import rouge_n

INTENT_ORDER = (
    IntentLabel.WHY,
    IntentLabel.WHAT,
    IntentLabel.WHERE,
    IntentLabel.WHEN,
    IntentLabel.CONFIRM,
    IntentLabel.ABSTAIN,
)

FEATURE_NAMES = (
    "position",
    "length",
    "speaker_change_next",
    "question_mark",
    "intent_why",
    "intent_what",
    "intent_where",
    "intent_when",
    "intent_confirm",
    "intent_abstain",
    "overlap_next",
    "overlap_prev",
)

N_FEATURES = len(FEATURE_NAMES)

_LENGTH_CAP = 50.0
_EPS = 1e-12

TrainSample = tuple[Dialogue, Sequence[IntentLabel], Sequence[int]]


def featurize(
    dialogue: Dialogue, turn_index: int, intents: Sequence[IntentLabel]
) -> np.ndarray:
    """Deterministic per-turn features (1-based turn_index)."""
    n = dialogue.n_turns
    if not (1 <= turn_index <= n):
        raise ValueError(f"turn_index {turn_index} out of range 1..{n}")
    if len(intents) != n:
        raise ValueError(f"{n} turns but {len(intents)} intents")
    turn = dialogue.turns[turn_index - 1]
    nxt = dialogue.turns[turn_index] if turn_index < n else None
    prev = dialogue.turns[turn_index - 2] if turn_index > 1 else None

    vec = np.zeros(N_FEATURES)
    vec[0] = turn_index / n
    vec[1] = min(len(turn.tokens) / _LENGTH_CAP, 1.0)
    vec[2] = 1.0 if nxt is not None and nxt.speaker != turn.speaker else 0.0
    vec[3] = 1.0 if "?" in turn.tokens else 0.0
    vec[4 + INTENT_ORDER.index(intents[turn_index - 1])] = 1.0
    vec[10] = rouge_n(turn.tokens, nxt.tokens, 1).f1 if nxt is not None else 0.0
    vec[11] = rouge_n(turn.tokens, prev.tokens, 1).f1 if prev is not None else 0.0
    return vec


def featurize_dialogue(dialogue: Dialogue, intents: Sequence[IntentLabel]) -> np.ndarray:
    return np.stack([featurize(dialogue, i, intents) for i in range(1, dialogue.n_turns + 1)])


@dataclass(frozen=True)
class CutClassifier:
    weights: np.ndarray
    bias: float
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.weights.shape != (len(self.feature_names),):
            raise ValueError(
                f"weights shape {self.weights.shape} does not match "
                f"{len(self.feature_names)} features"
            )
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise ValueError("model parameters must be finite")


def zero_model() -> CutClassifier:
    return CutClassifier(weights=np.zeros(N_FEATURES), bias=0.0)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.1
    epochs: int = 1000
    seed: int = 0
    l2: float = 1e-4

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 penalty must be nonnegative")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def predict_probs(
    model: CutClassifier, dialogue: Dialogue, intents: Sequence[IntentLabel]
) -> list[float]:
    """Sigmoid(weights . features + bias) per turn, clipped into (0, 1)."""
    x = featurize_dialogue(dialogue, intents)
    if x.shape[1] != model.weights.shape[0]:
        raise ValueError(
            f"feature dimension {x.shape[1]} does not match model {model.weights.shape[0]}"
        )
    probs = _sigmoid(x @ model.weights + model.bias)
    return list(np.clip(probs, _EPS, 1.0 - _EPS))


def bce_loss(probs: Sequence[float], labels: Sequence[int]) -> float:
    """Mean binary cross-entropy with probabilities clamped away from 0 and 1."""
    if len(probs) != len(labels):
        raise ValueError(f"{len(probs)} probs but {len(labels)} labels")
    if not probs:
        raise ValueError("bce_loss needs at least one element")
    p = np.clip(np.asarray(probs, dtype=float), _EPS, 1.0 - _EPS)
    y = np.asarray(labels, dtype=float)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def _training_matrix(samples: Sequence[TrainSample]) -> tuple[np.ndarray, np.ndarray]:
    """Stack features/labels for cut positions 1..N-1 of every dialogue."""
    rows: list[np.ndarray] = []
    labels: list[float] = []
    for dialogue, intents, cuts in samples:
        cut_set = set(cuts)
        features = featurize_dialogue(dialogue, intents)
        for i in range(1, dialogue.n_turns):
            rows.append(features[i - 1])
            labels.append(1.0 if i in cut_set else 0.0)
    if not rows:
        raise ValueError("no trainable cut positions in the dataset")
    return np.stack(rows), np.asarray(labels)


def train(
    model: CutClassifier, samples: Sequence[TrainSample], cfg: TrainConfig
) -> CutClassifier:
    """Full-batch gradient descent on BCE plus an L2 penalty on the weights."""
    if not samples:
        raise ValueError("training set is empty")
    x, y = _training_matrix(samples)
    n = len(y)
    w = model.weights.astype(float).copy()
    b = float(model.bias)
    for _ in range(cfg.epochs):
        p = _sigmoid(x @ w + b)
        grad_w = x.T @ (p - y) / n + 2.0 * cfg.l2 * w
        grad_b = float(np.mean(p - y))
        w -= cfg.lr * grad_w
        b -= cfg.lr * grad_b
    return CutClassifier(weights=w, bias=b, feature_names=model.feature_names)


def _bce_from_params(x: np.ndarray, y: np.ndarray, w: np.ndarray, b: float) -> float:
    # softplus(z) - y*z is the numerically exact BCE of sigmoid(z).
    z = x @ w + b
    softplus = np.where(z > 0, z + np.log1p(np.exp(-z)), np.log1p(np.exp(z)))
    return float(np.mean(softplus - y * z))


def grad_check(model: CutClassifier, sample: TrainSample, h: float = 1e-5) -> float:
    """Max relative error of the analytic BCE gradient vs central differences."""
    if not (1e-7 <= h <= 1e-3):
        raise ValueError(f"step h must be in [1e-7, 1e-3], got {h}")
    x, y = _training_matrix([sample])
    n = len(y)
    w = model.weights.astype(float)
    b = float(model.bias)

    p = _sigmoid(x @ w + b)
    analytic = np.concatenate([x.T @ (p - y) / n, [np.mean(p - y)]])

    params = np.concatenate([w, [b]])
    numeric = np.zeros_like(params)
    for i in range(len(params)):
        plus = params.copy()
        minus = params.copy()
        plus[i] += h
        minus[i] -= h
        numeric[i] = (
            _bce_from_params(x, y, plus[:-1], plus[-1])
            - _bce_from_params(x, y, minus[:-1], minus[-1])
        ) / (2.0 * h)

    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def save_model(model: CutClassifier, path: str | Path) -> None:
    payload = {
        "feature_names": list(model.feature_names),
        "weights": [float(v) for v in model.weights],
        "bias": float(model.bias),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> CutClassifier:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return CutClassifier(
        weights=np.asarray(payload["weights"], dtype=float),
        bias=float(payload["bias"]),
        feature_names=tuple(payload["feature_names"]),
    )
