"""Sigmoid MLP with softmax output, trained by full-batch backpropagation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from protcascade.rng import XorShift64Star

DEFAULT_HIDDEN = 64
DEFAULT_LEARNING_RATE = 2.0
DEFAULT_EPOCHS = 300


class MlpError(ValueError):
    pass


@dataclass(frozen=True)
class MlpConfig:
    layer_sizes: tuple[int, ...]
    learning_rate: float = DEFAULT_LEARNING_RATE
    epochs: int = DEFAULT_EPOCHS
    seed: int = 0

    def __post_init__(self):
        if len(self.layer_sizes) < 3:
            raise MlpError("need input, at least one hidden layer, and output")
        if any(int(s) < 1 for s in self.layer_sizes):
            raise MlpError(f"zero-size layer in {self.layer_sizes}")
        if self.learning_rate <= 0:
            raise MlpError("learning_rate must be positive")
        if self.epochs < 0:
            raise MlpError("epochs must be >= 0")


@dataclass
class MlpModel:
    weights: list[np.ndarray]  # (fan_in, fan_out) per layer
    biases: list[np.ndarray]
    config: MlpConfig
    loss_history: list[float] = field(default_factory=list)

    def copy(self) -> "MlpModel":
        return MlpModel(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.config,
            list(self.loss_history),
        )

    def validate(self) -> "MlpModel":
        sizes = self.config.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise MlpError("layer count disagrees with config")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i], sizes[i + 1]) or b.shape != (sizes[i + 1],):
                raise MlpError(f"layer {i} has shape {w.shape}/{b.shape}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise MlpError(f"non-finite parameter in layer {i}")
        return self


def init_mlp(config: MlpConfig) -> MlpModel:
    """Uniform weights in +-1/sqrt(fan_in) from xorshift64*, row-major per layer; zero biases."""
    rng = XorShift64Star(config.seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(config.layer_sizes[:-1], config.layer_sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        w = np.array([rng.uniform(-bound, bound) for _ in range(fan_in * fan_out)])
        weights.append(w.reshape(fan_in, fan_out))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights, biases, config)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_all(model: MlpModel, X: np.ndarray):
    activations = [X]
    h = X
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        h = z if i == last else _sigmoid(z)
        activations.append(h)
    return activations  # final entry holds logits


def forward(model: MlpModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.config.layer_sizes[0]:
        raise MlpError(f"input has {x.shape[-1]} features, expected {model.config.layer_sizes[0]}")
    return softmax(_forward_all(model, x)[-1])


def cross_entropy(model: MlpModel, X, targets) -> float:
    logits = _forward_all(model, np.atleast_2d(np.asarray(X, dtype=float)))[-1]
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    targets = np.atleast_1d(targets)
    return float(-logp[np.arange(len(targets)), targets].mean())


def gradients(model: MlpModel, X, targets):
    """Gradients of mean cross-entropy w.r.t. every weight and bias."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    targets = np.atleast_1d(targets)
    acts = _forward_all(model, X)
    n = X.shape[0]
    delta = softmax(acts[-1])
    delta[np.arange(n), targets] -= 1.0
    delta /= n
    gw, gb = [None] * len(model.weights), [None] * len(model.weights)
    for i in range(len(model.weights) - 1, -1, -1):
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i > 0:
            h = acts[i]
            delta = (delta @ model.weights[i].T) * h * (1.0 - h)
    return gw, gb


def train_backprop(model: MlpModel, data) -> MlpModel:
    """Full-batch gradient descent for ``config.epochs`` epochs.

    Returns a new model; ``loss_history`` holds the loss before each step
    followed by the final loss.
    """
    data = list(data)
    if not data:
        raise MlpError("cannot train on empty data")
    out_size = model.config.layer_sizes[-1]
    X = np.array([np.asarray(x, dtype=float) for x, _ in data])
    t = np.array([int(c) for _, c in data])
    if np.any(t < 0) or np.any(t >= out_size):
        raise MlpError("class index outside output layer")
    trained = model.copy()
    if model.config.epochs == 0:
        return trained
    lr = model.config.learning_rate
    history = []
    for _ in range(model.config.epochs):
        history.append(cross_entropy(trained, X, t))
        gw, gb = gradients(trained, X, t)
        for i in range(len(trained.weights)):
            trained.weights[i] -= lr * gw[i]
            trained.biases[i] -= lr * gb[i]
    history.append(cross_entropy(trained, X, t))
    trained.loss_history = history
    return trained


def gradient_check(model: MlpModel, x, target: int, h: float = 1e-5) -> float:
    """Max relative disagreement between backprop and central differences."""
    x = np.asarray(x, dtype=float)
    gw, gb = gradients(model, x, target)
    worst = 0.0
    probe = model.copy()
    for params, analytic in zip(probe.weights + probe.biases, gw + gb):
        flat, grad = params.reshape(-1), analytic.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            up = cross_entropy(probe, x, target)
            flat[j] = orig - h
            down = cross_entropy(probe, x, target)
            flat[j] = orig
            numeric = (up - down) / (2 * h)
            err = abs(grad[j] - numeric) / max(1e-8, abs(grad[j]) + abs(numeric))
            worst = max(worst, err)
    return worst


def restrict(probs, indices) -> np.ndarray:
    """Renormalise a distribution over a subset of classes."""
    sub = np.asarray(probs, dtype=float)[list(indices)]
    total = sub.sum()
    return sub / total if total > 0 else np.full(len(sub), 1.0 / len(sub))
