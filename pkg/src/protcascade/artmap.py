"""Simplified fast-commit Fuzzy ARTMAP."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ArtmapError(ValueError):
    pass


@dataclass(frozen=True)
class ArtmapParams:
    rho_base: float = 0.75  # baseline vigilance
    alpha: float = 0.001  # choice parameter
    beta: float = 1.0  # learning rate, 1 = fast learning
    eps_mt: float = 0.001  # match-tracking increment
    epochs: int = 10

    def __post_init__(self):
        if not 0.0 <= self.rho_base <= 1.0:
            raise ArtmapError("rho_base must lie in [0, 1]")
        if self.alpha <= 0:
            raise ArtmapError("alpha must be positive")
        if not 0.0 < self.beta <= 1.0:
            raise ArtmapError("beta must lie in (0, 1]")
        if self.eps_mt <= 0:
            raise ArtmapError("eps_mt must be positive")
        if self.epochs < 1:
            raise ArtmapError("epochs must be >= 1")


@dataclass
class ArtmapModel:
    weights: np.ndarray  # (n_categories, 2d)
    labels: list[str]  # one per category
    d: int
    params: ArtmapParams = field(default_factory=ArtmapParams)

    @property
    def n_categories(self) -> int:
        return len(self.labels)

    def validate(self, families=None) -> "ArtmapModel":
        if self.weights.shape != (len(self.labels), 2 * self.d):
            raise ArtmapError(f"weight matrix has shape {self.weights.shape}")
        if np.any(self.weights < 0) or np.any(self.weights > 1):
            raise ArtmapError("category weights outside [0, 1]")
        if families is not None and not set(self.labels) <= set(families):
            raise ArtmapError("category label outside the family set")
        return self


def complement_code(x) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return np.concatenate([x, 1.0 - x], axis=-1)


def _choice_and_match(weights: np.ndarray, I: np.ndarray, alpha: float):
    overlap = np.minimum(weights, I).sum(axis=1)
    choice = overlap / (alpha + weights.sum(axis=1))
    match = overlap / I.sum()
    return choice, match


def _present(weights, labels, I, label, params) -> tuple[np.ndarray, list[str], bool]:
    """Present one coded sample; returns updated weights/labels and whether anything changed."""
    if len(labels) == 0:
        return I[None, :].copy(), [label], True
    choice, match = _choice_and_match(weights, I, params.alpha)
    # descending choice, ties to the lowest index
    order = np.lexsort((np.arange(len(choice)), -choice))
    rho = params.rho_base
    for j in order:
        if match[j] < rho:
            continue
        if labels[j] != label:
            rho = match[j] + params.eps_mt
            continue
        old = weights[j]
        new = params.beta * np.minimum(I, old) + (1.0 - params.beta) * old
        changed = bool(np.any(np.abs(new - old) > 1e-12))
        weights[j] = new
        return weights, labels, changed
    return np.vstack([weights, I]), labels + [label], True


def train(data, params: ArtmapParams | None = None) -> ArtmapModel:
    """Train on ``(vector, label)`` pairs with vectors already scaled to [0, 1].

    Passes repeat until an epoch adds no category and moves no weight by
    more than 1e-12, or ``params.epochs`` is reached.
    """
    params = params or ArtmapParams()
    data = list(data)
    if not data:
        raise ArtmapError("cannot train on empty data")
    coded = [complement_code(x) for x, _ in data]
    d = coded[0].shape[0] // 2
    if any(c.shape[0] != 2 * d for c in coded):
        raise ArtmapError("training vectors differ in dimensionality")
    weights = np.zeros((0, 2 * d))
    labels: list[str] = []
    for _ in range(params.epochs):
        changed = False
        for I, (_, label) in zip(coded, data):
            weights, labels, step_changed = _present(weights, labels, I, label, params)
            changed |= step_changed
        if not changed:
            break
    return ArtmapModel(weights=weights, labels=labels, d=d, params=params)


def classify(model: ArtmapModel, x, candidates=None) -> tuple[str, float]:
    """Winner-take-all label and its match value as confidence.

    With ``candidates``, only categories of those families compete.
    """
    if model.n_categories == 0:
        raise ArtmapError("model has no categories")
    I = complement_code(x)
    choice, match = _choice_and_match(model.weights, I, model.params.alpha)
    if candidates is not None:
        allowed = np.array([lab in candidates for lab in model.labels])
        if not allowed.any():
            raise ArtmapError("no category belongs to a candidate family")
        choice = np.where(allowed, choice, -np.inf)
    j = int(np.argmax(choice))
    return model.labels[j], float(match[j])


def family_matches(model: ArtmapModel, x) -> dict[str, float]:
    """Best category match value per family label."""
    I = complement_code(x)
    _, match = _choice_and_match(model.weights, I, model.params.alpha)
    best: dict[str, float] = {}
    for label, m in zip(model.labels, match):
        if m > best.get(label, -1.0):
            best[label] = float(m)
    return best
