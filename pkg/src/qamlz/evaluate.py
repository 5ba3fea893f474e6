"""Strong-classifier scoring, ROC/AUROC tooling, and the two baselines.

Signal efficiency is the true-positive rate on label +1, background
rejection the true-negative rate on label -1; a RocCurve stores the
(efficiency, rejection) sweep and its trapezoidal area.  Ensembles of
weight vectors are combined by taking, at each efficiency, the best
rejection any member achieves (pointwise supremum on a common grid).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .anneal import Solver
from .data import Dataset
from .weak import AugmentedClassifierSet, CorrelationCache
from .ising import build_qaml
from .zoom import normalized_training_energy

__all__ = [
    "StrongClassifier",
    "RocCurve",
    "score",
    "roc",
    "ensemble_roc",
    "auroc_error",
    "train_qaml",
    "train_lr",
    "squared_error_and_gradient",
    "normalized_training_energy",
]


@dataclass(frozen=True)
class StrongClassifier:
    """A weight vector over an augmented classifier set."""

    weights: np.ndarray
    classifier_set: AugmentedClassifierSet

    def __post_init__(self):
        weights = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        if weights.shape != (self.classifier_set.n_total,):
            raise ValueError("weight count must match the classifier count")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    def scores(self, features: np.ndarray) -> np.ndarray:
        """Weighted-sum scores for each row of ``features``."""
        return self.classifier_set.response_matrix(features) @ self.weights


def score(classifier: StrongClassifier, x: np.ndarray) -> float:
    """Score a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a single feature vector")
    return float(classifier.scores(x[None, :])[0])


def _trapezoid(efficiencies: np.ndarray, rejections: np.ndarray) -> float:
    widths = np.diff(efficiencies)
    return float(np.sum(widths * 0.5 * (rejections[1:] + rejections[:-1])))


@dataclass(frozen=True)
class RocCurve:
    """An (efficiency, rejection) sweep plus its area.

    ``points[:, 0]`` is signal efficiency (non-decreasing, starting at 0 and
    ending at 1), ``points[:, 1]`` background rejection.  ``auroc`` is the
    trapezoidal integral of rejection over efficiency.
    """

    points: np.ndarray  # (k, 2)
    auroc: float
    auroc_error: float = 0.0

    def __post_init__(self):
        points = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 2:
            raise ValueError("points must be a (k >= 2, 2) array")
        if points.min() < 0 or points.max() > 1:
            raise ValueError("efficiencies and rejections must lie in [0, 1]")
        if np.any(np.diff(points[:, 0]) < 0):
            raise ValueError("efficiencies must be non-decreasing")
        if abs(_trapezoid(points[:, 0], points[:, 1]) - self.auroc) > 1e-12:
            raise ValueError("auroc does not match the stored points")
        if self.auroc_error < 0:
            raise ValueError("auroc_error must be >= 0")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def efficiencies(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def rejections(self) -> np.ndarray:
        return self.points[:, 1]

    def with_error(self, auroc_error: float) -> "RocCurve":
        return replace(self, auroc_error=auroc_error)

    def to_csv(self) -> str:
        lines = ["efficiency,rejection"]
        lines += [f"{float(e)!r},{float(r)!r}" for e, r in self.points]
        return "\n".join(lines) + "\n"

    def summary(self, n_members: int = 1) -> dict:
        return {
            "auroc": self.auroc,
            "auroc_error": self.auroc_error,
            "n_members": n_members,
        }


def _sweep_points(
    scores: np.ndarray, labels: np.ndarray, weights: Optional[np.ndarray] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Threshold sweep over distinct scores, optionally example-weighted.

    Returns (efficiencies, rejections) beginning at (0, 1); predictions are
    positive at score >= threshold, thresholds descending, tied scores
    grouped.  The final threshold (the minimum score) yields (1, 0).
    """
    if weights is None:
        weights = np.ones(scores.shape[0])
    pos_w = np.where(labels == 1, weights, 0.0)
    neg_w = np.where(labels == -1, weights, 0.0)
    total_pos = pos_w.sum()
    total_neg = neg_w.sum()
    if total_pos <= 0 or total_neg <= 0:
        raise ValueError("both classes must be present (with nonzero weight)")
    uniq, inverse = np.unique(scores, return_inverse=True)
    tp_per_value = np.bincount(inverse, weights=pos_w, minlength=uniq.size)
    fp_per_value = np.bincount(inverse, weights=neg_w, minlength=uniq.size)
    cum_tp = np.cumsum(tp_per_value[::-1])
    cum_fp = np.cumsum(fp_per_value[::-1])
    efficiencies = np.concatenate([[0.0], cum_tp / total_pos])
    rejections = np.concatenate([[1.0], 1.0 - cum_fp / total_neg])
    return efficiencies, np.clip(rejections, 0.0, 1.0)


def roc(scores: np.ndarray, labels: np.ndarray) -> RocCurve:
    """ROC curve of raw scores against +/-1 labels."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be equal-length vectors")
    efficiencies, rejections = _sweep_points(scores, labels)
    points = np.column_stack([efficiencies, rejections])
    return RocCurve(points=points, auroc=_trapezoid(efficiencies, rejections))


def _grid_rejections(curve_eff: np.ndarray, curve_rej: np.ndarray, grid: np.ndarray) -> np.ndarray:
    # Collapse repeated efficiencies, keeping the best rejection at each
    # (the first of the group, since rejection is non-increasing), so the
    # interpolation abscissae are strictly increasing.
    first = np.concatenate([[True], np.diff(curve_eff) > 0])
    return np.interp(grid, curve_eff[first], curve_rej[first])


def ensemble_roc(
    members: Sequence[StrongClassifier], test: Dataset, grid_size: int = 1001
) -> RocCurve:
    """Pointwise-supremum ROC over several classifiers.

    Each member's curve is resampled onto a uniform efficiency grid; the
    envelope takes the maximum rejection across members at every grid point.
    """
    if not members:
        raise ValueError("need at least one ensemble member")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    grid = np.linspace(0.0, 1.0, grid_size)
    envelope = np.zeros(grid_size)
    for member in members:
        eff, rej = _sweep_points(member.scores(test.features), test.labels)
        np.maximum(envelope, _grid_rejections(eff, rej, grid), out=envelope)
    points = np.column_stack([grid, envelope])
    return RocCurve(points=points, auroc=_trapezoid(grid, envelope))


def _weighted_auroc(scores: np.ndarray, labels: np.ndarray, weights: np.ndarray) -> float:
    eff, rej = _sweep_points(scores, labels, weights)
    return _trapezoid(eff, rej)


def auroc_error(
    scores: np.ndarray,
    labels: np.ndarray,
    resamples: int = 100,
    seed: int = 0,
    weight_draw=None,
) -> float:
    """Statistical AUROC error from Poisson re-weighting.

    Every resample gives each example an independent Poisson(mean 1) weight
    and recomputes the AUROC with weighted rates; the sample standard
    deviation across resamples is returned.  A resample that zeroes out an
    entire class is redrawn.  ``weight_draw(rng, n)`` can replace the
    Poisson draw in tests.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if resamples < 2:
        raise ValueError("resamples must be >= 2")
    if weight_draw is None:
        weight_draw = lambda rng, n: rng.poisson(1.0, n).astype(np.float64)
    rng = np.random.default_rng(seed)
    n = scores.shape[0]
    values = np.empty(resamples)
    for k in range(resamples):
        while True:
            weights = weight_draw(rng, n)
            if weights[labels == 1].sum() > 0 and weights[labels == -1].sum() > 0:
                break
        values[k] = _weighted_auroc(scores, labels, weights)
    return float(np.std(values, ddof=1))


def train_qaml(
    cache: CorrelationCache,
    regularization: float,
    solver: Solver,
    seed: int = 0,
) -> StrongClassifier:
    """Single-shot selection baseline: one anneal, binary 0/1 weights.

    The spin vector of the best state is mapped through (s + 1)/2, so each
    classifier is either included with weight 1 or dropped.
    """
    problem = build_qaml(cache, regularization)
    result = solver.solve(problem, seed)
    weights = (result.best.spins.astype(np.float64) + 1.0) / 2.0
    return StrongClassifier(weights=weights, classifier_set=cache.classifier_set)


def squared_error_and_gradient(
    responses: np.ndarray, labels: np.ndarray, weights: np.ndarray
) -> tuple[float, np.ndarray]:
    """Training squared error sum_t (y_t - responses[t] . w)^2 and its gradient."""
    residual = labels.astype(np.float64) - responses @ weights
    loss = float(residual @ residual)
    gradient = -2.0 * (responses.T @ residual)
    return loss, gradient


def train_lr(
    train: Dataset,
    classifier_set: AugmentedClassifierSet,
    epochs: int = 500,
    learning_rate: Optional[float] = None,
    seed: int = 0,
) -> StrongClassifier:
    """Least-squares baseline: full-batch gradient descent, zero init.

    Minimizes the same training squared error the annealed methods target,
    with unconstrained continuous weights.  When ``learning_rate`` is None a
    safe step of 0.9 / (largest eigenvalue of responses.T @ responses) is
    used.  ``seed`` is accepted for interface symmetry; the optimization is
    deterministic and never consumes randomness.
    """
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    responses = classifier_set.response_matrix(train.features)
    gram = responses.T @ responses
    if learning_rate is None:
        top = float(np.linalg.eigvalsh(gram)[-1])
        learning_rate = 0.9 / top if top > 0 else 1.0
    elif learning_rate <= 0:
        raise ValueError("learning_rate must be positive")
    weights = np.zeros(classifier_set.n_total)
    target = responses.T @ train.labels.astype(np.float64)
    for _ in range(epochs):
        gradient = 2.0 * (gram @ weights - target)
        weights -= learning_rate * gradient
        if not np.isfinite(weights).all():
            raise ValueError(
                "gradient descent diverged; use a smaller learning_rate"
            )
    return StrongClassifier(weights=weights, classifier_set=classifier_set)
