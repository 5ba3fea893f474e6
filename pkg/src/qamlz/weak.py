"""Weak classifiers and their correlation statistics.

Base classifiers are rank-transform stumps: each feature is mapped through
its empirical CDF on the training set (scaled to [-1, 1]) and oriented so
the training correlation with the labels is non-negative.  The augmentation
stage replicates every base classifier at 2*offset_bound + 1 shifted
thresholds and binarizes, producing outputs of exactly +/-1/n_total each.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset


@dataclass(frozen=True)
class WeakClassifierBank:
    """One rank-based classifier per feature, with outputs in [-1, 1].

    ``sorted_values[:, i]`` holds the sorted training values of feature i;
    midrank lookups against that column give the empirical CDF.  Constant
    features are kept but forced to respond 0 everywhere, and are listed in
    ``warnings``.
    """

    sorted_values: np.ndarray  # (n_train, n_base), each column ascending
    orientation: np.ndarray  # (n_base,) int8, +/-1
    constant: np.ndarray  # (n_base,) bool
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        sorted_values = np.ascontiguousarray(
            np.asarray(self.sorted_values, dtype=np.float64)
        )
        orientation = np.asarray(self.orientation, dtype=np.int8)
        constant = np.asarray(self.constant, dtype=bool)
        if sorted_values.ndim != 2:
            raise ValueError("sorted_values must be 2-D")
        n_base = sorted_values.shape[1]
        if orientation.shape != (n_base,) or constant.shape != (n_base,):
            raise ValueError("per-classifier arrays must have length n_base")
        if not np.isin(orientation, (-1, 1)).all():
            raise ValueError("orientation entries must be -1 or +1")
        for arr in (sorted_values, orientation, constant):
            arr.setflags(write=False)
        object.__setattr__(self, "sorted_values", sorted_values)
        object.__setattr__(self, "orientation", orientation)
        object.__setattr__(self, "constant", constant)

    @property
    def n_base(self) -> int:
        return self.sorted_values.shape[1]

    @property
    def n_features(self) -> int:
        return self.sorted_values.shape[1]

    def responses(self, features: np.ndarray) -> np.ndarray:
        """Evaluate every base classifier on rows of ``features``.

        Returns an (n_rows, n_base) array with values in [-1, 1].  Uses the
        midrank convention for ties, so training rows of a feature with
        duplicated values share the response of their tied group.
        """
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != self.n_base:
            raise ValueError(
                f"expected {self.n_base} features, got {features.shape[1]}"
            )
        n_train = self.sorted_values.shape[0]
        out = np.empty((features.shape[0], self.n_base))
        for i in range(self.n_base):
            if self.constant[i]:
                out[:, i] = 0.0
                continue
            column = self.sorted_values[:, i]
            lo = np.searchsorted(column, features[:, i], side="left")
            hi = np.searchsorted(column, features[:, i], side="right")
            midrank = 0.5 * (lo + hi)
            out[:, i] = self.orientation[i] * (2.0 * midrank / n_train - 1.0)
        return out


def build_bank(train: Dataset) -> WeakClassifierBank:
    """Fit one rank-transform classifier per feature of the training set."""
    if len(np.unique(train.labels)) < 2:
        raise ValueError("training set must contain both classes")
    sorted_values = np.sort(train.features, axis=0)
    constant = sorted_values[0] == sorted_values[-1]
    warnings = tuple(
        f"feature {i} is constant on the training set; its classifier is identically 0"
        for i in np.flatnonzero(constant)
    )
    bank = WeakClassifierBank(
        sorted_values=sorted_values,
        orientation=np.ones(train.n_features, dtype=np.int8),
        constant=constant,
        warnings=warnings,
    )
    corr = bank.responses(train.features).T @ train.labels.astype(np.float64)
    orientation = np.where(corr < 0, -1, 1).astype(np.int8)
    return WeakClassifierBank(
        sorted_values=sorted_values,
        orientation=orientation,
        constant=constant,
        warnings=warnings,
    )


@dataclass(frozen=True)
class AugmentedClassifierSet:
    """Shift-and-binarize augmentation of a classifier bank.

    Each base response h is turned into sign(h + step*l)/n_total for every
    integer offset l in [-offset_bound, offset_bound], with sign(0) := +1.
    Augmented indices are offset-major: index (l + offset_bound)*n_base + i
    refers to base classifier i at offset l, so classifiers sharing an
    offset occupy contiguous blocks.
    """

    bank: WeakClassifierBank
    offset_bound: int = 3
    step: float = 0.0075

    def __post_init__(self):
        if int(self.offset_bound) != self.offset_bound or self.offset_bound < 0:
            raise ValueError("offset_bound must be a non-negative integer")
        if not self.step > 0:
            raise ValueError("step must be positive")

    @property
    def n_total(self) -> int:
        return self.bank.n_base * (2 * self.offset_bound + 1)

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.offset_bound, self.offset_bound + 1)

    def sign_matrix(self, features: np.ndarray) -> np.ndarray:
        """Raw +/-1 decisions, shape (n_rows, n_total), dtype int8."""
        h = self.bank.responses(features)
        n_rows, n_base = h.shape
        out = np.empty((n_rows, self.n_total), dtype=np.int8)
        for block, offset in enumerate(self.offsets):
            shifted = h + self.step * offset
            out[:, block * n_base : (block + 1) * n_base] = np.where(
                shifted >= 0, 1, -1
            )
        return out

    def response_matrix(self, features: np.ndarray) -> np.ndarray:
        """Augmented responses (entries +/-1/n_total), shape (n_rows, n_total)."""
        return self.sign_matrix(features) / self.n_total


def evaluate_augmented(classifier_set: AugmentedClassifierSet, x: np.ndarray) -> np.ndarray:
    """Augmented responses of a single feature vector (length n_total)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a single feature vector")
    return classifier_set.response_matrix(x[None, :])[0]


@dataclass(frozen=True)
class CorrelationCache:
    """Training-set correlation sums for an augmented classifier set.

    ``linear[k]`` is the sum over training examples of c_k(x)*y, and
    ``quad[j, k]`` the sum of c_j(x)*c_k(x).  Both are exact (computed in
    integer arithmetic, divided once), so the diagonal of ``quad`` is
    exactly n_train/n_total**2.
    """

    linear: np.ndarray  # (n_total,)
    quad: np.ndarray  # (n_total, n_total), symmetric
    n_train: int
    classifier_set: AugmentedClassifierSet = field(repr=False)

    def __post_init__(self):
        linear = np.ascontiguousarray(np.asarray(self.linear, dtype=np.float64))
        quad = np.ascontiguousarray(np.asarray(self.quad, dtype=np.float64))
        n = self.classifier_set.n_total
        if linear.shape != (n,) or quad.shape != (n, n):
            raise ValueError("cache arrays must match the classifier count")
        if self.n_train < 1:
            raise ValueError("n_train must be >= 1")
        bound = self.n_train / n
        if np.abs(linear).max() > bound * (1 + 1e-12):
            raise ValueError("linear correlations exceed the n_train/n_total bound")
        if not np.array_equal(quad, quad.T):
            raise ValueError("quad must be exactly symmetric")
        linear.setflags(write=False)
        quad.setflags(write=False)
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "quad", quad)

    @property
    def n_total(self) -> int:
        return self.linear.shape[0]


def build_cache(
    classifier_set: AugmentedClassifierSet,
    train: Dataset,
    full_cross_terms: bool = False,
) -> CorrelationCache:
    """Accumulate correlation sums of the augmented classifiers on ``train``.

    By default classifiers at different offsets do not couple: ``quad`` is
    block-diagonal with one block per offset.  ``full_cross_terms=True``
    fills the whole matrix instead, treating all n_total classifiers as one
    fully connected family.
    """
    signs = classifier_set.sign_matrix(train.features).astype(np.int64)
    n_total = classifier_set.n_total
    n_base = classifier_set.bank.n_base
    labels = train.labels.astype(np.int64)

    linear = (signs.T @ labels) / n_total
    quad = np.zeros((n_total, n_total))
    if full_cross_terms:
        quad[:] = (signs.T @ signs) / n_total**2
    else:
        for block in range(2 * classifier_set.offset_bound + 1):
            sl = slice(block * n_base, (block + 1) * n_base)
            sub = signs[:, sl]
            quad[sl, sl] = (sub.T @ sub) / n_total**2
    return CorrelationCache(
        linear=linear,
        quad=quad,
        n_train=train.n_examples,
        classifier_set=classifier_set,
    )
