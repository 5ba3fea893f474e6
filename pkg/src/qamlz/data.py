"""Labeled datasets: validation, synthetic generation, CSV ingestion, splitting."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .seeds import spawn


class CsvFormatError(ValueError):
    """A CSV dataset file could not be parsed or validated."""


@dataclass(frozen=True)
class Dataset:
    """Feature rows paired with binary labels in {-1, +1}."""

    features: np.ndarray  # (n_examples, n_features) float64
    labels: np.ndarray  # (n_examples,) int8

    def __post_init__(self):
        features = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int8))
        if features.ndim != 2:
            raise ValueError("features must be a 2-D array")
        if features.shape[0] < 1 or features.shape[1] < 1:
            raise ValueError("dataset needs at least one example and one feature")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must have one entry per example")
        if not np.isfinite(features).all():
            raise ValueError("features contain non-finite values")
        if not np.isin(labels, (-1, 1)).all():
            raise ValueError("labels must be -1 or +1")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_examples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, rows: np.ndarray) -> "Dataset":
        return Dataset(self.features[rows], self.labels[rows])


@dataclass(frozen=True)
class SplitDataset:
    """Disjoint train/test row subsets of a source dataset."""

    train: Dataset
    test: Dataset
    seed: int


def generate_synthetic(
    n_signal: int,
    n_background: int,
    n_features: int,
    separation: float,
    seed: int,
) -> Dataset:
    """Two-class Gaussian dataset with unit covariance.

    Class means sit at +/- separation/2 along the fixed unit direction
    (1, ..., 1)/sqrt(n_features).  Signal rows (label +1) come first,
    background rows (label -1) after.  Deterministic given the seed.
    """
    if n_signal < 1 or n_background < 1:
        raise ValueError("class counts must be >= 1")
    if n_features < 1:
        raise ValueError("n_features must be >= 1")
    if separation < 0:
        raise ValueError("separation must be >= 0")
    rng = np.random.default_rng(spawn(seed))
    direction = np.full(n_features, 1.0 / np.sqrt(n_features))
    shift = 0.5 * separation * direction
    signal = rng.standard_normal((n_signal, n_features)) + shift
    background = rng.standard_normal((n_background, n_features)) - shift
    features = np.vstack([signal, background])
    labels = np.concatenate(
        [np.ones(n_signal, dtype=np.int8), -np.ones(n_background, dtype=np.int8)]
    )
    return Dataset(features, labels)


def load_csv(path: str, header: bool = False) -> Dataset:
    """Read a dataset from a comma-separated file.

    Each row is feature values followed by a label in the last column.
    Labels may be {-1, +1} or {0, 1}; the latter are mapped to {-1, +1}.
    Row order is preserved.
    """
    rows: list[list[float]] = []
    raw_labels: list[float] = []
    label_lines: list[int] = []
    n_columns = None
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # ignore blank lines
            if n_columns is None:
                n_columns = len(row)
                if n_columns < 2:
                    raise CsvFormatError(
                        f"line {lineno}: need at least one feature column plus a label"
                    )
            elif len(row) != n_columns:
                raise CsvFormatError(
                    f"line {lineno}: expected {n_columns} columns, got {len(row)}"
                )
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise CsvFormatError(f"line {lineno}: {exc}") from None
            rows.append(values[:-1])
            raw_labels.append(values[-1])
            label_lines.append(lineno)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")

    distinct = set(raw_labels)
    if distinct <= {-1.0, 1.0}:
        labels = [int(v) for v in raw_labels]
    elif distinct <= {0.0, 1.0}:
        labels = [1 if v == 1.0 else -1 for v in raw_labels]
    else:
        bad = next(
            (v, line)
            for v, line in zip(raw_labels, label_lines)
            if v not in (-1.0, 0.0, 1.0)
        )
        raise CsvFormatError(
            f"line {bad[1]}: unknown label value {bad[0]!r} "
            "(labels must be -1/+1 or 0/1)"
        )
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int8))


def save_csv(dataset: Dataset, path: str) -> None:
    """Write a dataset in the format accepted by :func:`load_csv` (no header)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        for row, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


_MAX_SPLIT_ATTEMPTS = 10_000


def split(dataset: Dataset, train_fraction: float, seed: int) -> SplitDataset:
    """Split rows into train/test by a seeded uniformly random permutation.

    The train size is round(train_fraction * n_examples).  When the source
    holds both classes and the train side has room for two rows, the
    permutation is redrawn (deterministically) until the train side
    contains both classes.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = dataset.n_examples
    n_train = int(round(train_fraction * n))
    if n_train < 1 or n - n_train < 1:
        raise ValueError(
            f"train_fraction={train_fraction} leaves an empty side for {n} examples"
        )
    rng = np.random.default_rng(spawn(seed))
    both_classes = len(np.unique(dataset.labels)) == 2
    permutation = rng.permutation(n)
    if both_classes and n_train >= 2:
        for _ in range(_MAX_SPLIT_ATTEMPTS):
            if len(np.unique(dataset.labels[permutation[:n_train]])) == 2:
                break
            permutation = rng.permutation(n)
        else:  # pragma: no cover - astronomically unlikely for sane inputs
            raise RuntimeError("could not draw a split with both classes in train")
    train = dataset.subset(permutation[:n_train])
    test = dataset.subset(permutation[n_train:])
    return SplitDataset(train=train, test=test, seed=seed)
