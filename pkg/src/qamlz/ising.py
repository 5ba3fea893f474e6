"""Ising problems over +/-1 spins: construction, energies, pruning, gauges.

Couplings are stored as a dense strictly-upper-triangular matrix; the
energy convention is  sum_i fields[i]*s[i] + sum_{i<j} couplings[i,j]*s[i]*s[j].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .weak import CorrelationCache


@dataclass(frozen=True)
class IsingProblem:
    """Local fields plus pairwise couplings for n_spins binary spins."""

    fields: np.ndarray  # (n,)
    couplings: np.ndarray  # (n, n), nonzero only strictly above the diagonal

    def __post_init__(self):
        fields = np.ascontiguousarray(np.asarray(self.fields, dtype=np.float64))
        couplings = np.ascontiguousarray(np.asarray(self.couplings, dtype=np.float64))
        n = fields.shape[0]
        if fields.ndim != 1 or n < 1:
            raise ValueError("fields must be a non-empty vector")
        if couplings.shape != (n, n):
            raise ValueError("couplings must be an (n, n) matrix")
        if not (np.isfinite(fields).all() and np.isfinite(couplings).all()):
            raise ValueError("problem coefficients must be finite")
        if np.tril(couplings).any():
            raise ValueError(
                "couplings must be strictly upper triangular (no self-couplings)"
            )
        fields.setflags(write=False)
        couplings.setflags(write=False)
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "couplings", couplings)

    @property
    def n_spins(self) -> int:
        return self.fields.shape[0]

    @property
    def n_couplings(self) -> int:
        """Number of nonzero pairwise couplings."""
        return int(np.count_nonzero(self.couplings))

    def symmetric_couplings(self) -> np.ndarray:
        """Dense symmetric matrix J + J.T (zero diagonal), used by solvers."""
        return self.couplings + self.couplings.T

    def to_dict(self) -> dict:
        rows, cols = np.nonzero(self.couplings)
        return {
            "n": self.n_spins,
            "h": [float(v) for v in self.fields],
            "j": [
                [int(i), int(j), float(self.couplings[i, j])]
                for i, j in zip(rows, cols)
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "IsingProblem":
        n = int(payload["n"])
        fields = np.asarray(payload["h"], dtype=np.float64)
        couplings = np.zeros((n, n))
        for i, j, value in payload["j"]:
            i, j = int(i), int(j)
            if not 0 <= i < j < n:
                raise ValueError(f"coupling index ({i}, {j}) out of range for n={n}")
            couplings[i, j] = float(value)
        return cls(fields=fields, couplings=couplings)


@dataclass(frozen=True)
class SpinState:
    """A spin assignment together with its energy under some problem."""

    spins: np.ndarray  # (n,) int8, +/-1
    energy: float

    def __post_init__(self):
        spins = np.ascontiguousarray(np.asarray(self.spins, dtype=np.int8))
        if spins.ndim != 1 or not np.isin(spins, (-1, 1)).all():
            raise ValueError("spins must be a vector of -1/+1")
        spins.setflags(write=False)
        object.__setattr__(self, "spins", spins)
        object.__setattr__(self, "energy", float(self.energy))


def energy_of(problem: IsingProblem, spins: np.ndarray) -> float:
    """Exact energy of a spin vector: h.s + sum over pairs J_ij s_i s_j."""
    spins = np.asarray(spins, dtype=np.float64)
    if spins.shape != (problem.n_spins,):
        raise ValueError("spin vector length must equal n_spins")
    return float(problem.fields @ spins + spins @ (problem.couplings @ spins))


def build_qaml(cache: CorrelationCache, regularization: float = 0.0) -> IsingProblem:
    """Single-shot boosting problem over binary inclusion of each classifier.

    Minimizing this problem selects a subset of classifiers: fields are
    regularization - linear[i] + half the upper-row sum of quad, and each
    pairwise coupling is a quarter of the corresponding quad entry.
    """
    if regularization < 0:
        raise ValueError("regularization must be >= 0")
    upper = np.triu(cache.quad, 1)
    fields = regularization - cache.linear + 0.5 * upper.sum(axis=1)
    return IsingProblem(fields=fields, couplings=0.25 * upper)


def build_zoom(
    cache: CorrelationCache, mu: np.ndarray, sigma: float
) -> IsingProblem:
    """Refinement problem around the current weights ``mu`` at breadth ``sigma``.

    A spin s_k proposes moving weight k to mu[k] + sigma*s_k; the energy of
    a spin vector differs from half the squared-error change of that move by
    a constant.  The linear part includes the diagonal quad term (k == j).
    """
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (cache.n_total,):
        raise ValueError("mu length must equal the classifier count")
    if not 0 < sigma <= 1:
        raise ValueError("sigma must lie in (0, 1]")
    fields = sigma * (cache.quad @ mu - cache.linear)
    return IsingProblem(fields=fields, couplings=sigma**2 * np.triu(cache.quad, 1))


def prune(problem: IsingProblem, keep_fraction: float) -> IsingProblem:
    """Zero all but the ceil(keep_fraction * nnz) largest-|J| couplings.

    Fields are untouched.  Ties in |J| keep the lexicographically smallest
    (i, j).  A small epsilon guards the ceil against float noise so that,
    e.g., a computed 2.0000000000000004 still keeps exactly 2.
    """
    if not 0 < keep_fraction <= 1:
        raise ValueError("keep_fraction must lie in (0, 1]")
    rows, cols = np.nonzero(problem.couplings)
    nnz = rows.size
    if nnz == 0:
        raise ValueError("problem has no couplings to prune")
    keep = max(1, math.ceil(keep_fraction * nnz - 1e-9))
    if keep >= nnz:
        return problem
    values = problem.couplings[rows, cols]
    order = np.lexsort((cols, rows, -np.abs(values)))[:keep]
    kept = np.zeros_like(problem.couplings)
    kept[rows[order], cols[order]] = values[order]
    return IsingProblem(fields=problem.fields, couplings=kept)


def random_gauge(n: int, seed: int) -> np.ndarray:
    """Uniformly random +/-1 vector of length n (deterministic in seed)."""
    rng = np.random.default_rng(seed)
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=n)


def apply_gauge(problem: IsingProblem, gauge: np.ndarray) -> IsingProblem:
    """Conjugate the problem by per-spin sign flips.

    energy_of(apply_gauge(p, g), g*s) == energy_of(p, s) for every s, so the
    spectrum is unchanged; only the encoding of states differs.
    """
    gauge = np.asarray(gauge)
    if gauge.shape != (problem.n_spins,) or not np.isin(gauge, (-1, 1)).all():
        raise ValueError("gauge must be a length-n vector of -1/+1")
    gauge = gauge.astype(np.float64)
    return IsingProblem(
        fields=problem.fields * gauge,
        couplings=problem.couplings * np.outer(gauge, gauge),
    )
