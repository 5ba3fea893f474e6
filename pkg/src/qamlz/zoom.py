"""Iterative zoom training: shrink the search breadth while refining weights.

Each iteration t proposes a +/-1 direction per classifier by minimizing an
Ising problem built from the correlation cache at breadth sigma = base**t,
then commits mu <- mu + s * base**(t+1).  Two stochastic flip passes guard
against overfitting the training energy, and near-ground solver states can
branch off frozen weight snapshots that join the final ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .anneal import ExcitedStateCriteria, Solver, select_excited
from .ising import build_zoom, prune
from .seeds import spawn
from .weak import CorrelationCache

_SOLVE_STREAM = 1
_FLIP_STREAM = 2


def _as_schedule(values: Sequence[float], name: str) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if not out:
        raise ValueError(f"{name} must have at least one entry")
    return out


def schedule_value(schedule: Sequence, t: int):
    """Entry t of a schedule, repeating the last entry past the end."""
    return schedule[t] if t < len(schedule) else schedule[-1]


@dataclass(frozen=True)
class ZoomConfig:
    """Hyperparameters of the zoom loop.

    Schedules may be shorter than ``iterations``; their last value repeats.
    ``gauge_counts`` is carried for provenance only — sign-flip re-encodings
    are an error-mitigation step for analog hardware and are never executed
    here.
    """

    zoom_base: float = 0.5
    iterations: int = 8
    worse_flip_probs: tuple[float, ...] = (0.16, 0.08, 0.04, 0.02, 0.01)
    uniform_flip_probs: tuple[float, ...] = (0.08, 0.04, 0.02, 0.01, 0.005)
    excited_distances: tuple[float, ...] = (0.08, 0.04, 0.02, 0.01)
    excited_caps: tuple[int, ...] = (16, 4, 1)
    keep_fraction: float = 0.05
    seed: int = 0
    gauge_counts: tuple[int, ...] = (50, 10, 1)

    def __post_init__(self):
        if not 0 < self.zoom_base < 1:
            raise ValueError("zoom_base must lie strictly between 0 and 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 < self.keep_fraction <= 1:
            raise ValueError("keep_fraction must lie in (0, 1]")
        p = _as_schedule(self.worse_flip_probs, "worse_flip_probs")
        q = _as_schedule(self.uniform_flip_probs, "uniform_flip_probs")
        d = _as_schedule(self.excited_distances, "excited_distances")
        caps = tuple(int(v) for v in self.excited_caps)
        for name, probs in (("worse_flip_probs", p), ("uniform_flip_probs", q)):
            if any(not 0 <= v <= 1 for v in probs):
                raise ValueError(f"{name} entries must lie in [0, 1]")
            if any(a < b for a, b in zip(probs, probs[1:])):
                raise ValueError(f"{name} must be non-increasing")
        horizon = max(self.iterations, len(p), len(q))
        for t in range(horizon):
            if schedule_value(q, t) > schedule_value(p, t):
                raise ValueError(
                    "uniform flip probability must not exceed the conditional one"
                )
        if any(v < 0 for v in d):
            raise ValueError("excited_distances must be >= 0")
        if not caps or any(v < 1 for v in caps):
            raise ValueError("excited_caps must be >= 1")
        object.__setattr__(self, "worse_flip_probs", p)
        object.__setattr__(self, "uniform_flip_probs", q)
        object.__setattr__(self, "excited_distances", d)
        object.__setattr__(self, "excited_caps", caps)
        object.__setattr__(self, "gauge_counts", tuple(int(v) for v in self.gauge_counts))

    def worse_flip_at(self, t: int) -> float:
        return schedule_value(self.worse_flip_probs, t)

    def uniform_flip_at(self, t: int) -> float:
        return schedule_value(self.uniform_flip_probs, t)

    def distance_at(self, t: int) -> float:
        return schedule_value(self.excited_distances, t)

    def cap_at(self, t: int) -> int:
        return schedule_value(self.excited_caps, t)


def flips_disabled(config: ZoomConfig) -> ZoomConfig:
    """Copy of ``config`` with both flip passes turned off."""
    return replace(config, worse_flip_probs=(0.0,), uniform_flip_probs=(0.0,))


@dataclass(frozen=True)
class ZoomState:
    """Weights after t committed updates, with the breadth base**t."""

    mu: np.ndarray
    t: int
    sigma: float

    def __post_init__(self):
        mu = np.ascontiguousarray(np.asarray(self.mu, dtype=np.float64))
        if mu.ndim != 1:
            raise ValueError("mu must be a vector")
        if not np.isfinite(mu).all():
            raise ValueError("mu must be finite")
        if self.t < 0:
            raise ValueError("t must be >= 0")
        if not 0 < self.sigma <= 1:
            raise ValueError("sigma must lie in (0, 1]")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)


def initial_state(n: int) -> ZoomState:
    return ZoomState(mu=np.zeros(n), t=0, sigma=1.0)


def sigma_at(zoom_base: float, t: int) -> float:
    """Search breadth at iteration t: zoom_base**t."""
    if not 0 < zoom_base < 1:
        raise ValueError("zoom_base must lie strictly between 0 and 1")
    if t < 0 or int(t) != t:
        raise ValueError("t must be a non-negative integer")
    return float(zoom_base) ** int(t)


def update_mu(state: ZoomState, spins: np.ndarray, zoom_base: float) -> ZoomState:
    """Commit one zoom step: mu(t+1) = mu(t) + spins * zoom_base**(t+1)."""
    spins = np.asarray(spins)
    if spins.shape != state.mu.shape:
        raise ValueError("spin vector length must match mu")
    if not np.isin(spins, (-1, 1)).all():
        raise ValueError("spins must be -1/+1")
    new_sigma = sigma_at(zoom_base, state.t + 1)
    return ZoomState(
        mu=state.mu + spins.astype(np.float64) * new_sigma,
        t=state.t + 1,
        sigma=new_sigma,
    )


def normalized_training_energy(
    cache: CorrelationCache, mu: np.ndarray, n_examples: Optional[int] = None
) -> float:
    """Training-set objective, scaled by 1/n_examples (default: 1/n_train).

    Equals (sum over pairs of mu_i mu_j quad[i,j] minus mu . linear) divided
    by the example count; choosing spins that lower this is equivalent to
    lowering the training squared error of the weighted ensemble.
    """
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (cache.n_total,):
        raise ValueError("mu length must equal the classifier count")
    scale = cache.n_train if n_examples is None else n_examples
    upper = np.triu(cache.quad, 1)
    return float((mu @ upper @ mu - cache.linear @ mu) / scale)


def regularize_flips(
    state_before: ZoomState,
    state_after: ZoomState,
    spins: np.ndarray,
    cache: CorrelationCache,
    config: ZoomConfig,
    t: int,
    seed: int,
) -> tuple[np.ndarray, int, int]:
    """Two-pass stochastic flips on the proposed spin vector.

    Pass 1 walks coordinates in ascending order.  Where committing the
    update for coordinate i raises the normalized training energy relative
    to holding mu[i] back (all other coordinates at their current, possibly
    already-flipped, post-update values), the spin is flipped with
    probability worse_flip_at(t).  Pass 2 flips every spin independently
    with probability uniform_flip_at(t).  Returns the new spin vector and
    the two flip counts.  Deterministic in ``seed``.
    """
    spins = np.asarray(spins)
    rng = np.random.default_rng(seed)
    s = spins.astype(np.int8).copy()
    m = state_after.mu.copy()
    quad = cache.quad
    p = config.worse_flip_at(t)
    q = config.uniform_flip_at(t)
    n_worse = 0
    for i in range(s.shape[0]):
        # Energy change of committing coordinate i, up to positive factors,
        # is s[i] * (sum_{j != i} quad[i,j] m[j] - linear[i]).
        gradient = quad[i] @ m - quad[i, i] * m[i] - cache.linear[i]
        if s[i] * gradient > 0 and rng.random() < p:
            s[i] = -s[i]
            m[i] = state_before.mu[i] + s[i] * state_after.sigma
            n_worse += 1
    uniform_mask = rng.random(s.shape[0]) < q
    s[uniform_mask] = -s[uniform_mask]
    return s, n_worse, int(uniform_mask.sum())


@dataclass(frozen=True)
class ZoomRecord:
    """One completed iteration of the zoom loop."""

    t: int
    sigma: float
    mu: tuple[float, ...]
    training_energy: float
    solver_energies: tuple[float, ...]
    conditional_flips: int
    uniform_flips: int
    new_branches: int

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "t": self.t,
            "sigma": self.sigma,
            "mu": list(self.mu),
            "training_energy": self.training_energy,
            "solver_energies": list(self.solver_energies),
            "conditional_flips": self.conditional_flips,
            "uniform_flips": self.uniform_flips,
            "new_branches": self.new_branches,
        }


@dataclass(frozen=True)
class EnsembleMember:
    """A weight vector contributed to the final ensemble.

    ``branched_at`` is the iteration whose excited state spawned this
    member, or None for the fully-trained main path.
    """

    weights: np.ndarray
    branched_at: Optional[int]
    energy: float

    def __post_init__(self):
        weights = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)


@dataclass(frozen=True)
class ZoomOutcome:
    final_state: ZoomState
    ensemble: tuple[EnsembleMember, ...]
    trace: tuple[ZoomRecord, ...]


def run_zoom(cache: CorrelationCache, solver: Solver, config: ZoomConfig) -> ZoomOutcome:
    """Run the full zoom loop over ``config.iterations`` iterations.

    Per iteration: build the refinement problem at the current (mu, sigma),
    prune weak couplings, solve, select near-ground states, commit the best
    one (after the flip passes), and freeze the remaining selected states as
    branch snapshots.  The ensemble is the final main-path weights followed
    by all branch snapshots in creation order.
    """
    state = initial_state(cache.n_total)
    branches: list[EnsembleMember] = []
    records: list[ZoomRecord] = []
    last_best_energy = 0.0
    for t in range(config.iterations):
        problem = build_zoom(cache, state.mu, state.sigma)
        if config.keep_fraction < 1.0 and problem.n_couplings > 0:
            problem = prune(problem, config.keep_fraction)
        try:
            result = solver.solve(problem, spawn(config.seed, _SOLVE_STREAM, t))
        except Exception as exc:
            raise RuntimeError(
                f"solver '{solver.solver_id}' failed at iteration {t}: {exc}"
            ) from exc
        criteria = ExcitedStateCriteria(
            energy_distance=config.distance_at(t), max_states=config.cap_at(t)
        )
        selected = select_excited(result, criteria)
        best = selected[0]
        last_best_energy = best.energy
        for excited in selected[1:]:
            branch = update_mu(state, excited.spins, config.zoom_base)
            branches.append(
                EnsembleMember(
                    weights=branch.mu, branched_at=t, energy=excited.energy
                )
            )
        proposed = update_mu(state, best.spins, config.zoom_base)
        flipped, n_worse, n_uniform = regularize_flips(
            state,
            proposed,
            best.spins,
            cache,
            config,
            t,
            spawn(config.seed, _FLIP_STREAM, t),
        )
        sigma_used = state.sigma
        state = update_mu(state, flipped, config.zoom_base)
        records.append(
            ZoomRecord(
                t=t,
                sigma=sigma_used,
                mu=tuple(float(v) for v in state.mu),
                training_energy=normalized_training_energy(cache, state.mu),
                solver_energies=tuple(st.energy for st in selected),
                conditional_flips=n_worse,
                uniform_flips=n_uniform,
                new_branches=len(selected) - 1,
            )
        )
    main = EnsembleMember(weights=state.mu, branched_at=None, energy=last_best_energy)
    return ZoomOutcome(
        final_state=state,
        ensemble=(main, *branches),
        trace=tuple(records),
    )
