"""Solver backends: Metropolis simulated annealing and exhaustive enumeration.

Both return an AnnealResult (distinct states, ascending energy) behind the
same small interface, so callers can swap solvers freely.  The SA kernel is
numba-compiled with an inline splitmix64 generator; every read draws from
its own seeded stream, which makes results bit-identical regardless of how
many threads execute the reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Optional, Protocol

import numpy as np
from numba import njit, prange

from .ising import IsingProblem, SpinState, energy_of
from .seeds import spawn


class SolverCapacityError(RuntimeError):
    """The requested problem exceeds what the solver can handle."""


@dataclass(frozen=True)
class SaSchedule:
    """Linear inverse-temperature ramp for simulated annealing."""

    beta_initial: float = 0.1
    beta_final: float = 5.0
    sweeps: int = 1000
    reads: int = 1000

    def __post_init__(self):
        if not 0 < self.beta_initial < self.beta_final:
            raise ValueError("need 0 < beta_initial < beta_final")
        if self.sweeps < 1 or self.reads < 1:
            raise ValueError("sweeps and reads must be >= 1")


@dataclass(frozen=True)
class ExcitedStateCriteria:
    """Acceptance window for near-ground states.

    ``energy_distance`` is the relative distance from the ground energy,
    ``max_states`` the cap on how many states may be returned.
    """

    energy_distance: float = 0.08
    max_states: int = 16

    def __post_init__(self):
        if self.energy_distance < 0:
            raise ValueError("energy_distance must be >= 0")
        if self.max_states < 1:
            raise ValueError("max_states must be >= 1")


@dataclass(frozen=True)
class AnnealResult:
    """Distinct solver states in ascending energy order; states[0] is best."""

    states: tuple[SpinState, ...]
    solver_id: str
    seed: int

    def __post_init__(self):
        if not self.states:
            raise ValueError("result must contain at least one state")
        energies = [st.energy for st in self.states]
        if any(a > b for a, b in zip(energies, energies[1:])):
            raise ValueError("states must be sorted ascending by energy")
        keys = {st.spins.tobytes() for st in self.states}
        if len(keys) != len(self.states):
            raise ValueError("duplicate spin vectors in result")

    @property
    def best(self) -> SpinState:
        return self.states[0]


# --- splitmix64 bits, kept in sync with seeds.py -------------------------

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(inline="always", cache=True)
def _mix(x):
    x = (x ^ (x >> _U64(30))) * _MIX1
    x = (x ^ (x >> _U64(27))) * _MIX2
    return x ^ (x >> _U64(31))


@njit(cache=True, parallel=True)
def _metropolis_reads(fields, jsym, read_seeds, beta_initial, dbeta, sweeps):
    """One annealing read per seed; returns final spins and tracked energies.

    Energies are maintained incrementally from the local fields: flipping
    spin i changes the energy by -2*s[i]*f[i] where f[i] = fields[i] +
    sum_k jsym[i, k]*s[k] (jsym has zero diagonal, so f[i] excludes i).
    """
    n_reads = read_seeds.shape[0]
    n = fields.shape[0]
    spins_out = np.empty((n_reads, n), dtype=np.int8)
    energies = np.empty(n_reads, dtype=np.float64)
    for r in prange(n_reads):
        state = read_seeds[r]
        s = np.empty(n, dtype=np.float64)
        for i in range(n):
            state += _GOLDEN
            z = _mix(state)
            s[i] = 1.0 if (z >> _U64(63)) == _U64(1) else -1.0
        f = np.empty(n, dtype=np.float64)
        for i in range(n):
            acc = fields[i]
            for k in range(n):
                acc += jsym[i, k] * s[k]
            f[i] = acc
        e = 0.0
        for i in range(n):
            e += 0.5 * s[i] * (fields[i] + f[i])
        beta = beta_initial
        for _ in range(sweeps):
            for _ in range(n):
                state += _GOLDEN
                z = _mix(state)
                i = int((_U64(z >> _U64(32)) * _U64(n)) >> _U64(32))
                de = -2.0 * s[i] * f[i]
                accept = True
                if de > 0.0:
                    state += _GOLDEN
                    u = float(_mix(state) >> _U64(11)) * _INV53
                    accept = u < math.exp(-beta * de)
                if accept:
                    s[i] = -s[i]
                    for k in range(n):
                        f[k] += 2.0 * jsym[k, i] * s[i]
                    e += de
            beta += dbeta
        for i in range(n):
            spins_out[r, i] = np.int8(s[i])
        energies[r] = e
    return spins_out, energies


def _raw_reads(problem: IsingProblem, schedule: SaSchedule, seed: int):
    """Kernel outputs before aggregation (spins per read, tracked energies)."""
    read_seeds = np.array(
        [spawn(seed, r) for r in range(schedule.reads)], dtype=np.uint64
    )
    dbeta = (schedule.beta_final - schedule.beta_initial) / schedule.sweeps
    return _metropolis_reads(
        problem.fields,
        problem.symmetric_couplings(),
        read_seeds,
        schedule.beta_initial,
        dbeta,
        schedule.sweeps,
    )


def _aggregate(problem: IsingProblem, spins: np.ndarray, solver_id: str, seed: int) -> AnnealResult:
    # Energies are recomputed exactly here so deduplication and ordering do
    # not depend on accumulated float noise from the incremental updates.
    seen: dict[bytes, SpinState] = {}
    for row in spins:
        key = row.tobytes()
        if key not in seen:
            seen[key] = SpinState(spins=row, energy=energy_of(problem, row))
    ordered = sorted(seen.values(), key=lambda st: (st.energy, st.spins.tobytes()))
    return AnnealResult(states=tuple(ordered), solver_id=solver_id, seed=seed)


def solve_sa(problem: IsingProblem, schedule: SaSchedule, seed: int) -> AnnealResult:
    """Simulated annealing under a linear beta ramp.

    Each read starts from a random spin vector and performs ``sweeps``
    sweeps of n single-spin Metropolis proposals (downhill moves always
    accepted, uphill with probability exp(-beta*dE)); beta increases by
    (beta_final - beta_initial)/sweeps after every sweep.  Final states of
    all reads are deduplicated and sorted ascending by energy.
    """
    spins, _ = _raw_reads(problem, schedule, seed)
    return _aggregate(problem, spins, solver_id="sa", seed=seed)


_ENUMERATION_LIMIT = 24
_CHUNK_BITS = 18


def _spins_for_indices(indices: np.ndarray, n: int) -> np.ndarray:
    bits = (indices[:, None] >> np.arange(n)[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)


def solve_exact(
    problem: IsingProblem, max_states: Optional[int] = None, seed: int = 0
) -> AnnealResult:
    """Enumerate every spin vector and return states sorted by energy.

    Guarded at n_spins <= 24.  ``max_states`` truncates the output (ties at
    equal energy are broken by enumeration index, i.e. stable).  ``seed`` is
    recorded for provenance only; the result does not depend on it.
    """
    n = problem.n_spins
    if n > _ENUMERATION_LIMIT:
        raise SolverCapacityError(
            f"exact enumeration supports at most {_ENUMERATION_LIMIT} spins, got {n}"
        )
    total = 1 << n
    energies = np.empty(total)
    upper = problem.couplings
    for start in range(0, total, 1 << _CHUNK_BITS):
        stop = min(start + (1 << _CHUNK_BITS), total)
        spins = _spins_for_indices(np.arange(start, stop), n).astype(np.float64)
        energies[start:stop] = spins @ problem.fields + np.einsum(
            "ij,ij->i", spins @ upper, spins
        )
    order = np.argsort(energies, kind="stable")
    if max_states is not None:
        if max_states < 1:
            raise ValueError("max_states must be >= 1")
        order = order[:max_states]
    spins = _spins_for_indices(order, n)
    states = tuple(
        SpinState(spins=row, energy=float(energies[idx]))
        for idx, row in zip(order, spins)
    )
    return AnnealResult(states=states, solver_id="exact", seed=seed)


def select_excited(
    result: AnnealResult, criteria: ExcitedStateCriteria
) -> list[SpinState]:
    """States close enough to the best one, capped at ``max_states``.

    The best state always qualifies.  Others pass when their energy is
    below (1 - d)*E_best for E_best < 0, below (1 + d)*E_best for
    E_best > 0, or exactly 0 when E_best == 0 (the two-sided limit).
    """
    ground = result.states[0].energy
    if ground < 0:
        threshold = (1.0 - criteria.energy_distance) * ground
    elif ground > 0:
        threshold = (1.0 + criteria.energy_distance) * ground
    else:
        threshold = 0.0
    selected = [
        st
        for st in result.states
        if st.energy == ground or st.energy < threshold
    ]
    return selected[: criteria.max_states]


class Solver(Protocol):
    """Anything that minimizes an IsingProblem and reports ranked states."""

    solver_id: str

    def solve(self, problem: IsingProblem, seed: int) -> AnnealResult: ...


@dataclass(frozen=True)
class SaSolver:
    """Simulated-annealing backend with a fixed schedule."""

    schedule: SaSchedule = SaSchedule()
    solver_id: ClassVar[str] = "sa"

    def solve(self, problem: IsingProblem, seed: int) -> AnnealResult:
        return solve_sa(problem, self.schedule, seed)


@dataclass(frozen=True)
class ExactSolver:
    """Exhaustive enumeration backend (small problems / oracle use)."""

    max_states: int = 64
    solver_id: ClassVar[str] = "exact"

    def solve(self, problem: IsingProblem, seed: int) -> AnnealResult:
        return solve_exact(problem, max_states=self.max_states, seed=seed)
