import math

import numpy as np
import pytest

from qamlz import (
    AnnealResult,
    ExactSolver,
    ExcitedStateCriteria,
    IsingProblem,
    SaSchedule,
    SaSolver,
    SolverCapacityError,
    SpinState,
    energy_of,
    select_excited,
    solve_exact,
    solve_sa,
)
from qamlz.anneal import _raw_reads


def _problem(fields, couplings_entries=(), n=None):
    fields = np.asarray(fields, dtype=np.float64)
    n = n or fields.shape[0]
    j = np.zeros((n, n))
    for i, k, v in couplings_entries:
        j[i, k] = v
    return IsingProblem(fields=fields, couplings=j)


def _random_problem(n, seed):
    rng = np.random.default_rng(seed)
    return IsingProblem(
        fields=rng.uniform(-1, 1, n),
        couplings=np.triu(rng.uniform(-1, 1, (n, n)), 1),
    )


def _result(energy_spin_pairs, solver_id="test"):
    states = tuple(
        SpinState(spins=np.array(spins, dtype=np.int8), energy=e)
        for e, spins in energy_spin_pairs
    )
    return AnnealResult(states=states, solver_id=solver_id, seed=0)


# --- dataclass validation ------------------------------------------------------


def test_schedule_validation():
    with pytest.raises(ValueError):
        SaSchedule(beta_initial=0.0, beta_final=5.0)
    with pytest.raises(ValueError):
        SaSchedule(beta_initial=5.0, beta_final=0.1)
    with pytest.raises(ValueError):
        SaSchedule(sweeps=0)
    with pytest.raises(ValueError):
        SaSchedule(reads=0)


def test_criteria_validation():
    with pytest.raises(ValueError):
        ExcitedStateCriteria(energy_distance=-0.1)
    with pytest.raises(ValueError):
        ExcitedStateCriteria(max_states=0)


def test_result_requires_sorted_distinct_states():
    with pytest.raises(ValueError, match="ascending"):
        _result([(1.0, [1]), (0.0, [-1])])
    with pytest.raises(ValueError, match="duplicate"):
        _result([(0.0, [1]), (0.0, [1])])
    with pytest.raises(ValueError):
        AnnealResult(states=(), solver_id="x", seed=0)
    r = _result([(0.0, [-1]), (2.0, [1])])
    assert r.best.energy == 0.0


# --- solve_exact -----------------------------------------------------------------


def test_exact_single_spin():
    result = solve_exact(_problem([2.0]))
    assert np.array_equal(result.best.spins, [-1])
    assert result.best.energy == -2.0
    assert [s.energy for s in result.states] == [-2.0, 2.0]
    assert result.solver_id == "exact"


def test_exact_degenerate_pair():
    result = solve_exact(_problem([0.0, 0.0], [(0, 1, -1.0)]))
    assert [s.energy for s in result.states] == [-1.0, -1.0, 1.0, 1.0]
    # ties broken by enumeration order: all-minus comes before all-plus
    assert np.array_equal(result.states[0].spins, [-1, -1])
    assert np.array_equal(result.states[1].spins, [1, 1])


def test_exact_enumerates_and_truncates():
    p = _random_problem(4, seed=0)
    full = solve_exact(p)
    assert len(full.states) == 16
    energies = np.array([s.energy for s in full.states])
    assert np.all(np.diff(energies) >= 0)
    top3 = solve_exact(p, max_states=3)
    assert [s.energy for s in top3.states] == [s.energy for s in full.states[:3]]
    for st in full.states:
        assert st.energy == pytest.approx(energy_of(p, st.spins), abs=1e-12)
    with pytest.raises(ValueError):
        solve_exact(p, max_states=0)


def test_exact_refuses_large_problems():
    with pytest.raises(SolverCapacityError, match="25"):
        solve_exact(_problem(np.zeros(25)))


# --- solve_sa --------------------------------------------------------------------


def test_sa_is_deterministic():
    p = _random_problem(8, seed=1)
    schedule = SaSchedule(sweeps=50, reads=30)
    a = solve_sa(p, schedule, seed=5)
    b = solve_sa(p, schedule, seed=5)
    assert a.seed == b.seed == 5
    assert len(a.states) == len(b.states)
    for x, y in zip(a.states, b.states):
        assert x.energy == y.energy and np.array_equal(x.spins, y.spins)


def test_sa_cold_start_always_descends():
    # at beta ~ 50 an uphill move of dE = 10 is effectively impossible,
    # so every read must land in the single minimum
    p = _problem([5.0])
    result = solve_sa(p, SaSchedule(50.0, 51.0, 10, 64), seed=3)
    assert len(result.states) == 1
    assert np.array_equal(result.best.spins, [-1])
    assert result.best.energy == -5.0


def test_sa_uphill_acceptance_rate_matches_metropolis():
    # single spin, h = 0.5, one sweep at beta = 1: a read started at -1
    # climbs with probability exp(-1), one started at +1 always drops, so
    # P(final = +1) = exp(-1)/2
    p = _problem([0.5])
    spins, _ = _raw_reads(p, SaSchedule(1.0, 1.0000001, 1, 4000), seed=9)
    frac_up = float(np.mean(spins[:, 0] == 1))
    assert frac_up == pytest.approx(0.5 * math.exp(-1), abs=0.025)


def test_sa_tracked_energy_matches_recomputation():
    p = _random_problem(12, seed=2)
    spins, tracked = _raw_reads(p, SaSchedule(0.1, 5.0, 50, 40), seed=4)
    exact = np.array([energy_of(p, row) for row in spins])
    assert np.abs(tracked - exact).max() <= 1e-9


def test_sa_finds_exact_ground_on_small_instances():
    for seed in range(5):
        p = _random_problem(10, seed=seed)
        exact = solve_exact(p)
        sa = solve_sa(p, SaSchedule(), seed=seed)
        assert sa.best.energy == pytest.approx(exact.best.energy, abs=1e-12)
        assert exact.best.energy <= sa.best.energy + 1e-12


# --- select_excited -------------------------------------------------------------


def test_excited_window_below_negative_ground():
    r = _result(
        [(-10.0, [-1, -1]), (-9.5, [-1, 1]), (-9.2, [1, -1]), (-9.1, [1, 1])]
    )
    picked = select_excited(r, ExcitedStateCriteria(energy_distance=0.08, max_states=16))
    assert [s.energy for s in picked] == [-10.0, -9.5]  # -9.2 is not strictly inside


def test_excited_zero_distance_keeps_degenerate_grounds():
    r = _result([(-10.0, [-1, -1]), (-10.0, [1, 1]), (-9.0, [1, -1])])
    picked = select_excited(r, ExcitedStateCriteria(energy_distance=0.0, max_states=16))
    assert [s.energy for s in picked] == [-10.0, -10.0]


def test_excited_cap_applies_after_filtering():
    r = _result([(-10.0, [-1, -1]), (-9.9, [-1, 1]), (-9.8, [1, -1])])
    picked = select_excited(r, ExcitedStateCriteria(energy_distance=0.08, max_states=1))
    assert len(picked) == 1 and picked[0].energy == -10.0


def test_excited_zero_ground_passes_only_zero():
    r = _result([(0.0, [-1, -1]), (0.0, [1, 1]), (0.5, [1, -1])])
    picked = select_excited(r, ExcitedStateCriteria(energy_distance=0.08, max_states=16))
    assert [s.energy for s in picked] == [0.0, 0.0]


def test_excited_window_above_positive_ground():
    r = _result([(10.0, [-1, -1]), (10.5, [-1, 1]), (11.0, [1, -1])])
    picked = select_excited(r, ExcitedStateCriteria(energy_distance=0.08, max_states=16))
    assert [s.energy for s in picked] == [10.0, 10.5]  # threshold 10.8, 11.0 is out


# --- solver objects ---------------------------------------------------------------


def test_sa_solver_wraps_schedule():
    p = _random_problem(6, seed=7)
    solver = SaSolver(SaSchedule(sweeps=40, reads=20))
    direct = solve_sa(p, SaSchedule(sweeps=40, reads=20), seed=11)
    via_solver = solver.solve(p, seed=11)
    assert SaSolver.solver_id == "sa"
    assert via_solver.best.energy == direct.best.energy
    assert np.array_equal(via_solver.best.spins, direct.best.spins)


def test_exact_solver_truncates():
    p = _random_problem(5, seed=8)
    solver = ExactSolver(max_states=4)
    result = solver.solve(p, seed=0)
    assert ExactSolver.solver_id == "exact"
    assert len(result.states) == 4
    assert result.best.energy == solve_exact(p).best.energy
