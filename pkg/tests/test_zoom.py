from dataclasses import dataclass

import numpy as np
import pytest

from qamlz import (
    AnnealResult,
    AugmentedClassifierSet,
    CorrelationCache,
    ExactSolver,
    SaSchedule,
    SaSolver,
    SpinState,
    WeakClassifierBank,
    ZoomConfig,
    ZoomState,
    build_bank,
    build_cache,
    build_zoom,
    flips_disabled,
    generate_synthetic,
    initial_state,
    normalized_training_energy,
    prune,
    regularize_flips,
    run_zoom,
    select_excited,
    sigma_at,
    solve_exact,
    update_mu,
)
from qamlz.anneal import ExcitedStateCriteria
from qamlz.seeds import spawn
from qamlz.zoom import schedule_value


def _handmade_cache(linear, quad, n_train):
    n = len(linear)
    bank = WeakClassifierBank(
        sorted_values=np.tile(np.arange(4.0)[:, None], (1, n)),
        orientation=np.ones(n, dtype=np.int8),
        constant=np.zeros(n, dtype=bool),
    )
    cset = AugmentedClassifierSet(bank=bank, offset_bound=0)
    return CorrelationCache(
        linear=np.asarray(linear, dtype=np.float64),
        quad=np.asarray(quad, dtype=np.float64),
        n_train=n_train,
        classifier_set=cset,
    )


@dataclass(frozen=True)
class _FixedSolver:
    """Returns a canned result regardless of the problem."""

    result: AnnealResult
    solver_id: str = "stub"

    def solve(self, problem, seed):
        return self.result


@dataclass(frozen=True)
class _BoomSolver:
    solver_id: str = "boom"

    def solve(self, problem, seed):
        raise ValueError("synthetic failure")


def _two_state_result():
    return AnnealResult(
        states=(
            SpinState(spins=np.array([1, 1]), energy=-5.0),
            SpinState(spins=np.array([-1, 1]), energy=-4.9),
        ),
        solver_id="stub",
        seed=0,
    )


# --- schedules and state --------------------------------------------------------


def test_schedule_value_repeats_last_entry():
    assert schedule_value((1.0, 2.0, 3.0), 0) == 1.0
    assert schedule_value((1.0, 2.0, 3.0), 2) == 3.0
    assert schedule_value((1.0, 2.0, 3.0), 50) == 3.0


def test_sigma_at_examples():
    assert sigma_at(0.5, 0) == 1.0
    assert sigma_at(0.5, 3) == 0.125
    assert sigma_at(0.3, 1) == 0.3
    with pytest.raises(ValueError):
        sigma_at(1.0, 2)
    with pytest.raises(ValueError):
        sigma_at(0.5, -1)


def test_update_mu_worked_sequence():
    state = initial_state(1)
    assert state.t == 0 and state.sigma == 1.0 and state.mu[0] == 0.0
    down = update_mu(state, np.array([-1]), 0.5)
    assert down.mu[0] == -0.5 and down.t == 1 and down.sigma == 0.5
    back = update_mu(down, np.array([1]), 0.5)
    assert back.mu[0] == -0.25 and back.t == 2 and back.sigma == 0.25


def test_update_mu_validates_spins():
    state = initial_state(2)
    with pytest.raises(ValueError):
        update_mu(state, np.array([1, 0]), 0.5)
    with pytest.raises(ValueError):
        update_mu(state, np.array([1]), 0.5)


def test_zoom_state_validation():
    with pytest.raises(ValueError):
        ZoomState(mu=np.zeros(2), t=-1, sigma=1.0)
    with pytest.raises(ValueError):
        ZoomState(mu=np.zeros(2), t=0, sigma=0.0)
    with pytest.raises(ValueError):
        ZoomState(mu=np.array([np.nan]), t=0, sigma=1.0)
    state = initial_state(2)
    with pytest.raises(ValueError):
        state.mu[0] = 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        ZoomConfig(zoom_base=1.0)
    with pytest.raises(ValueError):
        ZoomConfig(iterations=0)
    with pytest.raises(ValueError):
        ZoomConfig(keep_fraction=0.0)
    with pytest.raises(ValueError, match="non-increasing"):
        ZoomConfig(worse_flip_probs=(0.1, 0.2))
    with pytest.raises(ValueError, match="must not exceed"):
        ZoomConfig(worse_flip_probs=(0.1,), uniform_flip_probs=(0.2,))
    # the uniform probability may overtake a faster-decaying conditional one
    # further out in the schedule; the whole horizon is checked
    with pytest.raises(ValueError, match="must not exceed"):
        ZoomConfig(worse_flip_probs=(0.1, 0.05), uniform_flip_probs=(0.08,))
    with pytest.raises(ValueError):
        ZoomConfig(worse_flip_probs=())
    with pytest.raises(ValueError):
        ZoomConfig(excited_caps=(0,))
    with pytest.raises(ValueError):
        ZoomConfig(excited_distances=(-0.1,))


def test_config_schedule_lookup_extends():
    cfg = ZoomConfig()
    assert cfg.worse_flip_at(0) == 0.16
    assert cfg.worse_flip_at(100) == 0.01
    assert cfg.uniform_flip_at(100) == 0.005
    assert cfg.distance_at(3) == 0.01 and cfg.distance_at(7) == 0.01
    assert cfg.cap_at(0) == 16 and cfg.cap_at(9) == 1


def test_flips_disabled_copy():
    cfg = ZoomConfig(iterations=3)
    quiet = flips_disabled(cfg)
    assert quiet.worse_flip_probs == (0.0,) and quiet.uniform_flip_probs == (0.0,)
    assert quiet.iterations == 3
    assert cfg.worse_flip_probs[0] == 0.16  # original untouched


# --- normalized training energy ---------------------------------------------------


def test_training_energy_zero_weights():
    cache = _handmade_cache([0.3], [[0.05]], n_train=10)
    assert normalized_training_energy(cache, np.zeros(1)) == 0.0


def test_training_energy_single_classifier():
    cache = _handmade_cache([0.3], [[0.05]], n_train=10)
    assert normalized_training_energy(cache, np.array([0.5])) == pytest.approx(
        -0.3 * 0.5 / 10
    )
    assert normalized_training_energy(
        cache, np.array([0.5]), n_examples=5
    ) == pytest.approx(-0.3 * 0.5 / 5)


def test_training_energy_matches_double_loop():
    train = generate_synthetic(8, 7, 2, 1.0, seed=3)
    cset = AugmentedClassifierSet(bank=build_bank(train), offset_bound=1)
    cache = build_cache(cset, train, full_cross_terms=True)
    rng = np.random.default_rng(0)
    mu = rng.uniform(-1, 1, cache.n_total)
    expected = 0.0
    for i in range(cache.n_total):
        expected -= cache.linear[i] * mu[i]
        for j in range(i + 1, cache.n_total):
            expected += mu[i] * mu[j] * cache.quad[i, j]
    expected /= train.n_examples
    assert normalized_training_energy(cache, mu) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        normalized_training_energy(cache, np.zeros(3))


# --- flip regularization ---------------------------------------------------------


def _flip_setup(spins, linear=0.3):
    cache = _handmade_cache([linear], [[0.05]], n_train=10)
    before = initial_state(1)
    after = update_mu(before, np.asarray(spins), 0.5)
    return cache, before, after


def test_flips_noop_when_probabilities_zero():
    cache, before, after = _flip_setup([-1])
    cfg = flips_disabled(ZoomConfig())
    s, n_worse, n_uniform = regularize_flips(
        before, after, np.array([-1]), cache, cfg, t=0, seed=1
    )
    assert np.array_equal(s, [-1]) and n_worse == 0 and n_uniform == 0


def test_conditional_flip_repairs_worsening_sign():
    # a positively-correlated classifier pushed negative raises the training
    # energy, so with certain conditional flips the sign must come back
    cache, before, after = _flip_setup([-1])
    cfg = ZoomConfig(worse_flip_probs=(1.0,), uniform_flip_probs=(0.0,))
    s, n_worse, n_uniform = regularize_flips(
        before, after, np.array([-1]), cache, cfg, t=0, seed=1
    )
    assert np.array_equal(s, [1]) and n_worse == 1 and n_uniform == 0
    flipped_energy = normalized_training_energy(cache, before.mu + s * after.sigma)
    original_energy = normalized_training_energy(cache, after.mu)
    assert flipped_energy <= original_energy


def test_conditional_flip_skips_improving_sign():
    cache, before, after = _flip_setup([1])
    cfg = ZoomConfig(worse_flip_probs=(1.0,), uniform_flip_probs=(0.0,))
    s, n_worse, _ = regularize_flips(
        before, after, np.array([1]), cache, cfg, t=0, seed=1
    )
    assert np.array_equal(s, [1]) and n_worse == 0


def test_uniform_flip_pass_hits_every_spin_at_probability_one():
    cache, before, after = _flip_setup([1])
    cfg = ZoomConfig(worse_flip_probs=(1.0,), uniform_flip_probs=(1.0,))
    s, n_worse, n_uniform = regularize_flips(
        before, after, np.array([1]), cache, cfg, t=0, seed=1
    )
    # the good sign survives pass 1 untouched, then pass 2 always flips
    assert np.array_equal(s, [-1]) and n_worse == 0 and n_uniform == 1


def test_flips_deterministic_in_seed():
    train = generate_synthetic(10, 10, 2, 1.0, seed=5)
    cset = AugmentedClassifierSet(bank=build_bank(train), offset_bound=1)
    cache = build_cache(cset, train)
    before = initial_state(cache.n_total)
    rng = np.random.default_rng(1)
    spins = rng.choice([-1, 1], cache.n_total)
    after = update_mu(before, spins, 0.5)
    cfg = ZoomConfig(worse_flip_probs=(0.5,), uniform_flip_probs=(0.5,))
    first = regularize_flips(before, after, spins, cache, cfg, t=0, seed=42)
    second = regularize_flips(before, after, spins, cache, cfg, t=0, seed=42)
    assert np.array_equal(first[0], second[0])
    assert first[1:] == second[1:]


# --- run_zoom ---------------------------------------------------------------------


def test_single_classifier_one_iteration():
    cache = _handmade_cache([0.3], [[0.05]], n_train=10)
    cfg = flips_disabled(ZoomConfig(iterations=1, seed=0))
    outcome = run_zoom(cache, ExactSolver(), cfg)
    assert outcome.final_state.mu[0] == 0.5
    assert outcome.final_state.t == 1 and outcome.final_state.sigma == 0.5
    assert len(outcome.ensemble) == 1
    rec = outcome.trace[0]
    assert rec.t == 0 and rec.sigma == 1.0 and rec.mu == (0.5,)
    assert rec.training_energy == pytest.approx(-0.3 * 0.5 / 10)
    assert rec.solver_energies == (-0.3,)
    assert rec.conditional_flips == 0 and rec.uniform_flips == 0
    assert rec.new_branches == 0
    payload = rec.to_dict()
    assert payload["schema"] == 1 and payload["t"] == 0


def test_zoom_matches_manual_loop():
    train = generate_synthetic(12, 12, 3, 1.5, seed=7)
    cset = AugmentedClassifierSet(bank=build_bank(train), offset_bound=1)
    cache = build_cache(cset, train)
    cfg = flips_disabled(
        ZoomConfig(
            iterations=3,
            keep_fraction=1.0,
            excited_distances=(0.5,),
            excited_caps=(2,),
            seed=13,
        )
    )
    solver = ExactSolver(max_states=16)
    outcome = run_zoom(cache, solver, cfg)

    state = initial_state(cache.n_total)
    branch_weights = []
    for t in range(cfg.iterations):
        problem = build_zoom(cache, state.mu, state.sigma)
        result = solver.solve(problem, spawn(cfg.seed, 1, t))
        criteria = ExcitedStateCriteria(
            energy_distance=cfg.distance_at(t), max_states=cfg.cap_at(t)
        )
        selected = select_excited(result, criteria)
        for excited in selected[1:]:
            branch_weights.append(update_mu(state, excited.spins, cfg.zoom_base).mu)
        state = update_mu(state, selected[0].spins, cfg.zoom_base)
        assert outcome.trace[t].mu == tuple(state.mu)
        assert outcome.trace[t].training_energy == normalized_training_energy(
            cache, state.mu
        )
    assert np.array_equal(outcome.final_state.mu, state.mu)
    assert len(outcome.ensemble) == 1 + len(branch_weights)
    for member, expected in zip(outcome.ensemble[1:], branch_weights):
        assert np.array_equal(member.weights, expected)
        assert member.branched_at is not None


def test_zoom_weights_stay_inside_geometric_envelope():
    train = generate_synthetic(20, 20, 2, 1.0, seed=9)
    cset = AugmentedClassifierSet(bank=build_bank(train), offset_bound=1)
    cache = build_cache(cset, train)
    cfg = ZoomConfig(iterations=6, seed=3)
    outcome = run_zoom(cache, SaSolver(SaSchedule(sweeps=60, reads=20)), cfg)
    bound = sum(0.5**u for u in range(1, 7))
    assert np.abs(outcome.final_state.mu).max() <= bound + 1e-12


def test_zoom_deterministic_with_sa_solver():
    train = generate_synthetic(15, 15, 2, 1.0, seed=4)
    cset = AugmentedClassifierSet(bank=build_bank(train), offset_bound=1)
    cache = build_cache(cset, train)
    cfg = ZoomConfig(iterations=3, seed=21)
    solver = SaSolver(SaSchedule(sweeps=50, reads=25))
    first = run_zoom(cache, solver, cfg)
    second = run_zoom(cache, solver, cfg)
    assert first.trace == second.trace
    assert np.array_equal(first.final_state.mu, second.final_state.mu)


def test_excited_states_branch_and_join_ensemble():
    cache = _handmade_cache(
        [0.1, 0.1], [[0.2, 0.05], [0.05, 0.2]], n_train=10
    )
    cfg = flips_disabled(
        ZoomConfig(
            iterations=2,
            keep_fraction=1.0,
            excited_distances=(0.08,),
            excited_caps=(16,),
            seed=0,
        )
    )
    outcome = run_zoom(cache, _FixedSolver(_two_state_result()), cfg)
    # best state (+1,+1) drives the main path; (-1,+1) branches each iteration
    assert np.array_equal(outcome.final_state.mu, [0.75, 0.75])
    weights = [tuple(m.weights) for m in outcome.ensemble]
    assert weights == [(0.75, 0.75), (-0.5, 0.5), (0.25, 0.75)]
    assert [m.branched_at for m in outcome.ensemble] == [None, 0, 1]
    assert outcome.ensemble[0].energy == -5.0
    assert outcome.ensemble[1].energy == -4.9
    assert [r.new_branches for r in outcome.trace] == [1, 1]


def test_cap_one_suppresses_branching():
    cache = _handmade_cache([0.1, 0.1], [[0.2, 0.05], [0.05, 0.2]], n_train=10)
    cfg = flips_disabled(
        ZoomConfig(
            iterations=2,
            keep_fraction=1.0,
            excited_distances=(0.08,),
            excited_caps=(1,),
            seed=0,
        )
    )
    outcome = run_zoom(cache, _FixedSolver(_two_state_result()), cfg)
    assert len(outcome.ensemble) == 1
    assert all(r.new_branches == 0 for r in outcome.trace)


def test_solver_failure_is_reported_with_iteration():
    cache = _handmade_cache([0.3], [[0.05]], n_train=10)
    cfg = flips_disabled(ZoomConfig(iterations=1))
    with pytest.raises(RuntimeError, match="'boom' failed at iteration 0"):
        run_zoom(cache, _BoomSolver(), cfg)


def test_zoom_prunes_couplings_before_solving():
    # a recording solver sees the pruned problem: 6 couplings at 0.3 keep 2
    quad = np.full((4, 4), 0.5) * np.eye(4)
    for (i, j), v in zip(
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        [0.1, 0.2, 0.3, 0.4, 0.05, 0.15],
    ):
        quad[i, j] = quad[j, i] = v
    cache = _handmade_cache([0.2, 0.1, -0.1, 0.3], quad, n_train=10)
    seen = []

    @dataclass(frozen=True)
    class _Recorder:
        solver_id: str = "recorder"

        def solve(self, problem, seed):
            seen.append(problem)
            return solve_exact(problem)

    cfg = flips_disabled(ZoomConfig(iterations=1, keep_fraction=0.3, seed=0))
    run_zoom(cache, _Recorder(), cfg)
    dense = build_zoom(cache, np.zeros(cache.n_total), 1.0)
    assert dense.n_couplings == 6
    assert seen[0].n_couplings == 2
    assert seen[0].couplings[1, 2] == dense.couplings[1, 2]
    assert seen[0].couplings[0, 3] == dense.couplings[0, 3]
