"""Seeded trajectory sampling and the dense truncation oracle."""

import numpy as np
import pytest

import qrepeat.opalgebra as oa
from helpers import dense, dense_vec
from qrepeat import (DegenerateState, Dyad, Family, StateVector,
                     StructuredOperator, TruncationWindow, WindowInvalid,
                     born_probabilities, build_binary_example,
                     build_example_family, dense_oracle, dense_state,
                     empirical_conditionals, fixed_state_sampler,
                     measure_once, random_state_sampler, run_trajectory,
                     window_for)

EX = build_example_family(2, (0.3, 0.7))


def test_window_ordering_is_enforced():
    with pytest.raises(WindowInvalid):
        TruncationWindow(dim=2, valid_input_dim=5)
    with pytest.raises(WindowInvalid):
        TruncationWindow(dim=0, valid_input_dim=0)


def test_window_for_covers_all_reachable_outputs():
    w = window_for(EX, valid_input_dim=8)
    # inputs below 8 reach at most index 2*3+3 = 9 under either outcome
    assert w.valid_input_dim == 8 and w.dim == 10


def test_dense_oracle_matches_independent_renderer():
    w = window_for(EX, valid_input_dim=8)
    for _, op in EX.items():
        got = dense_oracle(op, w)
        assert got.shape == (w.dim, w.dim)
        assert np.array_equal(got[:, :8], dense(op, w.dim)[:, :8])


def test_dense_oracle_rejects_leaky_window():
    op = EX.operator(1)
    with pytest.raises(WindowInvalid):
        dense_oracle(op, TruncationWindow(dim=8, valid_input_dim=8))


def test_dense_state_and_probabilities():
    psi = StateVector({0: 0.6, 1: 0.8})
    assert np.allclose(dense_state(psi, 4), [0.6, 0.8, 0, 0])
    probs = born_probabilities(EX, StateVector.basis(0))
    assert probs[1] == pytest.approx(0.3) and probs[2] == pytest.approx(0.7)
    assert sum(probs.values()) == pytest.approx(1.0)


def test_born_probabilities_agree_with_dense_oracle():
    psi = StateVector({0: 0.5, 1: 0.5, 3: np.sqrt(0.5)})
    w = window_for(EX, valid_input_dim=4)
    v = dense_state(psi, w.dim)
    for label, p in born_probabilities(EX, psi).items():
        m = dense_oracle(EX.operator(label), w)
        assert p == pytest.approx(np.linalg.norm(m @ v) ** 2, abs=1e-12)


def test_measure_once_is_seed_deterministic():
    a_out, a_prob, a_post = measure_once(EX, StateVector.basis(0), seed=11)
    b_out, b_prob, b_post = measure_once(EX, StateVector.basis(0), seed=11)
    assert a_out == b_out and a_prob == b_prob
    assert dict(a_post.items()) == dict(b_post.items())


def test_measure_once_normalizes_the_post_state():
    outcome, _, post = measure_once(EX, StateVector.basis(0), seed=1)
    assert post.norm_sq() == pytest.approx(1.0)
    assert outcome in (1, 2)


def test_measurement_rejects_annihilated_state():
    # outcome 2 lives on the even ladder; an instrument missing that part
    # leaves nothing to normalize
    from qrepeat import make_instrument
    partial = make_instrument({1: EX.operator(1)}, check_completeness=False)
    with pytest.raises(DegenerateState):
        measure_once(partial, StateVector.basis(2), seed=0)


def test_trajectory_replays_under_the_same_seed():
    a = run_trajectory(EX, StateVector.basis(0), steps=8, seed=5)
    b = run_trajectory(EX, StateVector.basis(0), steps=8, seed=5)
    assert a.outcomes == b.outcomes
    assert a.seed == 5 and len(a.steps) == 8


def test_trajectory_from_ground_state_repeats_first_outcome():
    record = run_trajectory(EX, StateVector.basis(0), steps=6, seed=2)
    first = record.outcomes[0]
    assert all(o == first for o in record.outcomes)
    assert record.steps[0].probability == pytest.approx(
        0.3 if first == 1 else 0.7)
    for later in record.steps[1:]:
        assert later.probability == pytest.approx(1.0)


def test_trajectory_memory_depth_counts_repetitions():
    record = run_trajectory(EX, StateVector.basis(0), steps=6, seed=2)
    for k, step in enumerate(record.steps):
        assert step.memory is not None
        assert step.memory.depth == k


def test_trajectory_without_memory_readout():
    record = run_trajectory(EX, StateVector.basis(0), steps=3, seed=2,
                            with_memory=False)
    assert all(step.memory is None for step in record.steps)


def test_zero_probability_outcomes_are_unreachable():
    sure = build_binary_example(1.0, 1.0)  # outcome 2 never fires from |0>
    for seed in range(50):
        assert measure_once(sure, StateVector.basis(0), seed=seed)[0] == 1


def test_empirical_conditionals_on_the_example():
    stats = empirical_conditionals(EX, fixed_state_sampler(StateVector.basis(0)),
                                   trajectories=4000, seed=0)
    assert stats.trajectories == 4000
    assert sum(stats.first_counts.values()) == 4000
    # repeatability: the second outcome always matches the first
    assert stats.frequency(1, 1) == 1.0 and stats.frequency(2, 2) == 1.0
    assert stats.frequency(1, 2) == 0.0 and stats.frequency(2, 1) == 0.0
    # first-outcome rate near p1 = 0.3 (4 sigma)
    rate = stats.first_counts[1] / 4000
    assert abs(rate - 0.3) < 4 * np.sqrt(0.3 * 0.7 / 4000)


def test_empirical_conditionals_reproducible():
    sampler = random_state_sampler(max_index=16)
    a = empirical_conditionals(EX, sampler, trajectories=200, seed=9)
    b = empirical_conditionals(EX, sampler, trajectories=200, seed=9)
    assert a.counts == b.counts and a.first_counts == b.first_counts


def test_empirical_conditionals_requires_work():
    with pytest.raises(ValueError):
        empirical_conditionals(EX, fixed_state_sampler(StateVector.basis(0)),
                               trajectories=0, seed=0)
