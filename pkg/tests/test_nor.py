import numpy as np
import pytest

from qdnet.model import ControlPattern, EMPTY_PATTERN
from qdnet.ring_nor import (
    STATE_NUMBERS,
    NorRunConfig,
    NorState,
    bounceback_nor,
    correct_solutions,
    is_correct_solution,
    nor_step,
    run_nor,
)
from qdnet.seeding import derive_rng
from qdnet.simulate import TransferProfile


def degenerate_profile(n: int = 4) -> TransferProfile:
    """Radiation certain when unblocked, impossible when blocked."""

    def compute(pattern):
        return np.array([0.0 if f"l{i}" in pattern.blocked else 1.0
                         for i in range(1, n + 1)])

    return TransferProfile(gain=1.0, destinations=[f"dot{i}" for i in range(1, n + 1)],
                           _computer=compute)


def test_is_correct_solution():
    assert is_correct_solution((0, 1, 0, 1))
    assert is_correct_solution((1, 0, 1, 0))
    assert not is_correct_solution((0, 0, 0, 0))
    assert not is_correct_solution((1, 1, 1, 1))
    assert not is_correct_solution((1, 0, 0, 1))


def test_correct_solutions_small_rings():
    assert correct_solutions(4) == [(0, 1, 0, 1), (1, 0, 1, 0)]
    # C3: exactly one dot radiates, three rotations
    assert correct_solutions(3) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]
    with pytest.raises(ValueError):
        correct_solutions(25)


def test_state_numbers():
    assert STATE_NUMBERS[(0, 1, 0, 1)] == 7
    assert STATE_NUMBERS[(1, 0, 1, 0)] == 10


def test_bounceback_wraparound():
    assert bounceback_nor((1, 0, 0, 0)) == ControlPattern.of("l2", "l4")
    assert bounceback_nor((0, 0, 0, 0)) == EMPTY_PATTERN
    assert bounceback_nor((1, 1, 1, 1)) == ControlPattern.of("l1", "l2", "l3", "l4")
    # solution states block exactly the radiating dots' complements
    assert bounceback_nor((0, 1, 0, 1)) == ControlPattern.of("l1", "l3")


def test_config_validation():
    with pytest.raises(ValueError):
        NorRunConfig(num_dots=2, initial_x=(0, 0))
    with pytest.raises(ValueError):
        NorRunConfig(initial_x=(0, 0, 0))
    with pytest.raises(ValueError):
        NorRunConfig(initial_x=(0, 0, 2, 0))
    with pytest.raises(ValueError):
        NorRunConfig(cycles=0)


def test_deadlock_oscillates_exactly():
    # all-or-nothing radiation: from all zeros the ring flips between
    # all-0 and all-1 forever, never reaching a solution
    profile = degenerate_profile()
    state = NorState(x=(0, 0, 0, 0), controls=bounceback_nor((0, 0, 0, 0)))
    rng = derive_rng(123, "deadlock")
    for t in range(1, 21):
        state = nor_step(state, profile, rng)
        expected = (1, 1, 1, 1) if t % 2 else (0, 0, 0, 0)
        assert state.x == expected
        assert not is_correct_solution(state.x)


def test_deadlock_two_cycle_closure():
    # the two-step closure is deterministic, so any rng sees it
    profile = degenerate_profile()
    for seed in range(5):
        rng = derive_rng(seed, "closure")
        s = NorState(x=(1, 1, 1, 1), controls=bounceback_nor((1, 1, 1, 1)))
        s = nor_step(s, profile, rng)
        assert s.x == (0, 0, 0, 0)
        s = nor_step(s, profile, rng)
        assert s.x == (1, 1, 1, 1)


def test_nor_step_advances_time(profile_g1):
    state = NorState(x=(0, 0, 0, 0), controls=EMPTY_PATTERN)
    nxt = nor_step(state, profile_g1, derive_rng(0, "step"))
    assert nxt.t == state.t + 1
    assert nxt.controls == bounceback_nor(nxt.x)


def test_run_nor_shapes(profile_g1):
    config = NorRunConfig(trials=50, cycles=12, avg_window=4)
    stats = run_nor(config, profile_g1)
    assert stats.cycles.tolist() == list(range(1, 13))
    assert stats.x_ratio.shape == (12, 4)
    assert stats.state_ratio.shape == (12, 2)
    assert stats.solution_states == [(0, 1, 0, 1), (1, 0, 1, 0)]
    assert stats.state_label(0) == "7"
    assert stats.state_label(1) == "10"
    assert np.all(stats.x_ratio >= 0) and np.all(stats.x_ratio <= 1)
    np.testing.assert_array_equal(stats.correct_ratio, stats.state_ratio.sum(axis=1))
    # windowed series is constant inside each window
    for start in range(0, 12, 4):
        block = stats.windowed_x[start : start + 4]
        assert np.all(block == block[0])
        np.testing.assert_allclose(block[0], stats.x_ratio[start : start + 4].mean(axis=0))


def test_run_nor_deterministic(profile_g1):
    config = NorRunConfig(trials=40, cycles=10, seed=5)
    a = run_nor(config, profile_g1)
    b = run_nor(config, profile_g1)
    assert np.array_equal(a.x_ratio, b.x_ratio)
    assert np.array_equal(a.state_ratio, b.state_ratio)
    c = run_nor(NorRunConfig(trials=40, cycles=10, seed=6), profile_g1)
    assert not np.array_equal(a.x_ratio, c.x_ratio)


def test_run_nor_rotation_symmetry(profile_g1):
    # identical dots and a rotation-invariant start: per-dot rates agree
    # up to Monte Carlo noise
    config = NorRunConfig(trials=1000, cycles=15)
    stats = run_nor(config, profile_g1)
    final = stats.x_ratio[-1]
    sigma = np.sqrt(final.mean() * (1 - final.mean()) / config.trials)
    assert final.max() - final.min() < 5 * sigma


def test_run_nor_reaches_both_solutions(profile_g1):
    stats = run_nor(NorRunConfig(trials=400, cycles=30), profile_g1)
    assert stats.state_ratio[-1, 0] > 0
    assert stats.state_ratio[-1, 1] > 0


def test_run_nor_ratio_improves(profile_g1):
    stats = run_nor(NorRunConfig(trials=1000, cycles=30), profile_g1)
    assert stats.correct_ratio[-1] > stats.correct_ratio[0]
