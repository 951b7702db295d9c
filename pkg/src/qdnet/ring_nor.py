"""Stochastic ring-NOR constraint solver on the star network.

N large dots stand for N binary variables x_i subject to the ring of
constraints x_i = NOR(x_{i-1}, x_{i+1}) (cyclic).  Each cycle the system
observes which dots radiated, then applies bounceback control: every
radiating dot shines control light on its ring neighbours, blocking their
relaxation for the next cycle.  Radiation itself is sampled from the
master-equation transfer profile, so constraint satisfaction emerges from
the interplay of blocking and intrinsically stochastic energy transfer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ControlPattern, lower_level_id
from .seeding import derive_rng
from .simulate import TransferProfile, sample_radiation


@dataclass(frozen=True)
class NorState:
    x: tuple                  # current radiation pattern, one bit per dot
    controls: ControlPattern  # blocking in force for the coming cycle
    t: int = 0


@dataclass(frozen=True)
class NorRunConfig:
    num_dots: int = 4
    gain: float = 1.0
    cycles: int = 30
    trials: int = 1000
    initial_x: tuple = (0, 0, 0, 0)
    seed: int = 0
    avg_window: int = 5

    def __post_init__(self):
        if self.num_dots < 3:
            raise ValueError("ring NOR needs at least 3 dots")
        if len(self.initial_x) != self.num_dots:
            raise ValueError("initial_x length must equal num_dots")
        if any(b not in (0, 1) for b in self.initial_x):
            raise ValueError("initial_x must be 0/1 bits")
        if self.cycles < 1 or self.trials < 1 or self.avg_window < 1:
            raise ValueError("cycles, trials, avg_window must be >= 1")


def bounceback_nor(x) -> ControlPattern:
    """Control pattern after one bounceback application: each radiating
    dot blocks both ring neighbours."""
    n = len(x)
    blocked = set()
    for i, bit in enumerate(x):
        if bit:
            blocked.add(lower_level_id((i - 1) % n + 1))
            blocked.add(lower_level_id((i + 1) % n + 1))
    return ControlPattern(frozenset(blocked))


def is_correct_solution(x) -> bool:
    """x satisfies x_i = NOR(x_{i-1}, x_{i+1}) on the full ring."""
    n = len(x)
    return all(x[i] == int(not (x[(i - 1) % n] or x[(i + 1) % n])) for i in range(n))


# Conventional display numbers for the two N=4 solutions.
STATE_NUMBERS = {(0, 1, 0, 1): 7, (1, 0, 1, 0): 10}


def correct_solutions(num_dots: int) -> list:
    """All satisfying patterns, in lexicographic order (2^N scan)."""
    if num_dots > 20:
        raise ValueError("exhaustive solution enumeration capped at N=20")
    out = []
    for mask in range(2 ** num_dots):
        x = tuple(mask >> (num_dots - 1 - i) & 1 for i in range(num_dots))
        if is_correct_solution(x):
            out.append(x)
    return out


def nor_step(state: NorState, profile: TransferProfile, rng: np.random.Generator) -> NorState:
    """One cycle: sample radiation under the standing controls, then
    derive the next controls from what radiated."""
    x = tuple(int(b) for b in sample_radiation(profile, state.controls, rng))
    return NorState(x=x, controls=bounceback_nor(x), t=state.t + 1)


@dataclass
class NorStats:
    config: NorRunConfig
    cycles: np.ndarray          # 1..C
    x_ratio: np.ndarray         # (C, N) incidence of x_i = 1
    solution_states: list       # bit tuples, lexicographic
    state_ratio: np.ndarray     # (C, n_solutions) incidence per solution state
    windowed_x: np.ndarray      # (C, N) block averages over avg_window cycles
    windowed_state: np.ndarray  # (C, n_solutions)
    correct_ratio: np.ndarray = field(init=False)
    windowed_correct: np.ndarray = field(init=False)

    def __post_init__(self):
        self.correct_ratio = self.state_ratio.sum(axis=1)
        self.windowed_correct = self.windowed_state.sum(axis=1)

    def state_label(self, k: int) -> str:
        """Display label for solution k: the conventional state numbers for
        the two N=4 solutions, the bit string otherwise."""
        x = self.solution_states[k]
        return str(STATE_NUMBERS.get(x, "".join(map(str, x))))


def _window_average(series: np.ndarray, window: int) -> np.ndarray:
    """Non-overlapping block means, each cycle labelled with its block's mean."""
    out = np.empty_like(series, dtype=float)
    for start in range(0, len(series), window):
        block = series[start : start + window]
        out[start : start + window] = block.mean(axis=0)
    return out


def run_nor(config: NorRunConfig, profile: TransferProfile) -> NorStats:
    """Monte Carlo over independent trials; trial k draws from the stream
    derived from (seed, "nor-trial", k), so trial order cannot matter."""
    n, cycles = config.num_dots, config.cycles
    solutions = correct_solutions(n)
    sol_index = {s: k for k, s in enumerate(solutions)}
    ones = np.zeros((cycles, n))
    state_hits = np.zeros((cycles, len(solutions)))

    for trial in range(config.trials):
        rng = derive_rng(config.seed, "nor-trial", trial)
        state = NorState(x=tuple(config.initial_x), controls=bounceback_nor(config.initial_x))
        for c in range(cycles):
            state = nor_step(state, profile, rng)
            ones[c] += state.x
            k = sol_index.get(state.x)
            if k is not None:
                state_hits[c, k] += 1

    x_ratio = ones / config.trials
    state_ratio = state_hits / config.trials
    return NorStats(
        config=config,
        cycles=np.arange(1, cycles + 1),
        x_ratio=x_ratio,
        solution_states=solutions,
        state_ratio=state_ratio,
        windowed_x=_window_average(x_ratio, config.avg_window),
        windowed_state=_window_average(state_ratio, config.avg_window),
    )
