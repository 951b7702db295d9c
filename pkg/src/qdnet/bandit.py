"""Two-armed bandit decision maker driven by the five-dot network.

The network chains S <-> M_U -> M_1 <-> L_2 -> L_1 on a left and a right
arm.  Control light state-fills an arm's large dot, modeled as the
position-dependent sublevel relaxation rate of L_2 -> L_1: blocking the
right arm parks the excitation at MR_1, whose radiation selects machine
B (left / ML_1 / machine A likewise).  An intensity adjuster position j
sets the two rates; rewards move j toward the machine that paid and away
from one that did not, so selection probability tracks the reward record.

S_A(j) and S_B(j) are the ML_1 / MR_1 photon yields of the master
equation, precomputed on the integer grid j in [-100, 100].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Coupling, LevelSpec, QdNetwork, RelaxationChannel
from .simulate import DEFAULT_CONFIG, IntegratorConfig, evolve
from .seeding import derive_rng

ARM_A = "A"
ARM_B = "B"
J_MIN, J_MAX = -100, 100
BETA_GRID = (0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0)


def gamma_of_j(j: int):
    """Sublevel relaxation rates (Gamma_LL2, Gamma_LR2) in 1/ps at IA
    position j.  Left grows with j, right shrinks; both stay positive on
    the supported grid (minimum 1/100000 at |j|=100)."""
    if not isinstance(j, (int, np.integer)) or isinstance(j, bool):
        raise TypeError("IA position j must be an integer")
    if not J_MIN <= j <= J_MAX:
        raise ValueError(f"IA position {j} outside [{J_MIN}, {J_MAX}]")
    gamma_ll2 = 1 / 100 + j / 10000 + 1 / 100000
    gamma_lr2 = 1 / 100 - j / 10000 + 1 / 100000
    return gamma_ll2, gamma_lr2


@dataclass(frozen=True)
class NanoDmConfig:
    coupling_ps: float = 100.0      # 1/U for every near-field link
    relax_ps: float = 10.0          # 1/Gamma_M, the M_U -> M_1 dissipation
    m1_lifetime_ps: float = 1000.0  # radiative lifetime of ML_1 / MR_1
    l1_lifetime_ps: float = 1000.0  # radiative lifetime of LL_1 / LR_1
    couple_l3: bool = False         # also couple S to the L_3 spectator levels
    integrator: IntegratorConfig = DEFAULT_CONFIG

    def __post_init__(self):
        for name in ("coupling_ps", "relax_ps", "m1_lifetime_ps", "l1_lifetime_ps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def network_for_position(j: int, config: NanoDmConfig = NanoDmConfig()) -> QdNetwork:
    """The 11-level network at IA position j.

    L_3 levels sit resonant with the source but idle unless couple_l3 is
    set; selection reads the M_1 yields, so the L_1 yields are the
    competing loss channel.
    """
    gamma_ll2, gamma_lr2 = gamma_of_j(j)
    u = 1.0 / config.coupling_ps
    gamma_m = 1.0 / config.relax_ps
    gamma_m1 = 1.0 / config.m1_lifetime_ps
    gamma_l1 = 1.0 / config.l1_lifetime_ps

    levels = [LevelSpec("S", dot="s", kind="source")]
    for side in ("l", "r"):
        m, big = f"m{side}", f"l{side}"
        levels += [
            LevelSpec(f"M{side.upper()}_U", dot=m, kind="upper"),
            LevelSpec(f"M{side.upper()}_1", dot=m, kind="upper", radiative_rate=gamma_m1),
            LevelSpec(f"L{side.upper()}_3", dot=big, kind="upper"),
            LevelSpec(f"L{side.upper()}_2", dot=big, kind="upper"),
            LevelSpec(f"L{side.upper()}_1", dot=big, kind="lower", radiative_rate=gamma_l1),
        ]
    couplings = [
        Coupling("S", "ML_U", u),
        Coupling("S", "MR_U", u),
        Coupling("ML_1", "LL_2", u),
        Coupling("MR_1", "LR_2", u),
    ]
    if config.couple_l3:
        couplings += [Coupling("S", "LL_3", u), Coupling("S", "LR_3", u)]
    relaxations = [
        RelaxationChannel("ML_U", "ML_1", gamma_m, gamma_m / 100),
        RelaxationChannel("MR_U", "MR_1", gamma_m, gamma_m / 100),
        RelaxationChannel("LL_2", "LL_1", gamma_ll2, gamma_ll2 / 100),
        RelaxationChannel("LR_2", "LR_1", gamma_lr2, gamma_lr2 / 100),
    ]
    return QdNetwork(tuple(levels), tuple(couplings), tuple(relaxations))


@dataclass
class NanoDmModel:
    network: QdNetwork          # the j=0 instance
    config: NanoDmConfig
    j_grid: np.ndarray          # integers J_MIN..J_MAX
    s_a: np.ndarray             # ML_1 yield per grid position
    s_b: np.ndarray             # MR_1 yield per grid position

    def selection(self, j: int):
        """(S_A, S_B) at integer position j."""
        if not J_MIN <= j <= J_MAX:
            raise ValueError(f"IA position {j} outside [{J_MIN}, {J_MAX}]")
        k = int(j) - J_MIN
        return float(self.s_a[k]), float(self.s_b[k])

    def prob_a(self, j: int) -> float:
        s_a, s_b = self.selection(j)
        return s_a / (s_a + s_b)

    @property
    def difference(self) -> np.ndarray:
        return self.s_b - self.s_a


def build_nanodm(config: NanoDmConfig = NanoDmConfig()) -> NanoDmModel:
    """Precompute the selection table by evolving the network at each j.

    Swapping the arms is a relabeling, so only j >= 0 is integrated and
    negative positions are filled by the mirror S_A(-j) = S_B(j); j=0 is
    averaged across the arms.  That keeps the stored table exactly
    mirror-symmetric, which the IA dynamics rely on.
    """
    grid = np.arange(J_MIN, J_MAX + 1)
    s_a = np.empty(grid.size)
    s_b = np.empty(grid.size)
    for j in range(0, J_MAX + 1):
        traj = evolve(network_for_position(j, config), config=config.integrator)
        ya, yb = traj.final_yield("ML_1"), traj.final_yield("MR_1")
        if j == 0:
            mid = 0.5 * (ya + yb)
            s_a[-J_MIN], s_b[-J_MIN] = mid, mid
        else:
            s_a[j - J_MIN], s_b[j - J_MIN] = ya, yb
            s_a[-j - J_MIN], s_b[-j - J_MIN] = yb, ya

    if not ((s_a + s_b) > 0).all():
        raise RuntimeError("degenerate selection table: S_A + S_B vanishes")
    if (np.diff(s_b - s_a) < 0).any():
        raise RuntimeError("selection table difference is not monotone in j")
    return NanoDmModel(
        network=network_for_position(0, config),
        config=config,
        j_grid=grid,
        s_a=s_a,
        s_b=s_b,
    )


# -- IA dynamics and environment ---------------------------------------------


@dataclass(frozen=True)
class IaState:
    j: int = 0
    d: int = 50

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("increment D must be >= 1")
        if not J_MIN <= self.j <= J_MAX:
            raise ValueError(f"IA position {self.j} outside [{J_MIN}, {J_MAX}]")


def ia_update(state: IaState, selected: str, rewarded: bool) -> IaState:
    """Move toward the selected machine on reward, away otherwise:
    A is leftward (j decreases), B rightward.  Clamped to the grid."""
    if selected not in (ARM_A, ARM_B):
        raise ValueError(f"unknown machine {selected!r}")
    toward = -state.d if selected == ARM_A else state.d
    j = state.j + (toward if rewarded else -toward)
    return IaState(j=max(J_MIN, min(J_MAX, j)), d=state.d)


def select_machine(model: NanoDmModel, j: int, rng: np.random.Generator) -> str:
    return ARM_A if rng.random() < model.prob_a(j) else ARM_B


@dataclass(frozen=True)
class SlotMachines:
    p_a: float
    p_b: float

    def __post_init__(self):
        if not (0.0 <= self.p_a <= 1.0 and 0.0 <= self.p_b <= 1.0):
            raise ValueError("reward probabilities must lie in [0, 1]")

    @property
    def correct_arm(self):
        if self.p_a == self.p_b:
            return None
        return ARM_B if self.p_b > self.p_a else ARM_A


@dataclass
class RunStats:
    plays: int
    samples: int
    selection_b_rate: np.ndarray   # per play, averaged over samples
    reward_rate: np.ndarray
    correct_rate: np.ndarray       # instantaneous correct-selection rate
    cumulative_rate: np.ndarray    # mean cumulative correct rate per play
    cumulative_std: np.ndarray     # across-sample std of the cumulative rate

    @property
    def final_rate(self) -> float:
        return float(self.cumulative_rate[-1])

    @property
    def cumulative_sem(self) -> np.ndarray:
        return self.cumulative_std / np.sqrt(self.samples)


def _run_stats(sel_b, rewards, machines: SlotMachines) -> RunStats:
    if machines.correct_arm == ARM_B:
        correct = sel_b
    elif machines.correct_arm == ARM_A:
        correct = ~sel_b
    else:
        # no correct arm: score B so the symmetric case averages to 1/2
        correct = sel_b
    samples, plays = sel_b.shape
    cum = np.cumsum(correct, axis=1, dtype=np.float64) / np.arange(1, plays + 1)
    return RunStats(
        plays=plays,
        samples=samples,
        selection_b_rate=sel_b.mean(axis=0),
        reward_rate=rewards.mean(axis=0),
        correct_rate=correct.mean(axis=0),
        cumulative_rate=cum.mean(axis=0),
        cumulative_std=cum.std(axis=0, ddof=1) if samples > 1 else np.zeros(plays),
    )


def play_nanodm(
    model: NanoDmModel,
    machines: SlotMachines,
    plays: int = 1000,
    samples: int = 1000,
    d: int = 50,
    seed: int = 0,
) -> RunStats:
    """Independent episodes of the IA loop, batched across samples.

    Each sample owns the stream (seed, "nanodm-sample", k) and draws two
    uniforms per play (selection, then reward), exactly as a scalar loop
    of select_machine / ia_update would.
    """
    if plays < 1 or samples < 1:
        raise ValueError("plays and samples must be >= 1")
    IaState(d=d)  # validate the increment
    u = np.stack([derive_rng(seed, "nanodm-sample", k).random((plays, 2))
                  for k in range(samples)])
    prob_a = model.s_a / (model.s_a + model.s_b)

    j = np.zeros(samples, dtype=np.int64)
    sel_b = np.empty((samples, plays), dtype=bool)
    rewards = np.empty((samples, plays), dtype=bool)
    for t in range(plays):
        pick_b = u[:, t, 0] >= prob_a[j - J_MIN]
        reward = u[:, t, 1] < np.where(pick_b, machines.p_b, machines.p_a)
        step = np.where(pick_b == reward, d, -d)  # toward B iff (B and paid) or (A and not)
        np.clip(j + step, J_MIN, J_MAX, out=j)
        sel_b[:, t] = pick_b
        rewards[:, t] = reward
    return _run_stats(sel_b, rewards, machines)


@dataclass(frozen=True)
class SoftmaxConfig:
    beta: float = 2.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")


def play_softmax(
    machines: SlotMachines,
    plays: int = 1000,
    samples: int = 1000,
    beta: float = 2.0,
    seed: int = 0,
    stream: str = "softmax-sample",
) -> RunStats:
    """Softmax baseline: P(A) = sigmoid(beta (Q_A - Q_B)), Q kept as the
    per-arm running sample mean (0 until an arm's first pull)."""
    SoftmaxConfig(beta=beta)
    if plays < 1 or samples < 1:
        raise ValueError("plays and samples must be >= 1")
    u = np.stack([derive_rng(seed, stream, k).random((plays, 2))
                  for k in range(samples)])

    q = np.zeros((samples, 2))       # columns: A, B
    pulls = np.zeros((samples, 2))
    sel_b = np.empty((samples, plays), dtype=bool)
    rewards = np.empty((samples, plays), dtype=bool)
    rows = np.arange(samples)
    for t in range(plays):
        prob_a = 1.0 / (1.0 + np.exp(-beta * (q[:, 0] - q[:, 1])))
        pick_b = u[:, t, 0] >= prob_a
        reward = u[:, t, 1] < np.where(pick_b, machines.p_b, machines.p_a)
        arm = pick_b.astype(np.intp)
        pulls[rows, arm] += 1.0
        q[rows, arm] += (reward - q[rows, arm]) / pulls[rows, arm]
        sel_b[:, t] = pick_b
        rewards[:, t] = reward
    return _run_stats(sel_b, rewards, machines)


def optimize_beta(
    machines: SlotMachines,
    plays: int = 1000,
    samples: int = 1000,
    grid=BETA_GRID,
    seed: int = 0,
) -> float:
    """Grid-search beta on held-out streams (seed, "beta-search", k),
    maximizing the final cumulative correct rate; first best wins."""
    best_beta, best_rate = None, -1.0
    for beta in grid:
        rate = play_softmax(
            machines, plays, samples, beta=beta, seed=seed, stream="beta-search"
        ).final_rate
        if rate > best_rate:
            best_beta, best_rate = beta, rate
    return best_beta


@dataclass
class Comparison:
    machines: SlotMachines
    d: int
    beta: float
    nanodm: RunStats
    softmax: RunStats


def compare(
    model: NanoDmModel,
    machines_list,
    plays: int = 1000,
    samples: int = 1000,
    d: int = 50,
    beta_grid=BETA_GRID,
    seed: int = 0,
) -> list:
    """Paired efficiency curves per machine setting: the IA agent against
    the Softmax baseline at its grid-optimized beta."""
    out = []
    for machines in machines_list:
        beta = optimize_beta(machines, plays, samples, grid=beta_grid, seed=seed)
        out.append(
            Comparison(
                machines=machines,
                d=d,
                beta=beta,
                nanodm=play_nanodm(model, machines, plays, samples, d=d, seed=seed),
                softmax=play_softmax(machines, plays, samples, beta=beta, seed=seed),
            )
        )
    return out
