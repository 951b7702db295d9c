"""Master-equation propagation of an energy-transfer network.

The coherent subspace (source + upper levels) evolves under

    d rho / dt = -i [H, rho] - (N rho + rho N) + refill,

with H holding the near-field couplings on its off-diagonals (hbar = 1)
and N = diag(drain/2), where a level's drain is its radiative rate plus
the effective rate of every relaxation channel leaving it.  A channel
whose destination is itself coherent refills that diagonal element
(Lindblad feeding term); a channel into a lower level feeds a classical
population P_l instead, which then decays radiatively:

    d P_l / dt = sum(rate * rho_ss) - gamma_l P_l.

Emission is book-kept per radiative level as the running integral of
rate * population, so (emitted) + (still in system) stays exactly 1.

The whole augmented state (Re rho, Im rho, P, emitted) is one linear ODE
y' = A y.  A fixed-step fourth-order Runge-Kutta update of a linear
system is the degree-4 Taylor polynomial of exp(dt A); the integrator
precomputes that one-step matrix once and advances by matrix powers
between output samples, which is the same map as stage-wise stepping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ControlPattern, EMPTY_PATTERN, NetworkSpecError, QdNetwork


class ConservationError(RuntimeError):
    """Total probability left (1 - emitted - residual) drifted past tolerance."""


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.1                  # ps
    horizon: float = 10_000.0        # ps
    conservation_tolerance: float = 1e-6
    sample_every: float | None = None  # ps; defaults to horizon/1000, >= dt

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon < 100 * self.dt:
            raise ValueError("horizon must be at least 100 dt")
        if self.conservation_tolerance <= 0:
            raise ValueError("conservation_tolerance must be positive")
        if self.sample_every is not None and self.sample_every < self.dt:
            raise ValueError("sample_every must be >= dt")

    def resolved_sample_every(self) -> float:
        if self.sample_every is not None:
            return self.sample_every
        return max(self.dt, self.horizon / 1000.0)


DEFAULT_CONFIG = IntegratorConfig()


@dataclass
class Trajectory:
    times: np.ndarray              # ps, sample grid including t=0
    coherent_ids: list
    coherent_pops: np.ndarray      # (n_times, n_coherent)
    lower_ids: list
    lower_pops: np.ndarray         # (n_times, n_lower)
    radiative_ids: list
    photon_yields: np.ndarray      # (n_times, n_radiative), cumulative
    pattern: ControlPattern
    dt: float
    hermiticity_max: float
    conservation_max: float

    @property
    def coherent_trace(self) -> np.ndarray:
        return self.coherent_pops.sum(axis=1)

    @property
    def total_emitted(self) -> np.ndarray:
        return self.photon_yields.sum(axis=1)

    def final_yield(self, level_id: str) -> float:
        return float(self.photon_yields[-1, self.radiative_ids.index(level_id)])

    def final_yields(self) -> dict:
        return {lid: float(v) for lid, v in zip(self.radiative_ids, self.photon_yields[-1])}


# -- linear operator assembly ------------------------------------------------


class _Assembled:
    """Index layout and generator matrix for one (network, pattern) pair."""

    def __init__(self, network: QdNetwork, pattern: ControlPattern):
        network.validate_pattern(pattern)
        coherent = network.coherent_levels()
        lower = network.lower_levels()
        self.coherent_ids = [lv.id for lv in coherent]
        self.lower_ids = [lv.id for lv in lower]
        c_index = {lid: k for k, lid in enumerate(self.coherent_ids)}
        l_index = {lid: k for k, lid in enumerate(self.lower_ids)}
        nc, nl = len(coherent), len(lower)

        H = np.zeros((nc, nc))
        for c in network.couplings:
            i, j = c_index[c.a], c_index[c.b]
            H[i, j] = H[j, i] = c.strength

        drain = np.array([lv.radiative_rate for lv in coherent])
        feeds_coh = []   # (src, dst, rate) within the coherent subspace
        feeds_low = []   # (src coherent, dst lower, rate)
        # canonical accumulation order: results must not depend on the
        # order the network lists its channels in
        for ch in sorted(network.relaxations, key=lambda ch: (ch.source, ch.dest)):
            rate = network.effective_rate(ch, pattern)
            s = c_index[ch.source]
            drain[s] += rate
            if ch.dest in c_index:
                feeds_coh.append((s, c_index[ch.dest], rate))
            else:
                feeds_low.append((s, l_index[ch.dest], rate))

        gamma_low = np.array([lv.radiative_rate for lv in lower])
        rad_coh = [(c_index[lv.id], lv.radiative_rate) for lv in coherent if lv.radiative_rate > 0]
        rad_low = [(l_index[lv.id], lv.radiative_rate) for lv in lower if lv.radiative_rate > 0]
        self.radiative_ids = [coherent[k].id for k, _ in rad_coh] + [lower[k].id for k, _ in rad_low]

        self.nc, self.nl, self.nr = nc, nl, len(self.radiative_ids)
        self.dim = 2 * nc * nc + nl + self.nr
        self._H = H
        self._half_drain = drain / 2.0
        self._feeds_coh = feeds_coh
        self._feeds_low = feeds_low
        self._gamma_low = gamma_low
        self._rad_coh = rad_coh
        self._rad_low = rad_low
        self.generator = self._build_generator()

    def _rhs(self, y: np.ndarray) -> np.ndarray:
        nc, nl, nr = self.nc, self.nl, self.nr
        H, N = self._H, self._half_drain
        R = y[: nc * nc].reshape(nc, nc)
        I = y[nc * nc : 2 * nc * nc].reshape(nc, nc)
        P = y[2 * nc * nc : 2 * nc * nc + nl]
        out = np.zeros_like(y)
        dR = out[: nc * nc].reshape(nc, nc)
        dI = out[nc * nc : 2 * nc * nc].reshape(nc, nc)
        dP = out[2 * nc * nc : 2 * nc * nc + nl]
        dE = out[2 * nc * nc + nl :]

        dR[:] = H @ I - I @ H - N[:, None] * R - R * N[None, :]
        dI[:] = R @ H - H @ R - N[:, None] * I - I * N[None, :]
        for s, d, rate in self._feeds_coh:
            dR[d, d] += rate * R[s, s]
        dP[:] = -self._gamma_low * P
        for s, d, rate in self._feeds_low:
            dP[d] += rate * R[s, s]
        for r, (k, rate) in enumerate(self._rad_coh):
            dE[r] = rate * R[k, k]
        for r, (k, rate) in enumerate(self._rad_low):
            dE[len(self._rad_coh) + r] = rate * P[k]
        return out

    def _build_generator(self) -> np.ndarray:
        A = np.zeros((self.dim, self.dim))
        e = np.zeros(self.dim)
        for k in range(self.dim):
            e[k] = 1.0
            A[:, k] = self._rhs(e)
            e[k] = 0.0
        return A

    def initial_state(self) -> np.ndarray:
        y = np.zeros(self.dim)
        y[0] = 1.0  # source level leads the coherent ordering
        return y


def _rk4_step_matrix(A: np.ndarray, dt: float) -> np.ndarray:
    # Degree-4 Taylor of exp(dt A): identical to one classical RK4 step
    # applied to y' = A y.
    X = dt * A
    X2 = X @ X
    X3 = X2 @ X
    X4 = X3 @ X
    return np.eye(A.shape[0]) + X + X2 / 2.0 + X3 / 6.0 + X4 / 24.0


def evolve(
    network: QdNetwork,
    pattern: ControlPattern = EMPTY_PATTERN,
    config: IntegratorConfig = DEFAULT_CONFIG,
) -> Trajectory:
    """Propagate one exciton injected in the source level.

    Returns the sampled trajectory; raises ConservationError if the
    probability book-keeping drifts beyond config.conservation_tolerance
    at any sample (the usual cause is a dt too coarse for the rates).
    """
    asm = _Assembled(network, pattern)
    n_steps = int(round(config.horizon / config.dt))
    stride = max(1, int(round(config.resolved_sample_every() / config.dt)))
    n_blocks = max(1, n_steps // stride)

    step = _rk4_step_matrix(asm.generator, config.dt)
    block = np.linalg.matrix_power(step, stride)

    nc, nl, nr = asm.nc, asm.nl, asm.nr
    diag_idx = np.arange(nc) * (nc + 1)
    times = np.arange(n_blocks + 1) * (stride * config.dt)
    coh = np.empty((n_blocks + 1, nc))
    low = np.empty((n_blocks + 1, nl))
    emit = np.empty((n_blocks + 1, nr))

    y = asm.initial_state()
    herm_max = 0.0
    cons_max = 0.0
    for k in range(n_blocks + 1):
        if k:
            y = block @ y
        R = y[: nc * nc].reshape(nc, nc)
        I = y[nc * nc : 2 * nc * nc].reshape(nc, nc)
        coh[k] = y[diag_idx]
        low[k] = y[2 * nc * nc : 2 * nc * nc + nl]
        emit[k] = y[2 * nc * nc + nl :]
        herm = max(np.abs(R - R.T).max(), np.abs(I + I.T).max())
        herm_max = max(herm_max, herm)
        drift = abs(coh[k].sum() + low[k].sum() + emit[k].sum() - 1.0)
        cons_max = max(cons_max, drift)
        if drift > config.conservation_tolerance:
            raise ConservationError(
                f"probability drift {drift:.3e} at t={times[k]:.3f} ps exceeds "
                f"{config.conservation_tolerance:.1e}; reduce dt"
            )

    return Trajectory(
        times=times,
        coherent_ids=asm.coherent_ids,
        coherent_pops=coh,
        lower_ids=asm.lower_ids,
        lower_pops=low,
        radiative_ids=asm.radiative_ids,
        photon_yields=emit,
        pattern=pattern,
        dt=config.dt,
        hermiticity_max=herm_max,
        conservation_max=cons_max,
    )


# -- transfer profiles -------------------------------------------------------


def dot_yields(network: QdNetwork, traj: Trajectory) -> dict:
    """Final emission probability per destination dot (radiative lower levels)."""
    out = {dot: 0.0 for dot in network.destination_dots()}
    for lid, y in traj.final_yields().items():
        dot = network.level(lid).dot
        if dot in out and network.level(lid).kind == "lower":
            out[dot] += y
    return out


@dataclass
class TransferProfile:
    """Per-pattern radiation probabilities p = clip(gain * yield, 0, 1)."""

    gain: float
    destinations: list                       # dot ids, draw order
    entries: dict = field(default_factory=dict)  # ControlPattern -> np.ndarray
    _computer: object = field(default=None, repr=False)

    def lookup(self, pattern: ControlPattern) -> np.ndarray:
        if pattern not in self.entries:
            if self._computer is None:
                raise KeyError(f"no entry for pattern {sorted(pattern.blocked)}")
            self.entries[pattern] = self._computer(pattern)
        return self.entries[pattern]


def transfer_profile(
    network: QdNetwork,
    patterns=None,
    gain: float = 1.0,
    config: IntegratorConfig = DEFAULT_CONFIG,
    lazy: bool = False,
) -> TransferProfile:
    """Tabulate radiation probabilities over control patterns.

    patterns=None enumerates every subset of blockable destinations
    (refused above 2^16 combinations); lazy=True skips precomputation and
    fills entries on first lookup instead.
    """
    if gain <= 0:
        raise ValueError("gain must be positive")
    destinations = network.destination_dots()

    def compute(pattern: ControlPattern) -> np.ndarray:
        traj = evolve(network, pattern, config)
        per_dot = dot_yields(network, traj)
        return np.clip(gain * np.array([per_dot[d] for d in destinations]), 0.0, 1.0)

    profile = TransferProfile(gain=gain, destinations=destinations, _computer=compute)
    if patterns is None:
        blockable = sorted({ch.dest for ch in network.relaxations
                            if network.level(ch.dest).kind == "lower"})
        if 2 ** len(blockable) > 65536:
            raise NetworkSpecError("too many control patterns to enumerate; pass them explicitly")
        patterns = [
            ControlPattern(frozenset(lid for b, lid in enumerate(blockable) if mask >> b & 1))
            for mask in range(2 ** len(blockable))
        ]
    if not lazy:
        for p in patterns:
            profile.lookup(p)
    return profile


def sample_radiation(
    profile: TransferProfile, pattern: ControlPattern, rng: np.random.Generator
) -> np.ndarray:
    """One Bernoulli draw per destination dot, in profile.destinations order."""
    probs = profile.lookup(pattern)
    u = rng.random(len(probs))
    return (u < probs).astype(np.int8)
