"""Declarative description of a quantum-dot energy-transfer network.

A network is a set of discrete excitonic levels grouped into dots, with
optical near-field couplings between resonant levels and intra-dot
sublevel relaxation channels.  Couplings act coherently; relaxation and
radiative decay act as population drains.  Levels come in three kinds:

* ``source``  -- the initially excited level (exactly one per network),
* ``upper``   -- any other level treated coherently (it may couple),
* ``lower``   -- a classically treated population fed by relaxation.

The coherent subspace is {source} + {upper}.  A relaxation channel runs
from a coherent level to a level of the same dot; its destination is
usually a ``lower`` level but may itself be coherent, in which case it
refills that level's population incoherently.

Rates are in 1/ps and times in ps throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class NetworkSpecError(ValueError):
    """Raised when a network description is structurally inconsistent."""


@dataclass(frozen=True)
class LevelSpec:
    id: str
    dot: str
    kind: str                    # source | upper | lower
    radiative_rate: float = 0.0  # 1/ps, 0 for dipole-forbidden levels

    def __post_init__(self):
        if self.kind not in ("source", "upper", "lower"):
            raise NetworkSpecError(f"level {self.id!r}: unknown kind {self.kind!r}")
        if self.radiative_rate < 0:
            raise NetworkSpecError(f"level {self.id!r}: negative radiative rate")


@dataclass(frozen=True)
class Coupling:
    a: str
    b: str
    strength: float  # 1/ps, off-diagonal Hamiltonian element (hbar = 1)

    def __post_init__(self):
        if self.a == self.b:
            raise NetworkSpecError(f"coupling {self.a!r}<->{self.b!r}: self-coupling")
        if self.strength <= 0:
            raise NetworkSpecError(f"coupling {self.a!r}<->{self.b!r}: strength must be > 0")


@dataclass(frozen=True)
class RelaxationChannel:
    source: str        # coherent level the population leaves
    dest: str          # same-dot level it lands on
    rate: float        # 1/ps, free relaxation
    blocked_rate: float  # 1/ps, residual rate under state filling

    def __post_init__(self):
        if not self.rate > self.blocked_rate >= 0:
            raise NetworkSpecError(
                f"relaxation {self.source!r}->{self.dest!r}: need rate > blocked_rate >= 0"
            )


@dataclass(frozen=True)
class ControlPattern:
    """Set of relaxation destinations held filled by control light.

    A filled destination throttles every relaxation channel that feeds it
    down to the channel's blocked_rate.
    """

    blocked: frozenset  # of level ids

    @classmethod
    def of(cls, *level_ids: str) -> "ControlPattern":
        return cls(frozenset(level_ids))


EMPTY_PATTERN = ControlPattern(frozenset())


@dataclass
class QdNetwork:
    levels: list        # of LevelSpec
    couplings: list     # of Coupling
    relaxations: list   # of RelaxationChannel
    dots: list = field(init=False)      # dot ids, first-appearance order
    _by_id: dict = field(init=False, repr=False)

    def __post_init__(self):
        self._by_id = {}
        self.dots = []
        for lv in self.levels:
            if lv.id in self._by_id:
                raise NetworkSpecError(f"duplicate level id {lv.id!r}")
            self._by_id[lv.id] = lv
            if lv.dot not in self.dots:
                self.dots.append(lv.dot)
        self._validate()

    # -- lookups ---------------------------------------------------------

    def level(self, level_id: str) -> LevelSpec:
        try:
            return self._by_id[level_id]
        except KeyError:
            raise NetworkSpecError(f"unknown level id {level_id!r}") from None

    def coherent_levels(self) -> list:
        """Source + upper levels, source first, then sorted by id."""
        src = [lv for lv in self.levels if lv.kind == "source"]
        ups = sorted((lv for lv in self.levels if lv.kind == "upper"), key=lambda lv: lv.id)
        return src + ups

    def lower_levels(self) -> list:
        return sorted((lv for lv in self.levels if lv.kind == "lower"), key=lambda lv: lv.id)

    def destination_dots(self) -> list:
        """Dots other than the source level's dot, in declaration order."""
        src_dot = next(lv.dot for lv in self.levels if lv.kind == "source")
        return [d for d in self.dots if d != src_dot]

    def effective_rate(self, channel: RelaxationChannel, pattern: ControlPattern) -> float:
        return channel.blocked_rate if channel.dest in pattern.blocked else channel.rate

    # -- validation ------------------------------------------------------

    def _validate(self):
        sources = [lv for lv in self.levels if lv.kind == "source"]
        if len(sources) != 1:
            raise NetworkSpecError(f"need exactly one source level, got {len(sources)}")
        coherent = {lv.id for lv in self.levels if lv.kind in ("source", "upper")}

        for c in self.couplings:
            for end in (c.a, c.b):
                if end not in self._by_id:
                    raise NetworkSpecError(f"coupling references unknown level {end!r}")
                if end not in coherent:
                    raise NetworkSpecError(
                        f"coupling {c.a!r}<->{c.b!r}: endpoint {end!r} is not coherent"
                    )
        seen_pairs = set()
        for c in self.couplings:
            key = frozenset((c.a, c.b))
            if key in seen_pairs:
                raise NetworkSpecError(f"duplicate coupling {c.a!r}<->{c.b!r}")
            seen_pairs.add(key)

        for r in self.relaxations:
            if r.source not in self._by_id or r.dest not in self._by_id:
                raise NetworkSpecError(
                    f"relaxation {r.source!r}->{r.dest!r} references unknown level"
                )
            if r.source not in coherent:
                raise NetworkSpecError(
                    f"relaxation {r.source!r}->{r.dest!r}: source is not coherent"
                )
            if self.level(r.source).dot != self.level(r.dest).dot:
                raise NetworkSpecError(
                    f"relaxation {r.source!r}->{r.dest!r} crosses dots"
                )

        # Everything that takes part in the dynamics must be reachable from
        # the source through couplings or relaxations; levels with no edges
        # at all are permitted as inert spectators.
        adj = {lv.id: set() for lv in self.levels}
        for c in self.couplings:
            adj[c.a].add(c.b)
            adj[c.b].add(c.a)
        for r in self.relaxations:
            adj[r.source].add(r.dest)
            adj[r.dest].add(r.source)
        src_id = sources[0].id
        reached = {src_id}
        frontier = [src_id]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in reached:
                        reached.add(v)
                        nxt.append(v)
            frontier = nxt
        for lv in self.levels:
            if adj[lv.id] and lv.id not in reached:
                raise NetworkSpecError(f"level {lv.id!r} is not reachable from the source")

    def validate_pattern(self, pattern: ControlPattern):
        dests = {r.dest for r in self.relaxations}
        for lid in pattern.blocked:
            if lid not in self._by_id:
                raise NetworkSpecError(f"control pattern references unknown level {lid!r}")
            if lid not in dests:
                raise NetworkSpecError(
                    f"control pattern blocks {lid!r}, which no relaxation channel feeds"
                )


# -- standard star network -------------------------------------------------

# Typical parameter set: inter-dot coupling U^-1 = 100 ps, sublevel
# relaxation Gamma^-1 = 10 ps, lower-level radiative lifetime 1 ns, source
# radiative lifetime 2.92 ns.  State filling keeps a hundredth of the free
# relaxation rate.
STANDARD_COUPLING_PS = 100.0
STANDARD_RELAXATION_PS = 10.0
STANDARD_LOWER_LIFETIME_PS = 1000.0
STANDARD_SOURCE_LIFETIME_PS = 2920.0
STANDARD_BLOCK_DIVISOR = 100.0


def lower_level_id(dot_index: int) -> str:
    return f"l{dot_index}"


def upper_level_id(dot_index: int) -> str:
    return f"u{dot_index}"


def build_standard_network(
    num_large_dots: int = 4,
    coupling_ps: float = STANDARD_COUPLING_PS,
    relaxation_ps: float = STANDARD_RELAXATION_PS,
    lower_lifetime_ps: float = STANDARD_LOWER_LIFETIME_PS,
    source_lifetime_ps: float = STANDARD_SOURCE_LIFETIME_PS,
    block_divisor: float = STANDARD_BLOCK_DIVISOR,
) -> QdNetwork:
    """Small source dot coupled to ``num_large_dots`` identical larger dots.

    Each large dot i contributes an upper level u_i resonant with the
    source S and a radiative lower level l_i fed by sublevel relaxation.
    Control light on l_i throttles that relaxation by ``block_divisor``.
    """
    if num_large_dots < 1:
        raise NetworkSpecError("need at least one large dot")
    if min(coupling_ps, relaxation_ps, lower_lifetime_ps, source_lifetime_ps) <= 0:
        raise NetworkSpecError("all times must be positive")

    gamma_s = 1.0 / source_lifetime_ps
    gamma_l = 1.0 / lower_lifetime_ps
    coupling = 1.0 / coupling_ps
    relax = 1.0 / relaxation_ps

    levels = [LevelSpec("S", "src", "source", radiative_rate=gamma_s)]
    couplings = []
    relaxations = []
    for i in range(1, num_large_dots + 1):
        dot = f"dot{i}"
        u, l = upper_level_id(i), lower_level_id(i)
        levels.append(LevelSpec(u, dot, "upper"))
        levels.append(LevelSpec(l, dot, "lower", radiative_rate=gamma_l))
        couplings.append(Coupling("S", u, coupling))
        relaxations.append(RelaxationChannel(u, l, relax, relax / block_divisor))
    return QdNetwork(levels, couplings, relaxations)


def pattern_for_dots(blocked_dots, num_large_dots: int = 4) -> ControlPattern:
    """Control pattern filling the lower level of each listed large dot."""
    ids = []
    for i in blocked_dots:
        if not 1 <= i <= num_large_dots:
            raise NetworkSpecError(f"dot index {i} out of range 1..{num_large_dots}")
        ids.append(lower_level_id(i))
    return ControlPattern(frozenset(ids))


def all_patterns(num_large_dots: int = 4) -> list:
    """All 2^N control patterns, ordered by blocked-set bitmask."""
    out = []
    for mask in range(2 ** num_large_dots):
        blocked = [i + 1 for i in range(num_large_dots) if mask >> i & 1]
        out.append(pattern_for_dots(blocked, num_large_dots))
    return out
