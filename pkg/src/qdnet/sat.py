"""Stochastic 3-SAT solving on a radiation network with compiled
bounceback rules, plus the WalkSAT baseline and a benchmark harness.

Each variable i owns two dot pairs (i,0) and (i,1).  Per step every pair
radiates with probability p when its control F is on and 1-p when off;
radiation feeds a saturating accumulator X in {-1,0,1}; X=1 on (i,v)
with the opposite accumulator nonpositive writes x_i = v; and the next
step's controls F are the targets of every bounceback rule whose premise
is fully supported by the updated X.

Rules come in three families compiled from the formula:

* intra  -- ({(i,v)}, {(i,1-v)}) for every variable: an established value
            suppresses radiation of its complement.
* inter  -- per clause and member literal: if X supports the falsifying
            assignment of every OTHER literal, suppress the assignment of
            this literal that would falsify the clause too.
* contra -- for each variable, each pair of inter rules targeting (i,0)
            and (i,1) would jointly pin both values; the merged premise
            targets itself, kicking out the contradictory support.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .cnf import CnfFormula, evaluate, random_3sat
from .seeding import derive_rng


@dataclass(frozen=True)
class BounceRule:
    premise: frozenset  # of (variable, value) pairs, all required at X=1
    target: frozenset   # of (variable, value) pairs stimulated when fired

    def __post_init__(self):
        if not self.target:
            raise ValueError("rule target must be nonempty")


def _falsifying(literal: int):
    # the (variable, value) assignment that falsifies the literal
    return (literal, 0) if literal > 0 else (-literal, 1)


@dataclass
class RuleSet:
    num_vars: int
    intra: tuple
    inter: tuple
    contra: tuple
    _matrices: dict = field(default_factory=dict, repr=False)

    def __iter__(self):
        yield from self.intra
        yield from self.inter
        yield from self.contra

    def __len__(self):
        return len(self.intra) + len(self.inter) + len(self.contra)

    def matrices(self):
        """Dense premise/target incidence over flat pair index 2(i-1)+v."""
        if "premise" not in self._matrices:
            rules = list(self)
            width = 2 * self.num_vars
            pm = np.zeros((len(rules), width), dtype=bool)
            qm = np.zeros((len(rules), width), dtype=bool)
            for r, rule in enumerate(rules):
                for i, v in rule.premise:
                    pm[r, 2 * (i - 1) + v] = True
                for i, v in rule.target:
                    qm[r, 2 * (i - 1) + v] = True
            self._matrices["premise"] = pm
            self._matrices["target"] = qm
        return self._matrices["premise"], self._matrices["target"]

    def packed(self):
        """The incidence rows packed into little-endian uint64 words.

        A rule fires iff its premise word is a bitwise subset of the
        support word, which keeps the per-step cost at a handful of
        vector ops over the rule count instead of a matrix product.
        """
        if "pm_words" not in self._matrices:
            pm, qm = self.matrices()
            self._matrices["pm_words"] = _pack_rows(pm)
            self._matrices["qm_words"] = _pack_rows(qm)
        return self._matrices["pm_words"], self._matrices["qm_words"]

    def batch_arrays(self):
        """Gather/scatter index arrays for the trial-batched solver.

        Intra rules are the even/odd pair swap of the support array and
        are not materialized here.  Inter and contra premises are padded
        to four support columns with a sentinel always-true column 2N;
        target membership is flattened to (rule, column) entries sorted
        by column so one reduceat ORs each column's firing rules.
        """
        if "prem_cols" not in self._matrices:
            width = 2 * self.num_vars
            rules = list(self.inter) + list(self.contra)
            if any(len(r.premise) > 4 for r in rules):
                raise ValueError("premises wider than 4 pairs (clauses beyond 3-SAT)")
            prem = np.full((len(rules), 4), width, dtype=np.intp)
            entries = []
            for r, rule in enumerate(rules):
                for k, (i, v) in enumerate(sorted(rule.premise)):
                    prem[r, k] = 2 * (i - 1) + v
                for i, v in rule.target:
                    entries.append((2 * (i - 1) + v, r))
            entries.sort()
            cols = np.array([c for c, _ in entries], dtype=np.intp)
            starts = np.flatnonzero(np.diff(cols, prepend=-1))
            self._matrices["prem_cols"] = prem
            self._matrices["entry_rule"] = np.array([r for _, r in entries], dtype=np.intp)
            self._matrices["entry_starts"] = starts
            self._matrices["group_cols"] = cols[starts] if cols.size else cols
        return (
            self._matrices["prem_cols"],
            self._matrices["entry_rule"],
            self._matrices["entry_starts"],
            self._matrices["group_cols"],
        )


def _pack_rows(rows: np.ndarray) -> np.ndarray:
    """Pack a (rows, width) bool array into (rows, ceil(width/64)) uint64."""
    n, width = rows.shape
    words = (width + 63) // 64
    padded = np.zeros((n, 64 * words), dtype=np.uint8)
    padded[:, :width] = rows
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64)


def _pack_bits(bits: np.ndarray, words: int) -> np.ndarray:
    padded = np.zeros(64 * words, dtype=np.uint8)
    padded[: bits.size] = bits
    return np.packbits(padded, bitorder="little").view(np.uint64)


def compile_rules(formula: CnfFormula) -> RuleSet:
    """Compile the intra/inter/contra bounceback rules for a formula.

    One pass over clauses builds inter rules; contra rules pair the inter
    rules of opposite targets per variable and are deduplicated.  A unit
    clause yields an inter rule with an empty premise (always firing).
    """
    intra = []
    for i in range(1, formula.num_vars + 1):
        intra.append(BounceRule(frozenset([(i, 0)]), frozenset([(i, 1)])))
        intra.append(BounceRule(frozenset([(i, 1)]), frozenset([(i, 0)])))

    inter = []
    targeting = {}  # (variable, value) -> list of premises
    for clause in formula.clauses:
        for pos, lit in enumerate(clause):
            premise = frozenset(
                _falsifying(other) for k, other in enumerate(clause) if k != pos
            )
            target_pair = _falsifying(lit)
            inter.append(BounceRule(premise, frozenset([target_pair])))
            targeting.setdefault(target_pair, []).append(premise)

    contra = []
    seen = set()
    for i in range(1, formula.num_vars + 1):
        for p0 in targeting.get((i, 0), ()):
            for p1 in targeting.get((i, 1), ()):
                merged = p0 | p1
                key = merged
                if merged and key not in seen:
                    seen.add(key)
                    contra.append(BounceRule(merged, merged))

    return RuleSet(
        num_vars=formula.num_vars,
        intra=tuple(intra),
        inter=tuple(inter),
        contra=tuple(contra),
    )


# -- solver dynamics ---------------------------------------------------------


@dataclass(frozen=True)
class NanoPsConfig:
    p: float | tuple = 0.1   # radiation probability under control, scalar or per pair
    max_steps: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if np.ndim(self.p) > 0:
            object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        values = np.atleast_1d(self.p)
        if not ((0.0 < values) & (values < 1.0)).all():
            raise ValueError("p must lie strictly in (0, 1)")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass
class NanoPsState:
    x: np.ndarray   # (N,) current assignment bits
    X: np.ndarray   # (2N,) saturating accumulators in {-1,0,1}
    F: np.ndarray   # (2N,) bounceback controls
    R: np.ndarray   # (2N,) last radiation draw
    t: int = 0

    @classmethod
    def initial(cls, num_vars: int) -> "NanoPsState":
        w = 2 * num_vars
        return cls(
            x=np.zeros(num_vars, dtype=np.int8),
            X=np.zeros(w, dtype=np.int8),
            F=np.zeros(w, dtype=bool),
            R=np.zeros(w, dtype=bool),
        )


def _advance(x, X, F, u, p, pm_words, qm_words):
    """Shared update body: R from F and u, then X, x, F in place."""
    radiate = np.where(F, u < p, u < 1.0 - p)
    np.clip(X + np.where(radiate, np.int8(1), np.int8(-1)), -1, 1, out=X)

    x0, x1 = X[0::2], X[1::2]
    x[(x0 == 1) & (x1 <= 0)] = 0
    x[(x1 == 1) & (x0 <= 0)] = 1

    support = _pack_bits((X == 1).view(np.uint8), pm_words.shape[1])
    fired = np.ones(pm_words.shape[0], dtype=bool)
    for w in range(pm_words.shape[1]):
        fired &= (pm_words[:, w] & support[w]) == pm_words[:, w]
    stimulated = np.bitwise_or.reduce(qm_words[fired], axis=0)
    F = np.unpackbits(stimulated.view(np.uint8), bitorder="little")[: F.size].astype(bool)
    return radiate, F


def nanops_step(
    state: NanoPsState,
    rules: RuleSet,
    config: NanoPsConfig,
    rng: np.random.Generator,
) -> NanoPsState:
    """Advance one synchronous update: R, then X, then x, then F.

    The radiation draw uses one uniform vector in flat pair order
    (variable ascending, value 0 then 1), so a seeded run is reproducible
    regardless of rule count.
    """
    pm_words, qm_words = rules.packed()
    x, X = state.x.copy(), state.X.copy()
    u = rng.random(2 * rules.num_vars)
    radiate, F = _advance(x, X, state.F, u, np.asarray(config.p), pm_words, qm_words)
    return NanoPsState(x=x, X=X, F=F, R=radiate, t=state.t + 1)


@dataclass
class SolveResult:
    solved: bool
    assignment: tuple | None
    steps: int
    trace: np.ndarray | None = None  # (steps, 2N) X history when recorded


def _clause_arrays(formula: CnfFormula):
    """Padded (var index, satisfying value, valid) arrays for array evaluation."""
    m = len(formula.clauses)
    vidx = np.zeros((m, 3), dtype=np.intp)
    want = np.zeros((m, 3), dtype=np.int8)
    mask = np.zeros((m, 3), dtype=bool)
    for ci, clause in enumerate(formula.clauses):
        for k, lit in enumerate(clause):
            vidx[ci, k] = abs(lit) - 1
            want[ci, k] = 1 if lit > 0 else 0
            mask[ci, k] = True
    return vidx, want, mask


def nanops_solve(
    formula: CnfFormula,
    config: NanoPsConfig = NanoPsConfig(),
    rng: np.random.Generator | None = None,
    rules: RuleSet | None = None,
    record_trace: bool = False,
) -> SolveResult:
    """Run the radiation dynamics from the all-zero state until the read
    assignment satisfies the formula or the step budget runs out."""
    if rng is None:
        rng = derive_rng(config.seed, "nanops")
    if rules is None:
        rules = compile_rules(formula)
    pm_words, qm_words = rules.packed()
    state = NanoPsState.initial(formula.num_vars)
    x, X, F = state.x, state.X, state.F
    p = np.asarray(config.p)
    vidx, want, mask = _clause_arrays(formula)
    trace = [] if record_trace else None

    # uniforms come in blocks purely for speed; the stream is identical to
    # per-step draws, so stepping with nanops_step reproduces this run
    block, drawn, t = 256, 0, 0
    u_block = rng.random((0, 0))
    while t < config.max_steps:
        if drawn == u_block.shape[0]:
            u_block = rng.random((min(block, config.max_steps - t), 2 * rules.num_vars))
            drawn = 0
        _, F = _advance(x, X, F, u_block[drawn], p, pm_words, qm_words)
        drawn += 1
        t += 1
        if record_trace:
            trace.append(X.copy())
        if bool(((x[vidx] == want) & mask).any(axis=1).all()):
            return SolveResult(
                solved=True,
                assignment=tuple(int(b) for b in x),
                steps=t,
                trace=np.array(trace) if record_trace else None,
            )
    return SolveResult(
        solved=False,
        assignment=None,
        steps=t,
        trace=np.array(trace) if record_trace else None,
    )


def nanops_solve_many(
    formula: CnfFormula,
    config: NanoPsConfig,
    rngs,
    rules: RuleSet | None = None,
) -> list:
    """Run one independent trial per generator, batched across trials.

    Pure vectorization of nanops_solve: each trial consumes its own
    uniform stream in the same block pattern, so result k is identical
    to nanops_solve(formula, config, rng=rngs[k]).  Solved trials drop
    out of the batch and stop drawing.
    """
    if rules is None:
        rules = compile_rules(formula)
    prem_cols, entry_rule, entry_starts, group_cols = rules.batch_arrays()
    n = formula.num_vars
    width = 2 * n
    p = np.asarray(config.p)
    vidx, want, mask = _clause_arrays(formula)

    rngs = list(rngs)
    if not rngs:
        return []
    results = [None] * len(rngs)
    ids = np.arange(len(rngs))
    X = np.zeros((len(rngs), width), dtype=np.int8)
    x = np.zeros((len(rngs), n), dtype=np.int8)
    F = np.zeros((len(rngs), width), dtype=bool)
    se = np.ones((len(rngs), width + 1), dtype=bool)  # support + sentinel column

    block = 256
    u_blocks = None
    offset = 0
    for t in range(1, config.max_steps + 1):
        if u_blocks is None or offset == u_blocks.shape[1]:
            b = min(block, config.max_steps - t + 1)
            u_blocks = np.stack([rngs[k].random((b, width)) for k in ids])
            offset = 0
        u = u_blocks[:, offset, :]
        offset += 1

        radiate = u < np.where(F, p, 1.0 - p)
        np.clip(X + np.where(radiate, np.int8(1), np.int8(-1)), -1, 1, out=X)
        x0, x1 = X[:, 0::2], X[:, 1::2]
        x[(x0 == 1) & (x1 <= 0)] = 0
        x[(x1 == 1) & (x0 <= 0)] = 1

        support = X == 1
        F = support.reshape(-1, n, 2)[:, :, ::-1].reshape(-1, width).copy()
        if entry_rule.size:
            se[:, :width] = support
            fired = (
                se[:, prem_cols[:, 0]] & se[:, prem_cols[:, 1]]
                & se[:, prem_cols[:, 2]] & se[:, prem_cols[:, 3]]
            )
            hits = np.logical_or.reduceat(fired[:, entry_rule], entry_starts, axis=1)
            F[:, group_cols] |= hits

        sat = ((x[:, vidx] == want) & mask).any(axis=2).all(axis=1)
        if sat.any():
            for k in np.flatnonzero(sat):
                results[ids[k]] = SolveResult(True, tuple(int(b_) for b_ in x[k]), t)
            keep = ~sat
            if not keep.any():
                return results
            ids = ids[keep]
            X, x, F, se = X[keep], x[keep], F[keep], se[keep]
            u_blocks = u_blocks[keep]

    for k in ids:
        results[k] = SolveResult(False, None, config.max_steps)
    return results


# -- WalkSAT baseline --------------------------------------------------------


@dataclass(frozen=True)
class WalkSatConfig:
    max_steps: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


def walksat_solve(
    formula: CnfFormula,
    config: WalkSatConfig = WalkSatConfig(),
    rng: np.random.Generator | None = None,
) -> SolveResult:
    """Pure random-walk WalkSAT: start from a uniform random assignment;
    while unsatisfied clauses remain, pick one uniformly and flip one of
    its variables uniformly.  Steps count flips."""
    if rng is None:
        rng = derive_rng(config.seed, "walksat")
    n, clauses = formula.num_vars, formula.clauses
    assignment = rng.integers(0, 2, size=n).astype(np.int8)

    # per-variable occurrence lists: (clause index, value satisfying it)
    occ = [[] for _ in range(n + 1)]
    for ci, clause in enumerate(clauses):
        for lit in clause:
            occ[abs(lit)].append((ci, 1 if lit > 0 else 0))

    sat_count = np.zeros(len(clauses), dtype=np.int32)
    for ci, clause in enumerate(clauses):
        for lit in clause:
            if assignment[abs(lit) - 1] == (1 if lit > 0 else 0):
                sat_count[ci] += 1
    unsat = [ci for ci, c in enumerate(sat_count) if c == 0]
    unsat_pos = {ci: k for k, ci in enumerate(unsat)}

    def flip(var: int):
        old = assignment[var - 1]
        assignment[var - 1] = 1 - old
        new = assignment[var - 1]
        for ci, want in occ[var]:
            if want == new:
                if sat_count[ci] == 0:
                    k = unsat_pos.pop(ci)
                    last = unsat.pop()
                    if last != ci:
                        unsat[k] = last
                        unsat_pos[last] = k
                sat_count[ci] += 1
            else:
                sat_count[ci] -= 1
                if sat_count[ci] == 0:
                    unsat_pos[ci] = len(unsat)
                    unsat.append(ci)

    for step in range(config.max_steps):
        if not unsat:
            return SolveResult(True, tuple(int(b) for b in assignment), step)
        clause = clauses[unsat[rng.integers(len(unsat))]]
        flip(abs(clause[rng.integers(len(clause))]))
    if not unsat:
        return SolveResult(True, tuple(int(b) for b in assignment), config.max_steps)
    return SolveResult(False, None, config.max_steps)


# -- benchmark harness -------------------------------------------------------


@dataclass
class BenchmarkRow:
    instance: str
    solver: str
    trials: int
    solved: int
    success_rate: float
    mean_steps: float      # over solved trials only; nan if none solved
    median_steps: float
    timeouts: int          # trials excluded from the step statistics
    walksat_rank: int = -1  # instance order by WalkSAT mean, 0-based


def benchmark(
    instances,
    trials: int = 100,
    budget: int = 100_000,
    p: float = 0.1,
    seed: int = 0,
    solvers=("nanops", "walksat"),
) -> list:
    """Run each solver `trials` times per instance with streams derived
    from (seed, instance name, solver, trial).  Rows are ordered by
    instance then solver; every row carries the instance's rank under
    the WalkSAT mean so plots can sort the way Fig-style comparisons do.
    """
    if not instances:
        raise ValueError("no instances to benchmark")
    rows = []
    for name, formula in instances:
        rules = compile_rules(formula) if "nanops" in solvers else None
        for solver in solvers:
            if solver == "nanops":
                rngs = [derive_rng(seed, "bench", name, solver, t) for t in range(trials)]
                res = nanops_solve_many(
                    formula, NanoPsConfig(p=p, max_steps=budget), rngs, rules=rules
                )
            elif solver == "walksat":
                res = [
                    walksat_solve(
                        formula,
                        WalkSatConfig(max_steps=budget),
                        rng=derive_rng(seed, "bench", name, solver, t),
                    )
                    for t in range(trials)
                ]
            else:
                raise ValueError(f"unknown solver {solver!r}")
            steps = [r.steps for r in res if r.solved]
            timeouts = trials - len(steps)
            solved = len(steps)
            rows.append(
                BenchmarkRow(
                    instance=name,
                    solver=solver,
                    trials=trials,
                    solved=solved,
                    success_rate=solved / trials,
                    mean_steps=float(np.mean(steps)) if steps else float("nan"),
                    median_steps=float(np.median(steps)) if steps else float("nan"),
                    timeouts=timeouts,
                )
            )

    by_walksat = sorted(
        (r for r in rows if r.solver == "walksat"),
        key=lambda r: (np.isnan(r.mean_steps), r.mean_steps, r.instance),
    )
    rank = {r.instance: k for k, r in enumerate(by_walksat)}
    for r in rows:
        r.walksat_rank = rank.get(r.instance, -1)
    return rows


def compile_timing(num_vars: int, num_clauses: int, seed: int = 0, repeats: int = 3) -> float:
    """Median wall time of compile_rules on a fresh random instance."""
    rng = derive_rng(seed, "compile-timing", num_vars, num_clauses)
    formula = random_3sat(num_vars, num_clauses, rng)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        compile_rules(formula)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))
