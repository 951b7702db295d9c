"""3-SAT formulas: DIMACS CNF parsing, serialization, evaluation,
and uniform random instance generation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimacsError(ValueError):
    """Malformed DIMACS input; message carries the offending line number."""


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple  # of tuples of signed nonzero ints, 1..3 literals each
    name: str = ""

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("num_vars must be >= 1")
        for idx, clause in enumerate(self.clauses):
            if not 1 <= len(clause) <= 3:
                raise ValueError(f"clause {idx + 1}: need 1-3 literals, got {len(clause)}")
            seen = set()
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"clause {idx + 1}: literal {lit} out of range")
                if lit in seen:
                    raise ValueError(f"clause {idx + 1}: duplicate literal {lit}")
                if -lit in seen:
                    raise ValueError(f"clause {idx + 1}: contains both {lit} and {-lit}")
                seen.add(lit)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)


def evaluate(formula: CnfFormula, assignment) -> bool:
    """assignment[i] is the 0/1 value of variable i+1; empty formula is true."""
    if len(assignment) != formula.num_vars:
        raise ValueError("assignment length must equal num_vars")
    for clause in formula.clauses:
        for lit in clause:
            value = assignment[abs(lit) - 1]
            if (lit > 0 and value) or (lit < 0 and not value):
                break
        else:
            return False
    return True


def parse_dimacs(text: str, name: str = "") -> CnfFormula:
    """Parse DIMACS CNF.  Tolerates comment lines, blank lines, clauses
    spanning lines, and the '%' end marker some benchmark sets append."""
    num_vars = num_clauses = None
    clauses = []
    current = []
    header_line = 0
    ended = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            ended = True
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError(f"line {lineno}: duplicate problem line")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed problem line {line!r}")
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: non-integer counts in {line!r}") from None
            if num_vars < 1 or num_clauses < 0:
                raise DimacsError(f"line {lineno}: nonpositive counts in {line!r}")
            continue
        if num_vars is None:
            raise DimacsError(f"line {lineno}: clause before problem line")
        if ended:
            if set(line.split()) <= {"0"}:
                continue
            raise DimacsError(f"line {lineno}: content after '%' end marker")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                if not current:
                    raise DimacsError(f"line {lineno}: empty clause")
                clauses.append(tuple(current))
                current = []
            else:
                if abs(lit) > num_vars:
                    raise DimacsError(f"line {lineno}: literal {lit} out of range 1..{num_vars}")
                current.append(lit)
        header_line = lineno

    if num_vars is None:
        raise DimacsError("no problem line found")
    if current:
        raise DimacsError(f"line {header_line}: last clause missing terminating 0")
    if len(clauses) != num_clauses:
        raise DimacsError(
            f"problem line declares {num_clauses} clauses, found {len(clauses)}"
        )
    try:
        return CnfFormula(num_vars=num_vars, clauses=tuple(clauses), name=name)
    except ValueError as exc:
        raise DimacsError(str(exc)) from None


def load_dimacs(path) -> CnfFormula:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_dimacs(fh.read(), name=str(path))


def to_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.num_vars} {formula.num_clauses}"]
    for clause in formula.clauses:
        lines.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(lines) + "\n"


def random_3sat(num_vars: int, num_clauses: int, rng: np.random.Generator,
                name: str = "") -> CnfFormula:
    """Uniform random 3-SAT: three distinct variables per clause,
    independent uniform signs."""
    if num_vars < 3:
        raise ValueError("need at least 3 variables")
    clauses = []
    for _ in range(num_clauses):
        vs = rng.choice(num_vars, size=3, replace=False) + 1
        signs = rng.integers(0, 2, size=3) * 2 - 1
        clauses.append(tuple(int(s * v) for s, v in zip(signs, np.sort(vs))))
    return CnfFormula(num_vars=num_vars, clauses=tuple(clauses), name=name)


def planted_3sat(num_vars: int, num_clauses: int, rng: np.random.Generator,
                 name: str = ""):
    """Random 3-SAT guaranteed satisfiable: draw a hidden assignment, then
    keep only uniform clauses it satisfies (7/8 acceptance per draw).

    Returns (formula, assignment).  Stand-in for public uf* benchmark sets
    when only satisfiable instances are wanted and no complete solver is
    available to certify uniform draws.
    """
    if num_vars < 3:
        raise ValueError("need at least 3 variables")
    model = tuple(int(b) for b in rng.integers(0, 2, size=num_vars))
    clauses = []
    while len(clauses) < num_clauses:
        vs = np.sort(rng.choice(num_vars, size=3, replace=False)) + 1
        signs = rng.integers(0, 2, size=3) * 2 - 1
        clause = tuple(int(s * v) for s, v in zip(signs, vs))
        if any((lit > 0) == bool(model[abs(lit) - 1]) for lit in clause):
            clauses.append(clause)
    return CnfFormula(num_vars=num_vars, clauses=tuple(clauses), name=name), model


# The running example used throughout the solver tests: six clauses over
# four variables with the unique model (1, 1, 1, 1).
EXAMPLE_FORMULA = CnfFormula(
    num_vars=4,
    clauses=(
        (1, -2),
        (-2, 3, -4),
        (1, 3),
        (2, -3),
        (3, -4),
        (-1, 4),
    ),
    name="example-6x4",
)
