"""CNF formulas, literal weights, DIMACS parsing, and the brute-force oracle.

The instance format is DIMACS CNF with optional cachet-style weight lines:
``w <var> <p>`` meaning W(var,1)=p and W(var,0)=1-p, or the extended form
``w <var> <w0> <w1>`` for arbitrary weight pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    InvalidWeightLine,
    LiteralOutOfRange,
    MalformedHeader,
    TooManyVariables,
    UnterminatedClause,
)

BRUTE_FORCE_VAR_LIMIT = 25


@dataclass(frozen=True)
class CnfFormula:
    """A CNF formula over variables 1..num_vars.

    Clauses are tuples of nonzero literals; sign gives polarity, magnitude
    the variable. Tautological clauses and duplicate literals are removed
    at parse time, so neither appears here.
    """

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("negative variable count")
        for clause in self.clauses:
            seen = set()
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise LiteralOutOfRange(f"literal {lit} out of range 1..{self.num_vars}")
                if lit in seen or -lit in seen:
                    raise ValueError(f"clause {clause} has duplicate or complementary literals")
                seen.add(lit)

    def variables(self):
        return range(1, self.num_vars + 1)


@dataclass(frozen=True)
class WeightFunction:
    """Literal weights: variable id -> (W(x,0), W(x,1)).

    Variables absent from the map weigh (1.0, 1.0). Negative weights are
    permitted.
    """

    weights: dict[int, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        for var, (w0, w1) in self.weights.items():
            if var < 1:
                raise InvalidWeightLine(f"weight for non-positive variable {var}")
            for w in (w0, w1):
                if not math.isfinite(w):
                    raise InvalidWeightLine(f"non-finite weight {w} for variable {var}")

    def pair(self, var: int) -> tuple[float, float]:
        return self.weights.get(var, (1.0, 1.0))


def _finite(x: float) -> bool:
    return math.isfinite(x)


def parse_dimacs(text) -> tuple[CnfFormula, WeightFunction]:
    """Parse a DIMACS CNF instance with optional weight lines.

    Accepts ``str`` or ``bytes``. Tautological clauses are dropped and
    duplicate literals within a clause removed.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")

    num_vars = None
    declared_clauses = None
    weights: dict[int, tuple[float, float]] = {}
    clauses: list[tuple[int, ...]] = []
    pending: list[int] = []

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise MalformedHeader(f"bad problem line: {line!r}")
            try:
                num_vars = int(parts[2])
                declared_clauses = int(parts[3])
            except ValueError:
                raise MalformedHeader(f"bad problem line: {line!r}")
            if num_vars < 0 or declared_clauses < 0:
                raise MalformedHeader(f"negative counts in problem line: {line!r}")
            continue
        if line.startswith("w"):
            if num_vars is None:
                raise MalformedHeader("weight line before 'p cnf' header")
            parts = line.split()
            try:
                var = int(parts[1])
                vals = [float(p) for p in parts[2:]]
            except (IndexError, ValueError):
                raise InvalidWeightLine(f"bad weight line: {line!r}")
            if var < 1 or var > num_vars:
                raise InvalidWeightLine(f"weight for unknown variable {var}")
            if len(vals) == 1:
                pair = (1.0 - vals[0], vals[0])
            elif len(vals) == 2:
                pair = (vals[0], vals[1])
            else:
                raise InvalidWeightLine(f"bad weight line: {line!r}")
            if not all(_finite(w) for w in pair):
                raise InvalidWeightLine(f"non-finite weight in line: {line!r}")
            weights[var] = pair
            continue
        # clause data
        if num_vars is None:
            raise MalformedHeader("clause data before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise MalformedHeader(f"unexpected token {tok!r}")
            if lit == 0:
                clause = _simplify_clause(pending, num_vars)
                if clause is not None:
                    clauses.append(clause)
                pending = []
            else:
                if abs(lit) > num_vars:
                    raise LiteralOutOfRange(f"literal {lit} exceeds num_vars={num_vars}")
                pending.append(lit)

    if num_vars is None:
        raise MalformedHeader("missing 'p cnf' header")
    if pending:
        raise UnterminatedClause(f"clause {pending} missing terminating 0")

    return CnfFormula(num_vars, tuple(clauses)), WeightFunction(weights)


def _simplify_clause(lits: list[int], num_vars: int):
    """Deduplicate; return None for tautologies (kept out of the formula)."""
    out: list[int] = []
    seen = set()
    for lit in lits:
        if -lit in seen:
            return None
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


def serialize_dimacs(formula: CnfFormula, weights: WeightFunction) -> str:
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    for clause in formula.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    for var in sorted(weights.weights):
        w0, w1 = weights.weights[var]
        lines.append(f"w {var} {w0!r} {w1!r}")
    return "\n".join(lines) + "\n"


def clause_satisfied(clause: tuple[int, ...], assignment: dict[int, int]) -> bool:
    return any(assignment[abs(lit)] == (1 if lit > 0 else 0) for lit in clause)


def brute_force_count(formula: CnfFormula, weights: WeightFunction) -> float:
    """Direct evaluation of the weighted-count sum over all assignments.

    Guarded to at most 2^25 assignments; this is the oracle every other
    stage is tested against. Assignments are enumerated in chunks and
    evaluated with numpy so 18-variable instances stay fast.
    """
    import numpy as np

    if formula.num_vars > BRUTE_FORCE_VAR_LIMIT:
        raise TooManyVariables(
            f"{formula.num_vars} variables exceeds oracle limit {BRUTE_FORCE_VAR_LIMIT}"
        )
    nv = formula.num_vars
    pairs = np.array([weights.pair(v) for v in formula.variables()])  # (nv, 2)
    total = 0.0
    chunk = 1 << min(nv, 16)
    for base in range(0, 1 << nv, chunk):
        codes = np.arange(base, base + chunk, dtype=np.int64)
        # bit v-1 of the code is the value of variable v
        bits = (codes[:, None] >> np.arange(nv)) & 1  # (chunk, nv)
        sat = np.ones(len(codes), dtype=bool)
        for clause in formula.clauses:
            hit = np.zeros(len(codes), dtype=bool)
            for lit in clause:
                want = 1 if lit > 0 else 0
                hit |= bits[:, abs(lit) - 1] == want
            sat &= hit
        weight = np.ones(len(codes))
        for k in range(nv):
            weight *= pairs[k, bits[:, k]]
        total += float(weight[sat].sum())
    return total
