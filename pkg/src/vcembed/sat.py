"""CNF formulas, DIMACS I/O and a small DPLL oracle.

Literals use the DIMACS convention: ``+v`` is variable ``v``, ``-v`` its
negation.  Variables are numbered from 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Optional

from .model import Verdict

Valuation = Mapping[int, bool]


@dataclass(frozen=True)
class CnfFormula:
    var_count: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.var_count < 1:
            raise ValueError("a formula needs at least one variable")
        normalized = []
        for i, clause in enumerate(self.clauses):
            lits = tuple(dict.fromkeys(int(l) for l in clause))
            if not lits:
                raise ValueError(f"clause {i + 1} is empty")
            for lit in lits:
                if lit == 0 or abs(lit) > self.var_count:
                    raise ValueError(
                        f"clause {i + 1} references variable {abs(lit)} "
                        f"outside 1..{self.var_count}"
                    )
            normalized.append(lits)
        object.__setattr__(self, "clauses", tuple(normalized))

    @property
    def clause_count(self) -> int:
        return len(self.clauses)

    def __str__(self) -> str:
        def lit(l):
            return f"x{l}" if l > 0 else f"~x{-l}"

        return " & ".join("(" + " | ".join(map(lit, c)) + ")" for c in self.clauses)


def literal_true(lit: int, val: Valuation) -> bool:
    return bool(val[abs(lit)]) == (lit > 0)


def evaluate(formula: CnfFormula, val: Valuation) -> bool:
    """True iff ``val`` satisfies every clause."""
    missing = [v for v in range(1, formula.var_count + 1) if v not in val]
    if missing:
        raise KeyError(f"valuation misses variables {missing}")
    return all(any(literal_true(l, val) for l in c) for c in formula.clauses)


def solve_sat(formula: CnfFormula) -> Optional[dict[int, bool]]:
    """DPLL with unit propagation; returns a total satisfying valuation or None."""
    clauses = [frozenset(c) for c in formula.clauses]
    if any(-l in c for c in clauses for l in c):
        clauses = [c for c in clauses if not any(-l in c for l in c)]
    model = _dpll(clauses, {})
    if model is None:
        return None
    return {v: model.get(v, False) for v in range(1, formula.var_count + 1)}


def _simplify(clauses, lit):
    out = []
    for c in clauses:
        if lit in c:
            continue
        if -lit in c:
            c = c - {-lit}
            if not c:
                return None
        out.append(c)
    return out


def _dpll(clauses, assigned):
    while True:
        unit = next((c for c in clauses if len(c) == 1), None)
        if unit is None:
            break
        (lit,) = unit
        assigned = {**assigned, abs(lit): lit > 0}
        clauses = _simplify(clauses, lit)
        if clauses is None:
            return None
    if not clauses:
        return assigned
    # Branch on the most frequent variable, positive phase first.
    counts: dict[int, int] = {}
    for c in clauses:
        for l in c:
            counts[abs(l)] = counts.get(abs(l), 0) + 1
    var = max(sorted(counts), key=counts.__getitem__)
    for lit in (var, -var):
        rest = _simplify(clauses, lit)
        if rest is None:
            continue
        found = _dpll(rest, {**assigned, var: lit > 0})
        if found is not None:
            return found
    return None


def brute_force_sat(formula: CnfFormula) -> Optional[dict[int, bool]]:
    """Exhaustive search over all 2^n valuations (test oracle)."""
    n = formula.var_count
    for bits in product((False, True), repeat=n):
        val = dict(zip(range(1, n + 1), bits))
        if evaluate(formula, val):
            return val
    return None


def restrict_to_3sat(formula: CnfFormula) -> Verdict:
    """Accept only formulas whose clauses all have exactly three literals."""
    bad = [
        f"clause {i + 1} has {len(c)} literals"
        for i, c in enumerate(formula.clauses)
        if len(c) != 3
    ]
    return Verdict(tuple(bad))


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF; clauses may span lines and are terminated by 0."""
    var_count = clause_count = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "c%":
            if line.startswith("%"):
                break
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: malformed header {line!r}")
            var_count, clause_count = int(parts[2]), int(parts[3])
            continue
        if var_count is None:
            raise ValueError(f"line {lineno}: clause before 'p cnf' header")
        try:
            tokens = [int(tok) for tok in line.split()]
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer literal in {line!r}") from None
        for tok in tokens:
            if tok == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(tok)
    if var_count is None:
        raise ValueError("missing 'p cnf' header")
    if current:
        clauses.append(tuple(current))
    if clause_count is not None and clause_count != len(clauses):
        raise ValueError(f"header announces {clause_count} clauses, found {len(clauses)}")
    return CnfFormula(var_count, tuple(clauses))


def to_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.var_count} {formula.clause_count}"]
    lines += [" ".join(map(str, c)) + " 0" for c in formula.clauses]
    return "\n".join(lines) + "\n"
