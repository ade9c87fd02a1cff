"""Uplink-bandwidth counting arguments, as predicates plus exhaustive checks.

A gadget holding ``k`` of the ``n`` nodes pushes ``k * (n - k)`` unit
interconnect flows through its uplink.  The checks here ask: given the
uplink capacities of the reductions, which distributions of nodes over
gadgets are admissible?  The expected answer is "exactly the balanced
one" (``alpha`` per variable gadget, 2 per clause gadget).

Naming: ``variable_loads`` is the length-``beta`` sequence bounded by
``2 * alpha``; ``clause_loads`` the length-``alpha`` sequence bounded by 3.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

DEFAULT_ENUMERATION_CAP = 20_000_000


class LoadError(ValueError):
    """A load sequence violates a precondition of the lemma."""


class LoadSumError(LoadError):
    pass


class LoadBoundError(LoadError):
    pass


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GadgetLoad:
    variable_loads: tuple[int, ...]
    alpha: int
    beta: int
    clause_loads: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "variable_loads", tuple(self.variable_loads))
        if self.clause_loads is not None:
            object.__setattr__(self, "clause_loads", tuple(self.clause_loads))
        if self.alpha < 1 or self.beta < 1:
            raise ValueError("alpha and beta must be positive")
        if len(self.variable_loads) != self.beta:
            raise ValueError(f"expected {self.beta} variable loads")
        if self.clause_loads is not None and len(self.clause_loads) != self.alpha:
            raise ValueError(f"expected {self.alpha} clause loads")


@dataclass(frozen=True)
class HypothesisResult:
    holds: bool
    kind: Optional[str] = None  # "variable" or "clause"
    index: Optional[int] = None  # 0-based position of the first failure

    def __bool__(self) -> bool:
        return self.holds


# -- capacities -------------------------------------------------------------

def variable_capacity(alpha: int, beta: int) -> int:
    return alpha * (alpha * beta - alpha)


def ext_variable_capacity(alpha: int, beta: int) -> int:
    return alpha * (alpha * beta - alpha + 2 * alpha)


def ext_clause_capacity(alpha: int, beta: int) -> int:
    return 2 * (alpha * beta + 2 * alpha - 2)


def ext_clause_capacity_minus(alpha: int, beta: int) -> int:
    """Clause capacity with the minus signs of the displayed inequality."""
    return 2 * (alpha * beta - 2 * alpha - 2)


def _bw_ok(a: int, alpha: int, beta: int) -> bool:
    return a * (alpha * beta - a) <= variable_capacity(alpha, beta)


def _ext_ok(k: int, n: int, capacity: int) -> bool:
    return k * (n - k) <= capacity


# -- hypotheses -------------------------------------------------------------

def bw_hypothesis(load: GadgetLoad) -> HypothesisResult:
    """Check ``a_i (ab - a_i) <= a (ab - a)`` for every variable gadget."""
    alpha, beta = load.alpha, load.beta
    if load.clause_loads is not None:
        raise LoadError("the basic lemma takes no clause loads")
    if sum(load.variable_loads) != alpha * beta:
        raise LoadSumError(
            f"loads sum to {sum(load.variable_loads)}, expected {alpha * beta}"
        )
    for i, a in enumerate(load.variable_loads):
        if not 0 <= a <= 2 * alpha:
            raise LoadBoundError(f"load {a} at index {i} outside [0, {2 * alpha}]")
    for i, a in enumerate(load.variable_loads):
        if not _bw_ok(a, alpha, beta):
            return HypothesisResult(False, "variable", i)
    return HypothesisResult(True)


def ext_hypothesis(load: GadgetLoad) -> HypothesisResult:
    """Uplink constraints of the two-replica construction, both gadget kinds."""
    alpha, beta = load.alpha, load.beta
    if load.clause_loads is None:
        raise LoadError("the extended lemma needs clause loads")
    n = alpha * beta + 2 * alpha
    total = sum(load.variable_loads) + sum(load.clause_loads)
    if total != n:
        raise LoadSumError(f"loads sum to {total}, expected {n}")
    for i, b in enumerate(load.variable_loads):
        if not 0 <= b <= 2 * alpha:
            raise LoadBoundError(f"variable load {b} at index {i} outside [0, {2 * alpha}]")
    for i, a in enumerate(load.clause_loads):
        if not 0 <= a <= 3:
            raise LoadBoundError(f"clause load {a} at index {i} outside [0, 3]")
    var_cap = ext_variable_capacity(alpha, beta)
    for i, b in enumerate(load.variable_loads):
        if not _ext_ok(b, n, var_cap):
            return HypothesisResult(False, "variable", i)
    clause_cap = ext_clause_capacity(alpha, beta)
    for i, a in enumerate(load.clause_loads):
        if not _ext_ok(a, n, clause_cap):
            return HypothesisResult(False, "clause", i)
    return HypothesisResult(True)


# -- enumeration --------------------------------------------------------------

def count_compositions(length: int, upper: int, total: int) -> int:
    """Number of integer sequences in ``[0, upper]^length`` summing to ``total``."""
    ways = [1] + [0] * total
    for _ in range(length):
        nxt = [0] * (total + 1)
        for s, w in enumerate(ways):
            if w:
                for x in range(min(upper, total - s) + 1):
                    nxt[s + x] += w
        ways = nxt
    return ways[total]


def compositions(bounds: Sequence[int], total: int) -> Iterator[tuple[int, ...]]:
    """All sequences with ``0 <= x_i <= bounds[i]`` summing to ``total``."""
    m = len(bounds)
    if m == 0:
        if total == 0:
            yield ()
        return
    room = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        room[i] = room[i + 1] + bounds[i]
    prefix = [0] * m

    def rec(i: int, left: int):
        if i == m - 1:
            prefix[i] = left
            yield tuple(prefix)
            return
        lo = max(0, left - room[i + 1])
        for x in range(lo, min(bounds[i], left) + 1):
            prefix[i] = x
            yield from rec(i + 1, left - x)

    if 0 <= total <= room[0]:
        yield from rec(0, total)


@dataclass
class VerificationReport:
    alpha: int
    beta: int
    examined: int = 0
    passing: list = field(default_factory=list)
    expected: tuple = ()

    @property
    def in_stated_range(self) -> bool:
        return self.beta > 4

    @property
    def counterexamples(self) -> list:
        return [p for p in self.passing if p != self.expected]

    @property
    def verified(self) -> bool:
        return not self.counterexamples

    def summary(self) -> str:
        status = "verified" if self.verified else f"{len(self.counterexamples)} counterexample(s)"
        scope = "" if self.in_stated_range else " (beta <= 4: outside the lemma's range)"
        return (
            f"alpha={self.alpha} beta={self.beta}: {self.examined} load vectors examined, "
            f"{len(self.passing)} pass the hypothesis, {status}{scope}"
        )


def _guard(size: int, cap: int) -> None:
    if size > cap:
        raise EnumerationTooLarge(f"{size} sequences exceed the enumeration cap {cap}")


def verify_bandwidth_lemma(alpha: int, beta: int, cap: int = DEFAULT_ENUMERATION_CAP):
    """Enumerate every variable-load vector and collect those passing the hypothesis."""
    total = alpha * beta
    _guard(count_compositions(beta, 2 * alpha, total), cap)
    report = VerificationReport(alpha, beta, expected=(alpha,) * beta)
    ok = [_bw_ok(a, alpha, beta) for a in range(2 * alpha + 1)]
    for seq in compositions([2 * alpha] * beta, total):
        report.examined += 1
        if all(ok[a] for a in seq):
            report.passing.append(seq)
    return report


def x_form_mismatches(alpha: int, beta: int) -> list[int]:
    """Values ``x`` in ``1..alpha`` where the rearranged inequality disagrees.

    With ``a_k = alpha + x`` the hypothesis fails exactly when
    ``x * (x - alpha * (beta - 2)) < 0``.
    """
    bad = []
    for x in range(1, alpha + 1):
        fails = not _bw_ok(alpha + x, alpha, beta)
        if fails != (x * (x - alpha * (beta - 2)) < 0):
            bad.append(x)
    return bad


@dataclass
class ExtendedReport:
    alpha: int
    beta: int
    examined: int = 0
    direct: set = field(default_factory=set)
    aggregate: set = field(default_factory=set)
    feasible_splits: list = field(default_factory=list)
    minus_sign_accepts_balanced: Optional[bool] = None

    @property
    def expected(self):
        return ((self.alpha,) * self.beta, (2,) * self.alpha)

    @property
    def in_stated_range(self) -> bool:
        return self.beta > 4

    @property
    def procedures_agree(self) -> bool:
        return self.direct == self.aggregate

    @property
    def verified(self) -> bool:
        return self.procedures_agree and self.direct == {self.expected}

    def summary(self) -> str:
        status = "verified" if self.verified else "NOT verified"
        return (
            f"alpha={self.alpha} beta={self.beta}: {self.examined} load pairs examined, "
            f"{len(self.direct)} pass (direct), {len(self.aggregate)} pass (aggregate), "
            f"procedures {'agree' if self.procedures_agree else 'DISAGREE'}, "
            f"node split (variable, clause) = {self.feasible_splits}, {status}; "
            f"minus-sign clause capacity admits the balanced split: "
            f"{self.minus_sign_accepts_balanced}"
        )


def _family(length: int, upper: int, total: int, ok: Callable[[int], bool]):
    return [seq for seq in compositions([upper] * length, total) if all(map(ok, seq))]


def verify_extended_lemma(alpha: int, beta: int, cap: int = DEFAULT_ENUMERATION_CAP):
    """Check the two-replica load lemma by direct and by aggregate enumeration."""
    n = alpha * beta + 2 * alpha
    bounds = [2 * alpha] * beta + [3] * alpha
    size = sum(
        count_compositions(beta, 2 * alpha, sv) * count_compositions(alpha, 3, n - sv)
        for sv in range(n + 1)
    )
    _guard(size, cap)
    var_cap = ext_variable_capacity(alpha, beta)
    clause_cap = ext_clause_capacity(alpha, beta)
    var_ok = [_ext_ok(b, n, var_cap) for b in range(2 * alpha + 1)]
    clause_ok = [_ext_ok(a, n, clause_cap) for a in range(4)]
    report = ExtendedReport(alpha, beta)

    # Direct: every joint vector.
    for seq in compositions(bounds, n):
        report.examined += 1
        var, cls = seq[:beta], seq[beta:]
        if all(var_ok[b] for b in var) and all(clause_ok[a] for a in cls):
            report.direct.add((var, cls))

    # Aggregate: first find which (variable total, clause total) splits admit
    # any admissible vector per family, then enumerate each family alone.
    for sv in range(n + 1):
        sc = n - sv
        if sv > 2 * alpha * beta or sc > 3 * alpha:
            continue
        var_side = _family(beta, 2 * alpha, sv, var_ok.__getitem__)
        cls_side = _family(alpha, 3, sc, clause_ok.__getitem__)
        if var_side and cls_side:
            report.feasible_splits.append((sv, sc))
            report.aggregate.update((v, c) for v in var_side for c in cls_side)

    minus_cap = ext_clause_capacity_minus(alpha, beta)
    report.minus_sign_accepts_balanced = _ext_ok(2, n, minus_cap)
    return report
