"""Exact branch-and-bound and a greedy baseline for embedding instances.

The search works on scaled integers: every bandwidth and capacity is
multiplied by the lcm of their denominators, so all comparisons are exact
and cheap.

Nodes are interchangeable (every pair is linked at the same bandwidth), so
placements are searched as *sets* of occupied servers; node ids are handed
out afterwards in increasing server order.  Chunk assignments are searched
once the occupied set is complete.

Lower bound during placement: for each subtree a min-plus knapsack gives
the cheapest interconnect cost of putting exactly ``k`` nodes below it,
honouring leaf decisions made so far and the interconnect share of every
edge capacity.  Chunk access adds, per chunk type, the cheapest replica to
a server that is not yet ruled out.  Both parts are relaxations, so the
bound is admissible.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional

from .model import (
    CostReport,
    Embedding,
    EmbeddingInstance,
    as_fraction,
    cost,
    feasible,
    path_edges,
    validate_embedding,
)

INF = float("inf")


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    BUDGET_EXHAUSTED = "budget_exhausted"


class Decision(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SolveBudget:
    max_states: int = 5_000_000
    time_limit: Optional[float] = None  # seconds

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be >= 1")


@dataclass(frozen=True)
class SolveResult:
    status: Status
    best: Optional[tuple[Embedding, CostReport]]
    explored: int

    @property
    def footprint(self) -> Optional[Fraction]:
        return None if self.best is None else self.best[1].footprint


@dataclass(frozen=True)
class DecideResult:
    decision: Decision
    witness: Optional[tuple[Embedding, CostReport]]
    explored: int


class _Exhausted(Exception):
    pass


class _Found(Exception):
    pass


class _Context:
    """Integer-scaled, precomputed view of an instance shared by the solvers."""

    def __init__(self, instance: EmbeddingInstance):
        verdict = instance.validate()
        if not verdict:
            raise ValueError("invalid instance: " + "; ".join(verdict.violations))
        self.instance = instance
        tree = self.tree = instance.tree
        caps = [c for c in tree.capacity if c is not None]
        values = [instance.b1, instance.b2, *caps]
        self.scale = math.lcm(*(v.denominator for v in values))
        self.b1 = int(instance.b1 * self.scale)
        self.b2 = int(instance.b2 * self.scale)
        self.cap = [
            None if (c is None or tree.parent[v] < 0) else int(c * self.scale)
            for v, c in enumerate(tree.capacity)
        ]
        self.n = instance.node_count
        self.servers = tree.servers
        self.replicas = instance.chunks.replicas
        self._paths: dict[tuple[int, int], tuple[int, ...]] = {}

    def path(self, u: int, v: int) -> tuple[int, ...]:
        key = (u, v) if u <= v else (v, u)
        p = self._paths.get(key)
        if p is None:
            p = self._paths[key] = path_edges(self.tree, *key)
        return p

    def dist(self, u: int, v: int) -> int:
        return len(self.path(u, v))

    def unscale(self, x: int) -> Fraction:
        return Fraction(x, self.scale)

    def embedding(self, occupied, choice) -> Embedding:
        """``choice[t] = (replica_index, server)`` -> Embedding with sorted node ids."""
        order = sorted(occupied)
        node_of = {s: i for i, s in enumerate(order)}
        return Embedding(tuple(order), tuple((r, node_of[s]) for r, s in choice))


class _BranchAndBound:
    def __init__(self, ctx: _Context, budget: SolveBudget, bound: int, first_only: bool):
        self.ctx = ctx
        self.budget = budget
        self.bound = bound  # accept solutions with scaled cost <= bound
        self.first_only = first_only
        self.explored = 0
        self.best: Optional[tuple[int, Embedding]] = None
        self.deadline = (
            None if budget.time_limit is None else time.monotonic() + budget.time_limit
        )
        tree, n = ctx.tree, ctx.n

        # Interconnect cost/feasibility of edge v when k nodes sit below it.
        self.edge_cost: list[Optional[list[float]]] = [None] * len(tree)
        for v in tree.edges:
            row = []
            for k in range(n + 1):
                load = ctx.b2 * k * (n - k)
                cap = ctx.cap[v]
                row.append(INF if cap is not None and load > cap else load)
            self.edge_cost[v] = row

        self.status: list[Optional[int]] = [None] * len(tree)
        self.f: list[list[float]] = [[0] for _ in range(len(tree))]
        for v in reversed(tree.preorder):
            if tree.is_server(v):
                self.f[v] = [0, 0]
            else:
                self._recompute(v)

        # Per chunk type: servers ranked by cheapest access cost to any replica.
        self.chunk_rank = []
        for reps in ctx.replicas:
            ranked = sorted(
                (ctx.b1 * min(ctx.dist(s, r) for r in reps), s) for s in ctx.servers
            )
            self.chunk_rank.append(ranked)

    # -- placement bound ---------------------------------------------------
    def _recompute(self, v: int) -> None:
        n = self.ctx.n
        acc: list[float] = [0]
        for c in self.ctx.tree.children[v]:
            fc, ec = self.f[c], self.edge_cost[c]
            g = [fc[k] + ec[k] for k in range(len(fc))]
            size = min(n, len(acc) + len(g) - 2)
            out = [INF] * (size + 1)
            for i, a in enumerate(acc):
                if a == INF:
                    continue
                for j in range(min(len(g), size - i + 1)):
                    val = a + g[j]
                    if val < out[i + j]:
                        out[i + j] = val
            acc = out
        self.f[v] = acc

    def _set_leaf(self, s: int, value: Optional[int]):
        saved = [(s, self.f[s], self.status[s])]
        self.status[s] = value
        self.f[s] = [0, 0] if value is None else ([0, INF] if value == 0 else [INF, 0])
        parent = self.ctx.tree.parent
        v = parent[s]
        while v >= 0:
            saved.append((v, self.f[v], self.status[v]))
            self._recompute(v)
            v = parent[v]
        return saved

    def _restore(self, saved) -> None:
        for v, fv, st in reversed(saved):
            self.f[v] = fv
            self.status[v] = st

    def _interconnect_lb(self) -> float:
        froot = self.f[self.ctx.tree.root]
        n = self.ctx.n
        return froot[n] if n < len(froot) else INF

    def _chunk_lb(self) -> int:
        total = 0
        status = self.status
        for ranked in self.chunk_rank:
            for c, s in ranked:
                if status[s] != 0:
                    total += c
                    break
        return total

    def _tick(self) -> None:
        self.explored += 1
        if self.explored > self.budget.max_states:
            raise _Exhausted
        if self.deadline is not None and not self.explored & 1023:
            if time.monotonic() > self.deadline:
                raise _Exhausted

    # -- search --------------------------------------------------------------
    def run(self) -> None:
        self._place(0, 0)

    def _place(self, i: int, placed: int) -> None:
        self._tick()
        ic = self._interconnect_lb()
        if ic == INF or ic + self._chunk_lb() > self.bound:
            return
        servers, n = self.ctx.servers, self.ctx.n
        remaining = len(servers) - i
        if placed == n or n - placed == remaining:
            fill = 1 if placed < n else 0
            occupied = [s for s in servers[:i] if self.status[s] == 1]
            if fill:
                occupied += servers[i:]
            self._assign(occupied, int(ic))
            return
        s = servers[i]
        for value in (1, 0):
            saved = self._set_leaf(s, value)
            try:
                self._place(i + 1, placed + value)
            finally:
                self._restore(saved)

    def _assign(self, occupied: list[int], interconnect: int) -> None:
        ctx = self.ctx
        tree, n = ctx.tree, ctx.n
        below = [0] * len(tree)
        for s in occupied:
            v = s
            while v >= 0:
                below[v] += 1
                v = tree.parent[v]
        residual = {
            e: ctx.cap[e] - ctx.b2 * below[e] * (n - below[e])
            for e in tree.edges
            if ctx.cap[e] is not None
        }
        if any(r < 0 for r in residual.values()):
            return

        tau = len(ctx.replicas)
        options = []
        for reps in ctx.replicas:
            opts = []
            for r, rep in enumerate(reps):
                for s in occupied:
                    c = ctx.b1 * ctx.dist(s, rep)
                    tight = (
                        tuple(e for e in ctx.path(s, rep) if e in residual)
                        if ctx.b1
                        else ()
                    )
                    opts.append((c, s, r, tight))
            opts.sort(key=lambda o: (o[0], o[1], o[2]))
            options.append(opts)

        def spread(t):
            reps = ctx.replicas[t]
            return max((ctx.dist(a, b) for a, b in combinations(reps, 2)), default=0)

        order = sorted(range(tau), key=lambda t: (-spread(t), t))
        suffix = [0] * (tau + 1)
        for k in range(tau - 1, -1, -1):
            suffix[k] = suffix[k + 1] + options[order[k]][0][0]

        choice: list[Optional[tuple[int, int]]] = [None] * tau
        b1 = ctx.b1

        def rec(k: int, spent: int) -> None:
            self._tick()
            if k == tau:
                self._record(occupied, choice, interconnect + spent)
                return
            t = order[k]
            for c, s, r, tight in options[t]:
                if interconnect + spent + c + suffix[k + 1] > self.bound:
                    break
                if any(residual[e] < b1 for e in tight):
                    continue
                for e in tight:
                    residual[e] -= b1
                choice[t] = (r, s)
                try:
                    rec(k + 1, spent + c)
                finally:
                    for e in tight:
                        residual[e] += b1

        rec(0, 0)

    def _record(self, occupied, choice, total: int) -> None:
        emb = self.ctx.embedding(occupied, list(choice))
        self.best = (total, emb)
        if self.first_only:
            raise _Found
        self.bound = total - 1


def _report(instance, emb):
    report = cost(instance, emb)
    assert validate_embedding(instance, emb) and feasible(instance, emb, report)
    return emb, report


def solve_exact(instance: EmbeddingInstance, budget: SolveBudget = SolveBudget()) -> SolveResult:
    """Minimum-footprint feasible embedding by branch-and-bound."""
    ctx = _Context(instance)
    seed = solve_greedy(instance)
    if seed.best is not None:
        bound = int(seed.best[1].footprint * ctx.scale) - 1
    else:
        bound = INF
    bnb = _BranchAndBound(ctx, budget, bound, first_only=False)
    try:
        bnb.run()
        exhausted = False
    except _Exhausted:
        exhausted = True
    explored = bnb.explored + seed.explored
    if bnb.best is not None:
        best = _report(instance, bnb.best[1])
    else:
        best = seed.best
    if exhausted:
        return SolveResult(Status.BUDGET_EXHAUSTED, best, explored)
    if best is None:
        return SolveResult(Status.INFEASIBLE, None, explored)
    return SolveResult(Status.OPTIMAL, best, explored)


def decide_witness(
    instance: EmbeddingInstance, threshold, budget: SolveBudget = SolveBudget()
) -> DecideResult:
    """Decision version with the certifying embedding when the answer is yes."""
    threshold = as_fraction(threshold)
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    ctx = _Context(instance)
    seed = solve_greedy(instance)
    if seed.best is not None and seed.best[1].footprint <= threshold:
        return DecideResult(Decision.YES, seed.best, seed.explored)
    bound = math.floor(threshold * ctx.scale)
    bnb = _BranchAndBound(ctx, budget, bound, first_only=True)
    try:
        bnb.run()
    except _Found:
        return DecideResult(
            Decision.YES, _report(instance, bnb.best[1]), bnb.explored + seed.explored
        )
    except _Exhausted:
        return DecideResult(Decision.UNKNOWN, None, bnb.explored + seed.explored)
    return DecideResult(Decision.NO, None, bnb.explored + seed.explored)


def decide(instance: EmbeddingInstance, threshold, budget: SolveBudget = SolveBudget()) -> Decision:
    """Is there a feasible embedding with footprint <= threshold?"""
    return decide_witness(instance, threshold, budget).decision


def solve_greedy(instance: EmbeddingInstance) -> SolveResult:
    """Locality-first heuristic; never claims optimality.

    Each chunk type goes to a node on its first replica's server (opening
    one if a node is still free), then idle nodes are packed one by one on
    the free server with the smallest added interconnect cost whose
    subtree edges still have room for the interconnect share.
    """
    ctx = _Context(instance)
    tree, n = ctx.tree, ctx.n
    occupied: list[int] = []
    choice: list[tuple[int, int]] = []
    steps = 0
    for reps in ctx.replicas:
        steps += 1
        s0 = reps[0]
        if s0 in occupied or len(occupied) < n:
            if s0 not in occupied:
                occupied.append(s0)
            choice.append((0, s0))
            continue
        c, r, s = min(
            (ctx.b1 * ctx.dist(s, rep), r, s)
            for r, rep in enumerate(reps)
            for s in sorted(occupied)
        )
        choice.append((r, s))

    access = {e: 0 for e in tree.edges}
    for (r, s), reps in zip(choice, ctx.replicas):
        for e in ctx.path(s, reps[r]):
            access[e] += ctx.b1
    below = [0] * len(tree)
    for s in occupied:
        v = s
        while tree.parent[v] >= 0:
            below[v] += 1
            v = tree.parent[v]

    def fits(s: int) -> bool:
        v = s
        while tree.parent[v] >= 0:
            cap = ctx.cap[v]
            k = below[v] + 1
            if cap is not None and ctx.b2 * k * (n - k) + access[v] > cap:
                return False
            v = tree.parent[v]
        return True

    while len(occupied) < n:
        steps += 1
        taken = set(occupied)
        candidates = [
            (sum(ctx.b2 * ctx.dist(s, o) for o in occupied), s)
            for s in ctx.servers
            if s not in taken and fits(s)
        ]
        if not candidates:
            return SolveResult(Status.BUDGET_EXHAUSTED, None, steps)
        _, s = min(candidates)
        occupied.append(s)
        v = s
        while tree.parent[v] >= 0:
            below[v] += 1
            v = tree.parent[v]

    emb = ctx.embedding(occupied, choice)
    report = cost(instance, emb)
    if not feasible(instance, emb, report):
        return SolveResult(Status.BUDGET_EXHAUSTED, None, steps)
    return SolveResult(Status.BUDGET_EXHAUSTED, (emb, report), steps)
