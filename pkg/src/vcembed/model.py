"""Substrate trees, embedding instances, and the footprint/feasibility oracle.

Vertices are numbered ``0..V-1``.  Every non-root vertex owns exactly one
edge, the link to its parent, and edges are identified by that child id.
Distances are hop counts.  Bandwidths and capacities are exact
:class:`~fractions.Fraction` values; ``None`` is an unbounded capacity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Mapping, Optional, Sequence

SERVER = "server"
ROUTER = "router"


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are refused so that saturation checks stay exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not bandwidth values")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class Verdict:
    """Result of a validation pass; truthy when there are no violations."""

    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class SubstrateTree:
    """Rooted tree of routers and leaf servers.

    ``parent[v]`` is the parent of ``v`` and ``-1`` marks a root.
    ``capacity[v]`` is the capacity of the edge ``v -> parent[v]``; the
    entry for the root is ignored and conventionally ``None``.

    Construction does not validate, so malformed trees can be built and
    inspected with :func:`validate_tree`.  The derived structure
    (children, depth, ...) assumes a valid tree.
    """

    kinds: tuple[str, ...]
    parent: tuple[int, ...]
    capacity: tuple[Optional[Fraction], ...]

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "parent", tuple(int(p) for p in self.parent))
        object.__setattr__(
            self,
            "capacity",
            tuple(None if c is None else as_fraction(c) for c in self.capacity),
        )

    @classmethod
    def build(cls, parent: Sequence[int], kinds: Sequence[str], capacity=None):
        """Build from parent/kind arrays; ``capacity`` may be a sparse mapping."""
        n = len(parent)
        if capacity is None:
            caps = [None] * n
        elif isinstance(capacity, Mapping):
            caps = [capacity.get(v) for v in range(n)]
        else:
            caps = list(capacity)
        return cls(tuple(kinds), tuple(parent), tuple(caps))

    def __len__(self) -> int:
        return len(self.parent)

    @cached_property
    def root(self) -> int:
        roots = [v for v, p in enumerate(self.parent) if p < 0]
        if len(roots) != 1:
            raise ValueError(f"tree has {len(roots)} roots")
        return roots[0]

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p >= 0:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        depth = [0] * len(self)
        for v in self.preorder:
            p = self.parent[v]
            if p >= 0:
                depth[v] = depth[p] + 1
        return tuple(depth)

    @cached_property
    def preorder(self) -> tuple[int, ...]:
        order, stack = [], [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(self.children[v]))
        return tuple(order)

    @cached_property
    def servers(self) -> tuple[int, ...]:
        """Server ids in depth-first (left-to-right) order."""
        return tuple(v for v in self.preorder if self.kinds[v] == SERVER)

    @cached_property
    def edges(self) -> tuple[int, ...]:
        return tuple(v for v in range(len(self)) if self.parent[v] >= 0)

    def is_server(self, v: int) -> bool:
        return self.kinds[v] == SERVER

    def _check(self, v: int) -> None:
        if not (isinstance(v, int) and 0 <= v < len(self)):
            raise KeyError(f"unknown vertex id {v!r}")


def validate_tree(tree: SubstrateTree) -> Verdict:
    """Check the structural invariants of a substrate tree."""
    problems: list[str] = []
    n = len(tree.parent)
    if n == 0:
        return Verdict(("empty tree",))
    if len(tree.kinds) != n or len(tree.capacity) != n:
        problems.append("kinds/parent/capacity arrays differ in length")
        return Verdict(tuple(problems))
    bad_kind = [v for v, k in enumerate(tree.kinds) if k not in (SERVER, ROUTER)]
    if bad_kind:
        problems.append(f"unknown vertex kind at {bad_kind}")
    roots = [v for v, p in enumerate(tree.parent) if p < 0]
    if not roots:
        problems.append("no root")
    elif len(roots) > 1:
        problems.append(f"multiple roots: {roots}")
    dangling = [v for v, p in enumerate(tree.parent) if p >= n or p == v]
    if dangling:
        problems.append(f"parent pointer out of range or self-loop at {dangling}")
    elif len(roots) == 1:
        # Any vertex whose walk upward takes more than n steps sits on a cycle.
        for v in range(n):
            u, steps = v, 0
            while tree.parent[u] >= 0 and steps <= n:
                u, steps = tree.parent[u], steps + 1
            if steps > n:
                problems.append(f"vertex {v} does not reach the root (cycle)")
                break
    has_child = {p for p in tree.parent if 0 <= p < n}
    for v in range(n):
        if tree.kinds[v] == SERVER and v in has_child:
            problems.append(f"server not a leaf: {v}")
    for v, p in enumerate(tree.parent):
        c = tree.capacity[v]
        if p >= 0 and c is not None and c < 0:
            problems.append(f"negative capacity on edge {v}")
    if not any(k == SERVER for k in tree.kinds):
        problems.append("no servers")
    return Verdict(tuple(problems))


def dist(tree: SubstrateTree, u: int, v: int) -> int:
    """Hop distance between two vertices."""
    return len(path_edges(tree, u, v))


def path_edges(tree: SubstrateTree, u: int, v: int) -> tuple[int, ...]:
    """Edges (child ids) on the unique u-v path, ordered from ``u`` to ``v``."""
    tree._check(u)
    tree._check(v)
    depth, parent = tree.depth, tree.parent
    up, down = [], []
    while depth[u] > depth[v]:
        up.append(u)
        u = parent[u]
    while depth[v] > depth[u]:
        down.append(v)
        v = parent[v]
    while u != v:
        up.append(u)
        down.append(v)
        u, v = parent[u], parent[v]
    return tuple(up) + tuple(reversed(down))


@dataclass(frozen=True)
class ChunkCatalog:
    """Replica locations per chunk type; ``replicas[t]`` lists server ids."""

    replicas: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "replicas", tuple(tuple(int(s) for s in r) for r in self.replicas)
        )

    def __len__(self) -> int:
        return len(self.replicas)


@dataclass(frozen=True)
class EmbeddingInstance:
    tree: SubstrateTree
    chunks: ChunkCatalog
    node_count: int
    access_bandwidth: Fraction
    interconnect_bandwidth: Fraction

    def __post_init__(self):
        if not isinstance(self.chunks, ChunkCatalog):
            object.__setattr__(self, "chunks", ChunkCatalog(self.chunks))
        object.__setattr__(self, "access_bandwidth", as_fraction(self.access_bandwidth))
        object.__setattr__(
            self, "interconnect_bandwidth", as_fraction(self.interconnect_bandwidth)
        )

    @property
    def b1(self) -> Fraction:
        return self.access_bandwidth

    @property
    def b2(self) -> Fraction:
        return self.interconnect_bandwidth

    def validate(self) -> Verdict:
        problems = list(validate_tree(self.tree).violations)
        if problems:
            return Verdict(tuple(problems))
        servers = set(self.tree.servers)
        if self.node_count < 1:
            problems.append("node_count must be positive")
        if self.node_count > len(servers):
            problems.append(
                f"node_count {self.node_count} exceeds server count {len(servers)}"
            )
        if self.b1 < 0 or self.b2 < 0:
            problems.append("negative bandwidth")
        for t, reps in enumerate(self.chunks.replicas):
            if not reps:
                problems.append(f"chunk type {t} has no replica")
            if len(set(reps)) != len(reps):
                problems.append(f"chunk type {t} has two replicas on one server")
            stray = [s for s in reps if s not in servers]
            if stray:
                problems.append(f"chunk type {t} has replicas off-server: {stray}")
        return Verdict(tuple(problems))


@dataclass(frozen=True)
class Embedding:
    """Node placement plus chunk assignment.

    ``placement[v]`` is the server hosting node ``v``; ``assignment[t]`` is
    ``(replica_index, node)`` for chunk type ``t``.
    """

    placement: tuple[int, ...]
    assignment: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "placement", tuple(int(s) for s in self.placement))
        object.__setattr__(
            self, "assignment", tuple((int(r), int(v)) for r, v in self.assignment)
        )


def validate_embedding(instance: EmbeddingInstance, sol: Embedding) -> Verdict:
    problems: list[str] = []
    servers = set(instance.tree.servers)
    if len(sol.placement) != instance.node_count:
        problems.append(
            f"placement has {len(sol.placement)} nodes, expected {instance.node_count}"
        )
    off = [s for s in sol.placement if s not in servers]
    if off:
        problems.append(f"nodes placed off-server: {off}")
    if len(set(sol.placement)) != len(sol.placement):
        problems.append("server overcommitted")
    tau = len(instance.chunks)
    if len(sol.assignment) < tau:
        problems.append("unassigned chunk type")
    elif len(sol.assignment) > tau:
        problems.append("assignment names unknown chunk types")
    for t, (r, v) in enumerate(sol.assignment[:tau]):
        if not 0 <= r < len(instance.chunks.replicas[t]):
            problems.append(f"chunk type {t}: replica index {r} out of range")
        if not 0 <= v < len(sol.placement):
            problems.append(f"chunk type {t}: node {v} out of range")
    return Verdict(tuple(problems))


@dataclass(frozen=True)
class CostReport:
    per_edge: Mapping[int, Fraction]
    transportation_total: Fraction
    interconnect_total: Fraction

    @property
    def footprint(self) -> Fraction:
        return self.transportation_total + self.interconnect_total


def connections(instance: EmbeddingInstance, sol: Embedding):
    """Yield ``(bandwidth, u, v, kind)`` for every reserved virtual link."""
    for t, (r, node) in enumerate(sol.assignment):
        yield (
            instance.b1,
            sol.placement[node],
            instance.chunks.replicas[t][r],
            "access",
        )
    for a, b in combinations(sol.placement, 2):
        yield instance.b2, a, b, "interconnect"


def cost(instance: EmbeddingInstance, sol: Embedding) -> CostReport:
    """Footprint of an embedding, accounted both per connection and per edge."""
    verdict = validate_embedding(instance, sol)
    if not verdict:
        raise ValueError("invalid embedding: " + "; ".join(verdict.violations))
    tree = instance.tree
    per_edge: dict[int, Fraction] = {e: Fraction(0) for e in tree.edges}
    totals = {"access": Fraction(0), "interconnect": Fraction(0)}
    for bw, u, v, kind in connections(instance, sol):
        path = path_edges(tree, u, v)
        totals[kind] += bw * len(path)
        for e in path:
            per_edge[e] += bw
    return CostReport(per_edge, totals["access"], totals["interconnect"])


@dataclass(frozen=True)
class EdgeViolation:
    edge: int
    demand: Fraction
    capacity: Fraction


@dataclass(frozen=True)
class FeasibilityVerdict:
    violations: tuple[EdgeViolation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def check_loads(tree: SubstrateTree, per_edge: Mapping[int, Fraction]) -> FeasibilityVerdict:
    out = []
    for e, load in sorted(per_edge.items()):
        cap = tree.capacity[e]
        if cap is not None and load > cap:
            out.append(EdgeViolation(e, load, cap))
    return FeasibilityVerdict(tuple(out))


def feasible(
    instance: EmbeddingInstance, sol: Embedding, report: CostReport | None = None
) -> FeasibilityVerdict:
    if report is None:
        report = cost(instance, sol)
    return check_loads(instance.tree, report.per_edge)


def subtree_servers(tree: SubstrateTree, v: int) -> tuple[int, ...]:
    out, stack = [], [v]
    while stack:
        u = stack.pop()
        if tree.kinds[u] == SERVER:
            out.append(u)
        stack.extend(tree.children[u])
    return tuple(sorted(out))


def nodes_below(tree: SubstrateTree, sol: Embedding, v: int) -> int:
    """Number of nodes hosted in the subtree rooted at ``v``."""
    below = set(subtree_servers(tree, v))
    return sum(1 for s in sol.placement if s in below)


def star(n_leaves: int, capacity=None) -> SubstrateTree:
    """A router with ``n_leaves`` server children; handy in tests and docs."""
    parent = [-1] + [0] * n_leaves
    kinds = [ROUTER] + [SERVER] * n_leaves
    caps = [None] + [capacity] * n_leaves
    return SubstrateTree.build(parent, kinds, caps)
