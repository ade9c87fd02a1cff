"""SAT-to-embedding reductions (multi-replica and two-replica variants).

Both build a tree with one gadget per variable hanging off a global root::

    root -> root(x) -> positive(x) -> x_1 .. x_m
                    -> negative(x) -> ~x_1 .. ~x_m

where ``m`` is the clause count.  Leaf ``x_j`` / ``~x_j`` is reserved for
clause ``j``.  The two-replica variant adds one clause gadget per clause::

    root -> root(C) -> middle(C) -> C_1, C_2, C_3

All leaves sit three hops below the global root.  Capacities are set on
gadget uplinks only, so that feasibility pins the number of nodes in every
gadget; the access bandwidth is one more than the threshold, which forbids
any chunk access over a non-zero distance.

Clause and variable numbers in labels are 1-based (as in DIMACS); chunk
types, vertices and nodes are 0-based indices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping, Optional

from .model import (
    ROUTER,
    SERVER,
    ChunkCatalog,
    Embedding,
    EmbeddingInstance,
    SubstrateTree,
    cost,
    feasible,
)
from .sat import CnfFormula, Valuation, evaluate, literal_true, restrict_to_3sat


class Variant(str, enum.Enum):
    MULTI_REPLICA = "multi_replica"
    TWO_REPLICA = "two_replica"


@dataclass(frozen=True)
class VariableGadget:
    variable: int
    root: int
    positive: int
    negative: int
    positive_leaves: tuple[int, ...]
    negative_leaves: tuple[int, ...]

    def side_leaves(self, value: bool) -> tuple[int, ...]:
        return self.positive_leaves if value else self.negative_leaves

    @property
    def leaves(self) -> tuple[int, ...]:
        return self.positive_leaves + self.negative_leaves

    def literal_leaf(self, literal: int, clause: int) -> int:
        """Leaf reserved for ``literal`` in (0-based) ``clause``."""
        return self.side_leaves(literal > 0)[clause]


@dataclass(frozen=True)
class ClauseGadget:
    clause: int
    root: int
    middle: int
    leaves: tuple[int, ...]


@dataclass(frozen=True)
class GadgetMap:
    variables: tuple[VariableGadget, ...]
    clauses: tuple[ClauseGadget, ...] = ()

    def variable(self, v: int) -> VariableGadget:
        return self.variables[v - 1]


@dataclass(frozen=True)
class ReductionArtifacts:
    formula: CnfFormula
    variant: Variant
    instance: EmbeddingInstance
    threshold: Fraction
    label_map: Mapping[int, str]
    # chunk type -> (clause index, literal slot or None)
    chunk_map: tuple[tuple[int, Optional[int]], ...]
    gadget_map: GadgetMap
    closed_form: Optional[Fraction] = None

    @property
    def alpha(self) -> int:
        return self.formula.clause_count

    @property
    def beta(self) -> int:
        return self.formula.var_count


def _literal_label(lit: int, clause: int) -> str:
    return f"{'' if lit > 0 else '~'}x{abs(lit)}_{clause + 1}"


class _TreeBuilder:
    def __init__(self):
        self.parent: list[int] = [-1]
        self.kinds: list[str] = [ROUTER]
        self.caps: list[Optional[Fraction]] = [None]

    def add(self, parent: int, kind: str, cap=None) -> int:
        self.parent.append(parent)
        self.kinds.append(kind)
        self.caps.append(None if cap is None else Fraction(cap))
        return len(self.parent) - 1

    def variable_gadgets(self, alpha: int, beta: int, uplink):
        gadgets, labels = [], {}
        for var in range(1, beta + 1):
            root = self.add(0, ROUTER, uplink)
            pos = self.add(root, ROUTER)
            pos_leaves = tuple(self.add(pos, SERVER) for _ in range(alpha))
            neg = self.add(root, ROUTER)
            neg_leaves = tuple(self.add(neg, SERVER) for _ in range(alpha))
            for j in range(alpha):
                labels[pos_leaves[j]] = _literal_label(var, j)
                labels[neg_leaves[j]] = _literal_label(-var, j)
            gadgets.append(VariableGadget(var, root, pos, neg, pos_leaves, neg_leaves))
        return tuple(gadgets), labels

    def tree(self) -> SubstrateTree:
        return SubstrateTree.build(self.parent, self.kinds, self.caps)


def _check_formula(formula: CnfFormula) -> None:
    if formula.var_count < 4:
        raise ValueError("the reductions need at least four variables")
    if formula.clause_count < 1:
        raise ValueError("the reductions need at least one clause")


def reduce_multi(formula: CnfFormula) -> ReductionArtifacts:
    """Multi-replica reduction: one chunk type per clause, one replica per literal."""
    _check_formula(formula)
    alpha, beta = formula.clause_count, formula.var_count
    builder = _TreeBuilder()
    gadgets, labels = builder.variable_gadgets(alpha, beta, alpha * (alpha * beta - alpha))
    gmap = GadgetMap(gadgets)

    replicas, chunk_map = [], []
    for j, clause in enumerate(formula.clauses):
        leaves = sorted(gmap.variable(abs(l)).literal_leaf(l, j) for l in clause)
        replicas.append(tuple(leaves))
        chunk_map.append((j, None))

    draft = EmbeddingInstance(builder.tree(), ChunkCatalog(tuple(replicas)), alpha * beta, 0, 1)
    threshold = compute_threshold(draft, gmap)
    instance = EmbeddingInstance(draft.tree, draft.chunks, draft.node_count, threshold + 1, 1)
    return ReductionArtifacts(
        formula,
        Variant.MULTI_REPLICA,
        instance,
        threshold,
        labels,
        tuple(chunk_map),
        gmap,
        closed_form_threshold(Variant.MULTI_REPLICA, alpha, beta),
    )


def reduce_two_replica(formula: CnfFormula) -> ReductionArtifacts:
    """Two-replica reduction from 3-SAT: three chunk types per clause."""
    verdict = restrict_to_3sat(formula)
    if not verdict:
        raise ValueError("two-replica reduction needs 3-literal clauses: "
                         + "; ".join(verdict.violations))
    _check_formula(formula)
    alpha, beta = formula.clause_count, formula.var_count
    builder = _TreeBuilder()
    var_cap = alpha * (alpha * (beta - 1) + 2 * alpha)
    clause_cap = 2 * (alpha * beta + 2 * (alpha - 1))
    gadgets, labels = builder.variable_gadgets(alpha, beta, var_cap)
    clause_gadgets = []
    for j in range(alpha):
        root = builder.add(0, ROUTER, clause_cap)
        middle = builder.add(root, ROUTER)
        leaves = tuple(builder.add(middle, SERVER) for _ in range(3))
        for k, leaf in enumerate(leaves):
            labels[leaf] = f"C{j + 1}_{k + 1}"
        clause_gadgets.append(ClauseGadget(j, root, middle, leaves))
    gmap = GadgetMap(gadgets, tuple(clause_gadgets))

    replicas, chunk_map = [], []
    for j, clause in enumerate(formula.clauses):
        for k, lit in enumerate(clause):
            var_leaf = gmap.variable(abs(lit)).literal_leaf(lit, j)
            replicas.append((var_leaf, clause_gadgets[j].leaves[k]))
            chunk_map.append((j, k))

    n_nodes = alpha * beta + 2 * alpha
    draft = EmbeddingInstance(builder.tree(), ChunkCatalog(tuple(replicas)), n_nodes, 0, 1)
    threshold = compute_threshold(draft, gmap)
    instance = EmbeddingInstance(draft.tree, draft.chunks, n_nodes, threshold + 1, 1)
    return ReductionArtifacts(
        formula,
        Variant.TWO_REPLICA,
        instance,
        threshold,
        labels,
        tuple(chunk_map),
        gmap,
    )


def one_sided_placement(gmap: GadgetMap, values=None) -> list[int]:
    """Servers of a canonical placement.

    Each variable gadget fills the side picked by ``values`` (all positive
    when omitted); each clause gadget fills its first two leaves.
    """
    servers = []
    for g in gmap.variables:
        side = True if values is None else bool(values[g.variable])
        servers.extend(g.side_leaves(side))
    for c in gmap.clauses:
        servers.extend(c.leaves[:2])
    return servers


def compute_threshold(instance: EmbeddingInstance, gmap: GadgetMap) -> Fraction:
    """Footprint of the all-positive canonical placement with free chunk access.

    Every canonical embedding built from a satisfying valuation has this
    same footprint, since gadgets are isomorphic and all accesses are local.
    """
    placement = one_sided_placement(gmap)
    if len(placement) != instance.node_count:
        raise ValueError("canonical placement does not match the node count")
    free_access = EmbeddingInstance(instance.tree, ChunkCatalog(()), instance.node_count, 0,
                                    instance.b2)
    return cost(free_access, Embedding(tuple(placement), ())).footprint


def closed_form_threshold(variant, alpha: int, beta: int) -> Fraction:
    """Closed-form threshold stated for the multi-replica construction.

    It charges two hops per cross-gadget pair, so it undercounts the
    six-hop paths of the constructed tree; kept for cross-checking only.
    """
    if Variant(variant) is not Variant.MULTI_REPLICA:
        raise ValueError("no closed-form threshold exists for the two-replica variant")
    return Fraction(beta * (comb(alpha, 2) * 2 + alpha * (alpha * beta - alpha)))


def canonical_embedding(art: ReductionArtifacts, val: Valuation) -> Embedding:
    """Embedding of footprint exactly ``art.threshold`` for a satisfying valuation."""
    formula = art.formula
    if not evaluate(formula, val):
        raise ValueError("valuation does not satisfy the formula")
    gmap = art.gadget_map
    placement = []
    for g in gmap.variables:
        placement.extend(g.side_leaves(bool(val[g.variable])))
    for c, clause in zip(gmap.clauses, formula.clauses):
        witness = next(k for k, lit in enumerate(clause) if literal_true(lit, val))
        placement.extend(leaf for k, leaf in enumerate(c.leaves) if k != witness)
    node_at = {s: v for v, s in enumerate(placement)}

    # Replicas are stored variable-gadget first, so the first collocated
    # replica is also the preferred one in the two-replica variant.
    assignment = []
    for t, reps in enumerate(art.instance.chunks.replicas):
        r = next((r for r, s in enumerate(reps) if s in node_at), None)
        if r is None:
            raise ValueError(f"chunk type {t} has no collocated node")
        assignment.append((r, node_at[reps[r]]))
    return Embedding(tuple(placement), tuple(assignment))


def extract_valuation(art: ReductionArtifacts, sol: Embedding) -> dict[int, bool]:
    """Read a valuation off a feasible embedding within the threshold."""
    report = cost(art.instance, sol)
    if not feasible(art.instance, sol, report):
        raise ValueError("embedding violates capacities")
    if report.footprint > art.threshold:
        raise ValueError(
            f"footprint {report.footprint} exceeds threshold {art.threshold}"
        )
    hosts = set(sol.placement)
    return {g.variable: g.positive_leaves[0] in hosts for g in art.gadget_map.variables}


def gadget_loads(art: ReductionArtifacts, sol: Embedding) -> tuple[list[int], list[int]]:
    """Nodes per variable gadget and per clause gadget."""
    hosts = set(sol.placement)
    var = [sum(s in hosts for s in g.leaves) for g in art.gadget_map.variables]
    cls = [sum(s in hosts for s in c.leaves) for c in art.gadget_map.clauses]
    return var, cls


def is_one_sided(art: ReductionArtifacts, sol: Embedding) -> bool:
    hosts = set(sol.placement)
    for g in art.gadget_map.variables:
        if any(s in hosts for s in g.positive_leaves) and any(
            s in hosts for s in g.negative_leaves
        ):
            return False
    return True
