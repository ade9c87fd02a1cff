"""Virtual cluster embedding with replicated data chunks on tree substrates."""

from .model import (
    ChunkCatalog,
    CostReport,
    Embedding,
    EmbeddingInstance,
    SubstrateTree,
    cost,
    dist,
    feasible,
    path_edges,
    validate_embedding,
    validate_tree,
)
from .reductions import (
    ReductionArtifacts,
    Variant,
    canonical_embedding,
    closed_form_threshold,
    compute_threshold,
    extract_valuation,
    reduce_multi,
    reduce_two_replica,
)
from .sat import CnfFormula, evaluate, parse_dimacs, restrict_to_3sat, solve_sat
from .solver import Decision, SolveBudget, SolveResult, Status, decide, solve_exact, solve_greedy

__all__ = [
    "ChunkCatalog",
    "CnfFormula",
    "CostReport",
    "Decision",
    "Embedding",
    "EmbeddingInstance",
    "ReductionArtifacts",
    "SolveBudget",
    "SolveResult",
    "Status",
    "SubstrateTree",
    "Variant",
    "canonical_embedding",
    "closed_form_threshold",
    "compute_threshold",
    "cost",
    "decide",
    "dist",
    "evaluate",
    "extract_valuation",
    "feasible",
    "parse_dimacs",
    "path_edges",
    "reduce_multi",
    "reduce_two_replica",
    "restrict_to_3sat",
    "solve_exact",
    "solve_greedy",
    "solve_sat",
    "validate_embedding",
    "validate_tree",
]
