"""Seeded random CNF formulas and small random instances."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .model import ROUTER, SERVER, ChunkCatalog, EmbeddingInstance, SubstrateTree
from .sat import CnfFormula


def random_clause(rng: random.Random, var_count: int, width: int) -> tuple[int, ...]:
    variables = rng.sample(range(1, var_count + 1), width)
    return tuple(v if rng.random() < 0.5 else -v for v in variables)


def random_formula(
    rng: random.Random, var_count: int, clause_count: int, min_width: int = 1,
    max_width: int = 3,
) -> CnfFormula:
    """Clauses over distinct variables with uniform width and random polarities."""
    max_width = min(max_width, var_count)
    clauses = [
        random_clause(rng, var_count, rng.randint(min_width, max_width))
        for _ in range(clause_count)
    ]
    return CnfFormula(var_count, tuple(clauses))


def contradiction_formula(
    rng: random.Random, var_count: int, clause_count: int, min_width: int = 1,
    max_width: int = 3,
) -> Optional[CnfFormula]:
    """An unsatisfiable formula of the requested shape, or None if none fits.

    All ``2^w`` sign patterns over ``w`` variables are listed, which rules
    out every valuation; leftover clauses are random.
    """
    width = min_width
    if width > min(max_width, var_count) or 2 ** width > clause_count:
        return None
    variables = rng.sample(range(1, var_count + 1), width)
    core = []
    for mask in range(2 ** width):
        core.append(tuple(v if mask >> i & 1 else -v for i, v in enumerate(variables)))
    rest = random_formula(rng, var_count, clause_count - len(core), min_width, max_width)
    clauses = core + list(rest.clauses)
    rng.shuffle(clauses)
    return CnfFormula(var_count, tuple(clauses))


def formula_batch(seed: int, var_count: int, clause_count: int, trials: int,
                  min_width: int = 1, max_width: int = 3, inject_every: int = 5):
    """``trials`` formulas; every ``inject_every``-th one is a contradiction when possible."""
    rng = random.Random(seed)
    out = []
    for i in range(trials):
        f = None
        if inject_every and i % inject_every == inject_every - 1:
            f = contradiction_formula(rng, var_count, clause_count, min_width, max_width)
        if f is None:
            f = random_formula(rng, var_count, clause_count, min_width, max_width)
        out.append(f)
    return out


def random_instance(
    rng: random.Random, max_servers: int = 12, max_nodes: int = 6, max_types: int = 3,
    max_replicas: int = 3,
) -> EmbeddingInstance:
    """Random tree with leaf servers, sparse finite capacities and replicated chunks."""
    n_servers = rng.randint(2, max_servers)
    n_routers = rng.randint(1, max(1, n_servers // 2))
    parent, kinds = [-1], [ROUTER]
    for _ in range(n_routers - 1):
        parent.append(rng.randrange(len(parent)))
        kinds.append(ROUTER)
    routers = list(range(n_routers))
    for _ in range(n_servers):
        parent.append(rng.choice(routers))
        kinds.append(SERVER)
    servers = [v for v, k in enumerate(kinds) if k == SERVER]
    caps = [None] * len(parent)
    for v in range(1, len(parent)):
        if rng.random() < 0.35:
            caps[v] = Fraction(rng.randint(0, 30), rng.choice((1, 1, 2)))
    tree = SubstrateTree(tuple(kinds), tuple(parent), tuple(caps))
    node_count = rng.randint(1, min(max_nodes, len(servers)))
    replicas = []
    for _ in range(rng.randint(0, max_types)):
        k = rng.randint(1, min(max_replicas, len(servers)))
        replicas.append(tuple(rng.sample(servers, k)))
    b1 = Fraction(rng.randint(0, 6), rng.choice((1, 2)))
    b2 = Fraction(rng.randint(0, 4), rng.choice((1, 3)))
    return EmbeddingInstance(tree, ChunkCatalog(tuple(replicas)), node_count, b1, b2)
