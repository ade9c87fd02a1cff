import random
from dataclasses import replace
from fractions import Fraction
from itertools import combinations, product
from math import comb

import pytest

from oracles import pairwise_footprint
from vcembed.generate import formula_batch, random_formula
from vcembed.model import (
    ChunkCatalog,
    Embedding,
    EmbeddingInstance,
    cost,
    dist,
    feasible,
    validate_embedding,
)
from vcembed.reductions import (
    Variant,
    canonical_embedding,
    closed_form_threshold,
    compute_threshold,
    extract_valuation,
    gadget_loads,
    is_one_sided,
    reduce_multi,
    reduce_two_replica,
)
from vcembed.sat import CnfFormula, evaluate, solve_sat
from vcembed.solver import Decision, Status, decide_witness, solve_exact


def test_multi_shape_alpha3_beta4():
    f = CnfFormula(4, ((1, 2), (3, 4), (-1, -3)))
    art = reduce_multi(f)
    tree = art.instance.tree
    assert len(tree) == 1 + 4 * (1 + 2 + 6)
    assert art.instance.node_count == 12
    for g in art.gadget_map.variables:
        assert tree.capacity[g.root] == 3 * (12 - 3)
        assert len(g.positive_leaves) == len(g.negative_leaves) == 3
    capped = [e for e in tree.edges if tree.capacity[e] is not None]
    assert sorted(capped) == sorted(g.root for g in art.gadget_map.variables)
    assert art.instance.b2 == 1
    assert art.instance.b1 == art.threshold + 1
    assert len(art.instance.chunks) == 3


def test_multi_replica_placement():
    art = reduce_multi(CnfFormula(4, ((1, -2),)))
    (reps,) = art.instance.chunks.replicas
    g1, g2 = art.gadget_map.variable(1), art.gadget_map.variable(2)
    assert reps == (g1.positive_leaves[0], g2.negative_leaves[0])
    assert art.label_map[reps[0]] == "x1_1"
    assert art.label_map[reps[1]] == "~x2_1"


def test_multi_tautological_clause():
    art = reduce_multi(CnfFormula(4, ((1, -1),)))
    g = art.gadget_map.variable(1)
    assert art.instance.chunks.replicas[0] == (g.positive_leaves[0], g.negative_leaves[0])


def test_multi_input_contract():
    with pytest.raises(ValueError):
        reduce_multi(CnfFormula(3, ((1, 2),)))
    with pytest.raises(ValueError):
        CnfFormula(4, ((5,),))


def test_gadgets_are_isomorphic_and_leaves_at_depth_three():
    art = reduce_two_replica(CnfFormula(5, ((1, 2, -3), (2, 4, 5))))
    tree = art.instance.tree
    servers = tree.servers
    assert {tree.depth[s] for s in servers} == {3}
    shapes = {
        (len(g.positive_leaves), len(g.negative_leaves), tree.capacity[g.root])
        for g in art.gadget_map.variables
    }
    assert len(shapes) == 1
    for c in art.gadget_map.clauses:
        assert tree.parent[c.root] == tree.root
        assert tree.parent[c.middle] == c.root
        assert all(tree.parent[l] == c.middle for l in c.leaves)


def test_two_replica_parameters_alpha2_beta5():
    art = reduce_two_replica(CnfFormula(5, ((1, 2, -3), (2, 4, 5))))
    tree, inst = art.instance.tree, art.instance
    assert {tree.capacity[g.root] for g in art.gadget_map.variables} == {24}
    assert {tree.capacity[c.root] for c in art.gadget_map.clauses} == {24}
    assert inst.node_count == 14
    assert len(inst.chunks) == 6
    assert sum(len(r) for r in inst.chunks.replicas) == 12
    assert all(len(r) == 2 for r in inst.chunks.replicas)


def test_two_replica_chunk_partners():
    art = reduce_two_replica(CnfFormula(4, ((1, 2, -3),)))
    # chunk type for slot 2 of clause 1
    t = art.chunk_map.index((0, 1))
    var_leaf, clause_leaf = art.instance.chunks.replicas[t]
    assert art.label_map[var_leaf] == "x2_1"
    assert art.label_map[clause_leaf] == "C1_2"


def test_two_replica_input_contract():
    with pytest.raises(ValueError):
        reduce_two_replica(CnfFormula(4, ((1, 2),)))
    with pytest.raises(ValueError):
        reduce_two_replica(CnfFormula(3, ((1, 2, 3),)))


def _pair_sum(art, placement):
    tree = art.instance.tree
    return sum(dist(tree, a, b) for a, b in combinations(placement, 2))


def test_thresholds_by_independent_pair_enumeration():
    multi = reduce_multi(CnfFormula(5, ((1, 2), (3, -4))))
    assert multi.threshold == 250
    assert multi.closed_form == 90
    two = reduce_two_replica(CnfFormula(5, ((1, 2, 3), (-1, 4, 5))))
    assert two.threshold == 2 * (5 * 1 + 2 * 1) + 6 * (comb(14, 2) - 5 - 2) == 518
    for art in (multi, two):
        gm = art.gadget_map
        placement = [s for g in gm.variables for s in g.positive_leaves]
        placement += [s for c in gm.clauses for s in c.leaves[:2]]
        assert _pair_sum(art, placement) == art.threshold


@pytest.mark.parametrize(
    "alpha,beta,expected", [(2, 5, 90), (1, 4, 12), (3, 4, 132)]
)
def test_closed_form_threshold(alpha, beta, expected):
    assert closed_form_threshold(Variant.MULTI_REPLICA, alpha, beta) == expected


def test_closed_form_threshold_undefined_for_two_replica():
    with pytest.raises(ValueError):
        closed_form_threshold(Variant.TWO_REPLICA, 2, 5)


def test_compute_threshold_ignores_access_bandwidth():
    art = reduce_multi(CnfFormula(4, ((1,), (2, 3))))
    inst = art.instance
    heavy = EmbeddingInstance(inst.tree, inst.chunks, inst.node_count, 10**6, inst.b2)
    assert compute_threshold(heavy, art.gadget_map) == art.threshold


def test_canonical_embedding_example():
    f = CnfFormula(4, ((1, 2), (3, 4)))
    art = reduce_multi(f)
    emb = canonical_embedding(art, {v: True for v in range(1, 5)})
    gm = art.gadget_map
    assert sorted(emb.placement) == sorted(s for g in gm.variables for s in g.positive_leaves)
    (r0, n0), (r1, n1) = emb.assignment
    assert art.label_map[emb.placement[n0]] == "x1_1"
    assert art.label_map[emb.placement[n1]] == "x3_2"
    rep = cost(art.instance, emb)
    assert feasible(art.instance, emb, rep)
    assert rep.footprint == art.threshold
    assert validate_embedding(art.instance, emb)


def test_flipping_an_unused_variable_keeps_footprint():
    f = CnfFormula(5, ((1, 2), (3, 4)))
    art = reduce_multi(f)
    base = {v: True for v in range(1, 6)}
    flipped = {**base, 5: False}
    assert (
        cost(art.instance, canonical_embedding(art, base)).footprint
        == cost(art.instance, canonical_embedding(art, flipped)).footprint
    )


def test_canonical_embedding_rejects_falsifying_valuation():
    art = reduce_multi(CnfFormula(4, ((1,),)))
    with pytest.raises(ValueError):
        canonical_embedding(art, {1: False, 2: False, 3: False, 4: False})


def test_two_replica_canonical_picks_lowest_satisfied_slot():
    f = CnfFormula(4, ((1, 2, -3),))
    art = reduce_two_replica(f)
    val = {1: False, 2: True, 3: False, 4: False}
    emb = canonical_embedding(art, val)
    c = art.gadget_map.clauses[0]
    hosts = set(emb.placement)
    assert [l in hosts for l in c.leaves] == [True, False, True]
    rep = cost(art.instance, emb)
    assert feasible(art.instance, emb, rep) and rep.footprint == art.threshold
    # variable-gadget replicas win whenever their literal is true
    served = [emb.placement[v] for _, v in emb.assignment]
    assert served[0] == c.leaves[0]
    assert served[1] == art.gadget_map.variable(2).positive_leaves[0]
    assert served[2] == art.gadget_map.variable(3).negative_leaves[0]


def test_extract_valuation_round_trip_and_contract():
    f = CnfFormula(4, ((-1, -2), (-3,)))
    art = reduce_multi(f)
    zeros = {v: False for v in range(1, 5)}
    emb = canonical_embedding(art, zeros)
    assert extract_valuation(art, emb) == zeros
    tight = EmbeddingInstance(
        art.instance.tree, art.instance.chunks, art.instance.node_count, art.instance.b1, 2
    )
    with pytest.raises(ValueError):
        extract_valuation(replace(art, instance=tight), emb)


def test_canonical_round_trip_on_random_formulas():
    rng = random.Random(3)
    done = 0
    while done < 30:
        f = random_formula(rng, rng.choice((4, 5)), rng.randint(1, 3))
        val = solve_sat(f)
        if val is None:
            continue
        art = reduce_multi(f)
        emb = canonical_embedding(art, val)
        assert cost(art.instance, emb).footprint == art.threshold
        assert evaluate(f, extract_valuation(art, emb))
        done += 1


def test_exact_solution_of_satisfiable_reduction_extracts_model():
    f = CnfFormula(4, ((1, -2), (2, 3), (-1, -3)))
    art = reduce_multi(f)
    res = solve_exact(art.instance)
    assert res.status is Status.OPTIMAL and res.footprint == art.threshold
    assert evaluate(f, extract_valuation(art, res.best[0]))


def test_unsatisfiable_four_variable_formula_exceeds_threshold():
    f = CnfFormula(4, ((1, 2), (-1,), (-2,)))
    art = reduce_multi(f)
    res = solve_exact(art.instance)
    assert res.status is Status.OPTIMAL
    assert res.footprint > art.threshold
    assert decide_witness(art.instance, art.threshold).decision is Decision.NO


def _interconnect_only(art):
    inst = art.instance
    return EmbeddingInstance(inst.tree, ChunkCatalog(()), inst.node_count, 0, inst.b2)


def test_split_gadgets_always_exceed_threshold_alpha2_beta4():
    # Every placement of 8 nodes on the 16 leaves; chunk access only adds cost.
    art = reduce_multi(CnfFormula(4, ((1, 2), (3, 4))))
    bare = _interconnect_only(art)
    checked = 0
    for placement in combinations(art.instance.tree.servers, 8):
        emb = Embedding(placement, ())
        rep = cost(bare, emb)
        if not feasible(bare, emb, rep):
            continue
        loads, _ = gadget_loads(art, emb)
        assert loads == [2, 2, 2, 2]
        checked += 1
        if is_one_sided(art, emb):
            assert rep.footprint == art.threshold
        else:
            assert rep.footprint > art.threshold
    assert checked == 6 ** 4


@pytest.mark.parametrize("seed", range(6))
def test_feasible_solutions_are_balanced(seed):
    # Exhaustive solve on small reduced instances: the optimum always has
    # alpha nodes per variable gadget (and two per clause gadget).
    rng = random.Random(seed)
    f = random_formula(rng, 4, rng.randint(1, 2), 1, 3)
    art = reduce_multi(f)
    res = solve_exact(art.instance)
    var, _ = gadget_loads(art, res.best[0])
    assert var == [art.alpha] * 4
    g = random_formula(rng, 4, rng.randint(1, 2), 3, 3)
    art = reduce_two_replica(g)
    res = solve_exact(art.instance)
    var, cls = gadget_loads(art, res.best[0])
    assert var == [art.alpha] * 4 and cls == [2] * art.alpha


@pytest.mark.parametrize("variant", ["multi", "two"])
def test_small_equivalence(variant):
    lo = 3 if variant == "two" else 1
    for f in formula_batch(17, 4, 2, 25, lo, 3):
        art = reduce_multi(f) if variant == "multi" else reduce_two_replica(f)
        d = decide_witness(art.instance, art.threshold).decision
        assert (d is Decision.YES) == (solve_sat(f) is not None)


def test_pairwise_footprint_of_canonical_embedding():
    art = reduce_two_replica(CnfFormula(4, ((1, 2, 3), (-2, -3, 4))))
    emb = canonical_embedding(art, solve_sat(art.formula))
    assert pairwise_footprint(art.instance, emb) == art.threshold == Fraction(
        cost(art.instance, emb).footprint
    )


def _all_sign_patterns(variables):
    return [tuple(s * v for s, v in zip(signs, variables))
            for signs in product((1, -1), repeat=len(variables))]


@pytest.mark.parametrize("variables", [(1, 2, 3), (2, 3, 4)])
def test_two_replica_unsatisfiable_eight_clauses_decides_no(variables):
    # Eight 3-literal clauses are the fewest that can rule out every valuation.
    art = reduce_two_replica(CnfFormula(4, tuple(_all_sign_patterns(variables))))
    assert art.instance.node_count == 48
    assert decide_witness(art.instance, art.threshold).decision is Decision.NO


def test_two_replica_eight_clauses_one_pattern_missing_decides_yes():
    clauses = _all_sign_patterns((1, 2, 4))
    clauses[5] = (1, -3, 4)
    f = CnfFormula(4, tuple(clauses))
    art = reduce_two_replica(f)
    res = decide_witness(art.instance, art.threshold)
    assert res.decision is Decision.YES
    emb = res.witness[0]
    var, cls = gadget_loads(art, emb)
    assert var == [8] * 4 and cls == [2] * 8
    assert evaluate(f, extract_valuation(art, emb))
