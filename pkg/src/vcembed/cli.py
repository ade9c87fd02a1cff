"""Command-line interface.

Exit codes: 0 success / yes, 1 no / check failed / disagreement,
2 budget exhausted (unknown), 3 malformed input.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import documents as docs
from .generate import formula_batch
from .lemmas import (
    EnumerationTooLarge,
    verify_bandwidth_lemma,
    verify_extended_lemma,
    x_form_mismatches,
)
from .model import cost, feasible, validate_embedding
from .reductions import (
    Variant,
    canonical_embedding,
    gadget_loads,
    reduce_multi,
    reduce_two_replica,
)
from .sat import parse_dimacs, solve_sat
from .solver import Decision, SolveBudget, Status, decide_witness, solve_exact, solve_greedy

EXIT_OK, EXIT_NO, EXIT_UNKNOWN, EXIT_MALFORMED = 0, 1, 2, 3

VARIANTS = {"multi": Variant.MULTI_REPLICA, "two-replica": Variant.TWO_REPLICA}


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(str(exc)) from None


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _budget(args) -> SolveBudget:
    return SolveBudget(max_states=args.max_states, time_limit=args.time_limit)


def _reduce(formula, variant: Variant):
    if variant is Variant.MULTI_REPLICA:
        return reduce_multi(formula)
    return reduce_two_replica(formula)


def cmd_reduce(args) -> int:
    formula = parse_dimacs(_read(args.formula))
    art = _reduce(formula, VARIANTS[args.variant])
    _write(args.output, docs.dumps(docs.instance_to_doc(art.instance)))
    if args.meta:
        _write(args.meta, docs.dumps(docs.metadata_to_doc(art)))
    if args.canonical:
        val = solve_sat(formula)
        if val is None:
            print("formula is unsatisfiable; no canonical embedding written", file=sys.stderr)
        else:
            emb = canonical_embedding(art, val)
            _write(args.canonical, docs.dumps(docs.embedding_to_doc(emb)))
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = docs.instance_from_doc(docs.loads(_read(args.instance)))
    if args.greedy:
        result = solve_greedy(instance)
    else:
        result = solve_exact(instance, _budget(args))
    doc = docs.result_to_doc(result.status.value, result.best, result.explored)
    _write(args.output, docs.dumps(doc))
    if args.greedy:
        return EXIT_OK if result.best is not None else EXIT_UNKNOWN
    return EXIT_UNKNOWN if result.status is Status.BUDGET_EXHAUSTED else EXIT_OK


def _threshold(args) -> Fraction:
    if args.threshold is not None:
        return docs.decode_rational(args.threshold)
    if args.meta is not None:
        return docs.threshold_from_metadata(docs.loads(_read(args.meta)))
    raise InputError("decide needs --threshold or --meta")


def cmd_decide(args) -> int:
    instance = docs.instance_from_doc(docs.loads(_read(args.instance)))
    threshold = _threshold(args)
    res = decide_witness(instance, threshold, _budget(args))
    print(res.decision.value)
    if args.output:
        doc = docs.result_to_doc(
            res.decision.value, res.witness, res.explored,
            threshold=docs.encode_rational(threshold),
        )
        _write(args.output, docs.dumps(doc))
    return {Decision.YES: EXIT_OK, Decision.NO: EXIT_NO, Decision.UNKNOWN: EXIT_UNKNOWN}[
        res.decision
    ]


def cmd_verify(args) -> int:
    instance = docs.instance_from_doc(docs.loads(_read(args.instance)))
    emb = docs.embedding_from_doc(docs.loads(_read(args.embedding)))
    verdict = validate_embedding(instance, emb)
    if not verdict:
        print("valid: no")
        for v in verdict.violations:
            print(f"  {v}")
        return EXIT_NO
    report = cost(instance, emb)
    fv = feasible(instance, emb, report)
    print("valid: yes")
    print(f"feasible: {'yes' if fv else 'no'}")
    for v in fv.violations:
        print(f"  edge {v.edge}: demand {v.demand} > capacity {v.capacity}")
    print(f"transportation: {report.transportation_total}")
    print(f"interconnect: {report.interconnect_total}")
    print(f"footprint: {report.footprint}")
    ok = fv.ok
    if args.meta:
        threshold = docs.threshold_from_metadata(docs.loads(_read(args.meta)))
        within = report.footprint <= threshold
        print(f"threshold: {threshold} ({'within' if within else 'exceeded'})")
        ok = ok and within
    if args.per_edge:
        for e, load in sorted(report.per_edge.items()):
            cap = instance.tree.capacity[e]
            print(f"  edge {e}: {load} / {'inf' if cap is None else cap}")
    return EXIT_OK if ok else EXIT_NO


def cmd_lemma_check(args) -> int:
    a, b = args.alpha, args.beta
    if a < 1 or b < 1:
        raise InputError("alpha and beta must be positive")
    try:
        if args.extended:
            report = verify_extended_lemma(a, b)
            print(report.summary())
            return EXIT_OK if report.verified else EXIT_NO
        report = verify_bandwidth_lemma(a, b)
    except EnumerationTooLarge as exc:
        raise InputError(str(exc)) from None
    print(report.summary())
    for seq in report.counterexamples:
        print(f"  counterexample: {seq}")
    mismatches = x_form_mismatches(a, b)
    print(f"rearranged inequality agrees for x in 1..{a}: {'yes' if not mismatches else mismatches}")
    return EXIT_OK if report.verified and not mismatches else EXIT_NO


def cmd_equiv(args) -> int:
    variant = VARIANTS[args.variant]
    lo, hi = (3, 3) if variant is Variant.TWO_REPLICA else (args.min_width, args.max_width)
    formulas = formula_batch(args.seed, args.vars, args.clauses, args.trials, lo, hi)
    budget = _budget(args)
    counts = {"agree": 0, "disagree": 0, "unknown": 0}
    saturation_failures = 0
    print(f"{'trial':>5}  {'sat':>5}  {'decide':>7}  {'verdict':>9}  {'explored':>8}  formula")
    for i, formula in enumerate(formulas):
        art = _reduce(formula, variant)
        sat = solve_sat(formula) is not None
        res = decide_witness(art.instance, art.threshold, budget)
        if res.decision is Decision.UNKNOWN:
            verdict = "unknown"
        elif (res.decision is Decision.YES) == sat:
            verdict = "agree"
        else:
            verdict = "disagree"
        counts[verdict] += 1
        if res.witness is not None:
            var, cls = gadget_loads(art, res.witness[0])
            if any(x != art.alpha for x in var) or any(x != 2 for x in cls):
                saturation_failures += 1
                verdict += "*"
        print(f"{i:>5}  {str(sat).lower():>5}  {res.decision.value:>7}  {verdict:>9}  "
              f"{res.explored:>8}  {formula}")
    print(f"agreements: {counts['agree']}/{len(formulas)}; disagreements: {counts['disagree']}; "
          f"unknown: {counts['unknown']}; unbalanced witnesses: {saturation_failures}")
    if counts["disagree"] or saturation_failures:
        return EXIT_NO
    if counts["unknown"]:
        return EXIT_UNKNOWN
    return EXIT_OK


def _add_budget(p) -> None:
    p.add_argument("--max-states", type=int, default=5_000_000)
    p.add_argument("--time-limit", type=float, default=None, help="seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcembed",
        description="Virtual cluster embedding with replicated chunks on trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="reduce a DIMACS CNF formula to an embedding instance")
    p.add_argument("formula", help="DIMACS file, or - for stdin")
    p.add_argument("--variant", choices=sorted(VARIANTS), default="multi")
    p.add_argument("-o", "--output", help="instance document (default: stdout)")
    p.add_argument("--meta", help="write reduction metadata here")
    p.add_argument("--canonical", help="write a canonical embedding here if satisfiable")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="minimum-footprint embedding")
    p.add_argument("instance")
    p.add_argument("-o", "--output")
    p.add_argument("--greedy", action="store_true", help="heuristic only")
    _add_budget(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("decide", help="is there a feasible embedding within a threshold?")
    p.add_argument("instance")
    p.add_argument("--threshold", help="rational bound, e.g. 250 or 7/2")
    p.add_argument("--meta", help="take the threshold from reduction metadata")
    p.add_argument("-o", "--output", help="write the decision and witness here")
    _add_budget(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("verify", help="validate an embedding and report its cost")
    p.add_argument("instance")
    p.add_argument("embedding", help="embedding or result document")
    p.add_argument("--meta", help="also compare against the reduction threshold")
    p.add_argument("--per-edge", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lemma-check", help="exhaustively check the bandwidth lemmas")
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--beta", type=int, required=True)
    p.add_argument("--extended", action="store_true")
    p.set_defaults(func=cmd_lemma_check)

    p = sub.add_parser("equiv", help="SAT vs reduced-instance agreement on random formulas")
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--clauses", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--variant", choices=sorted(VARIANTS), default="multi")
    p.add_argument("--min-width", type=int, default=1)
    p.add_argument("--max-width", type=int, default=3)
    _add_budget(p)
    p.set_defaults(func=cmd_equiv)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, docs.DocumentError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
