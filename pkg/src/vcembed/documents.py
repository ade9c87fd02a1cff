"""JSON documents for instances, embeddings, solve results and reduction metadata.

Every document carries ``"format": 1`` and a ``"kind"``.  Rationals are
written as JSON integers when integral and as ``"p/q"`` strings otherwise.
A capacity of ``-1`` means unbounded.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Optional

from .model import ChunkCatalog, CostReport, Embedding, EmbeddingInstance, SubstrateTree
from .reductions import ReductionArtifacts

FORMAT = 1


class DocumentError(ValueError):
    """A document is malformed or of the wrong kind."""


def encode_rational(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def decode_rational(x) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise DocumentError(f"not an exact rational: {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise DocumentError(f"not an exact rational: {x!r}") from None


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str, kind: Optional[str] = None) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    if doc.get("format") != FORMAT:
        raise DocumentError(f"unsupported format {doc.get('format')!r}")
    if kind is not None and doc.get("kind") != kind:
        raise DocumentError(f"expected a {kind!r} document, got {doc.get('kind')!r}")
    return doc


def _field(doc: dict, name: str):
    try:
        return doc[name]
    except KeyError:
        raise DocumentError(f"missing field {name!r}") from None


# -- instance -------------------------------------------------------------------

def instance_to_doc(instance: EmbeddingInstance) -> dict:
    tree = instance.tree
    return {
        "format": FORMAT,
        "kind": "instance",
        "tree": {
            "parent": list(tree.parent),
            "kinds": list(tree.kinds),
            "capacity": [-1 if c is None else encode_rational(c) for c in tree.capacity],
        },
        "chunks": [list(r) for r in instance.chunks.replicas],
        "node_count": instance.node_count,
        "b1": encode_rational(instance.b1),
        "b2": encode_rational(instance.b2),
    }


def instance_from_doc(doc: dict) -> EmbeddingInstance:
    if doc.get("kind") != "instance":
        raise DocumentError("not an instance document")
    tree_doc = _field(doc, "tree")
    try:
        parent = [int(p) for p in _field(tree_doc, "parent")]
        kinds = list(_field(tree_doc, "kinds"))
        caps = [
            None if c == -1 else decode_rational(c) for c in _field(tree_doc, "capacity")
        ]
        chunks = ChunkCatalog(tuple(tuple(r) for r in _field(doc, "chunks")))
        node_count = _field(doc, "node_count")
        if not isinstance(node_count, int):
            raise DocumentError("node_count must be an integer")
        instance = EmbeddingInstance(
            SubstrateTree(tuple(kinds), tuple(parent), tuple(caps)),
            chunks,
            node_count,
            decode_rational(_field(doc, "b1")),
            decode_rational(_field(doc, "b2")),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(f"malformed instance: {exc}") from None
    verdict = instance.validate()
    if not verdict:
        raise DocumentError("invalid instance: " + "; ".join(verdict.violations))
    return instance


# -- embedding / result ---------------------------------------------------------

def embedding_to_doc(emb: Embedding) -> dict:
    return {
        "format": FORMAT,
        "kind": "embedding",
        "placement": list(emb.placement),
        "assignment": [list(a) for a in emb.assignment],
    }


def embedding_from_doc(doc: dict) -> Embedding:
    """Read an embedding from an embedding, result, or decide document."""
    if doc.get("kind") not in ("embedding", "result"):
        raise DocumentError("not an embedding or result document")
    placement, assignment = doc.get("placement"), doc.get("assignment")
    if placement is None or assignment is None:
        raise DocumentError("document carries no embedding")
    try:
        return Embedding(
            tuple(int(s) for s in placement),
            tuple((int(r), int(v)) for r, v in assignment),
        )
    except (TypeError, ValueError):
        raise DocumentError("malformed placement/assignment") from None


def result_to_doc(status: str, best: Optional[tuple[Embedding, CostReport]], explored: int,
                  **extra: Any) -> dict:
    doc = {
        "format": FORMAT,
        "kind": "result",
        "status": status,
        "explored": explored,
        "footprint": None,
        "placement": None,
        "assignment": None,
    }
    if best is not None:
        emb, report = best
        doc.update(
            footprint=encode_rational(report.footprint),
            placement=list(emb.placement),
            assignment=[list(a) for a in emb.assignment],
        )
    doc.update(extra)
    return doc


# -- reduction metadata -----------------------------------------------------------

def metadata_to_doc(art: ReductionArtifacts) -> dict:
    gmap = art.gadget_map
    return {
        "format": FORMAT,
        "kind": "reduction",
        "variant": art.variant.value,
        "alpha": art.alpha,
        "beta": art.beta,
        "threshold": encode_rational(art.threshold),
        "closed_form_threshold": (
            None if art.closed_form is None else encode_rational(art.closed_form)
        ),
        "label_map": {str(k): v for k, v in sorted(art.label_map.items())},
        "chunk_map": [
            {"clause": j + 1, "slot": None if k is None else k + 1} for j, k in art.chunk_map
        ],
        "gadgets": {
            "variables": [
                {
                    "variable": g.variable,
                    "root": g.root,
                    "positive": g.positive,
                    "negative": g.negative,
                    "positive_leaves": list(g.positive_leaves),
                    "negative_leaves": list(g.negative_leaves),
                }
                for g in gmap.variables
            ],
            "clauses": [
                {"clause": c.clause + 1, "root": c.root, "middle": c.middle,
                 "leaves": list(c.leaves)}
                for c in gmap.clauses
            ],
        },
    }


def threshold_from_metadata(doc: dict) -> Fraction:
    if doc.get("kind") != "reduction":
        raise DocumentError("not a reduction metadata document")
    return decode_rational(_field(doc, "threshold"))
