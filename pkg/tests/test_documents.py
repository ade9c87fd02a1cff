import json
import random
from fractions import Fraction

import pytest

from vcembed import documents as docs
from vcembed.generate import random_instance
from vcembed.reductions import canonical_embedding, reduce_two_replica
from vcembed.sat import CnfFormula, solve_sat
from vcembed.solver import solve_exact


@pytest.mark.parametrize("seed", range(10))
def test_instance_round_trip(seed):
    inst = random_instance(random.Random(seed))
    text = docs.dumps(docs.instance_to_doc(inst))
    assert docs.instance_from_doc(docs.loads(text, "instance")) == inst


def test_rationals_and_unbounded_encoding():
    assert docs.encode_rational(Fraction(7, 2)) == "7/2"
    assert docs.encode_rational(Fraction(4)) == 4
    assert docs.decode_rational("7/2") == Fraction(7, 2)
    with pytest.raises(docs.DocumentError):
        docs.decode_rational(0.5)
    art = reduce_two_replica(CnfFormula(4, ((1, 2, 3),)))
    doc = docs.instance_to_doc(art.instance)
    assert doc["format"] == 1
    assert doc["tree"]["capacity"][1] == 1 * (1 * 3 + 2)
    assert doc["tree"]["capacity"][2] == -1


def test_embedding_and_result_round_trip():
    art = reduce_two_replica(CnfFormula(4, ((1, -2, 3),)))
    emb = canonical_embedding(art, solve_sat(art.formula))
    doc = docs.loads(docs.dumps(docs.embedding_to_doc(emb)))
    assert docs.embedding_from_doc(doc) == emb
    res = solve_exact(art.instance)
    rdoc = docs.loads(docs.dumps(docs.result_to_doc(res.status.value, res.best, res.explored)))
    assert docs.embedding_from_doc(rdoc) == res.best[0]
    assert rdoc["footprint"] == docs.encode_rational(res.footprint)


def test_metadata_document():
    art = reduce_two_replica(CnfFormula(4, ((1, -2, 3),)))
    meta = json.loads(docs.dumps(docs.metadata_to_doc(art)))
    assert meta["threshold"] == art.threshold
    assert meta["closed_form_threshold"] is None
    assert meta["chunk_map"][1] == {"clause": 1, "slot": 2}
    assert docs.threshold_from_metadata(meta) == art.threshold


@pytest.mark.parametrize(
    "text",
    [
        "[]",
        "{",
        '{"format": 2, "kind": "instance"}',
        '{"format": 1, "kind": "instance"}',
        '{"format": 1, "kind": "instance", "tree": {"parent": [-1, 0], "kinds": ["router", "server"],'
        ' "capacity": [-1, -1]}, "chunks": [[0]], "node_count": 1, "b1": 1, "b2": 1}',
    ],
)
def test_malformed_instances(text):
    with pytest.raises(docs.DocumentError):
        docs.instance_from_doc(docs.loads(text))
