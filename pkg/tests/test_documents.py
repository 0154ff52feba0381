import json

import pytest

from admissible import AdmissibleMonoid
from curve_graph import GltStructure, MapDecoration
from documents import (
    CoarseSpec,
    DocumentError,
    PlanSpec,
    dump_document,
    parse_document,
    serialize,
)
from exact_lattice import FiniteAbelianGroup
from local_monoid import local_monoid_from_submonoid

GRAPH_DOC = {
    "sections": [
        {"kind": "graph",
         "vertices": [{"id": "A", "genus": 1}, {"id": "P"}],
         "edges": [{"id": "e", "ends": ["A", "P"]}],
         "points": [{"id": "s1", "host": "P", "markings": [1]}, {"id": "s2", "host": "P", "markings": [2]}],
         "markings": 2, "weights": ["1/2", "2/5"]},
        {"kind": "glt", "node_index": {"e": 2},
         "stalks": {"s1": {"markings": [1], "generators": [["1/2"]]}, "s2": {"markings": [2]}}},
        {"kind": "plan", "collapsed": ["P"]},
        {"kind": "decoration", "contracted": ["A", "P"]},
        {"kind": "coarse", "surviving": {"s1": []}, "divisors": {"e": 1}},
    ]
}


def test_parse_every_curve_section(weighted_tail_graph):
    doc = parse_document(json.dumps(GRAPH_DOC))
    assert [k for k, _ in doc.sections] == ["graph", "glt", "plan", "decoration", "coarse"]
    assert doc.first("graph") == weighted_tail_graph
    glt = doc.first("glt")
    assert isinstance(glt, GltStructure)
    assert glt.index("e") == 2
    assert glt.stalk("s1").monoid == AdmissibleMonoid.rank_one(2)
    assert glt.stalk("s2").monoid == AdmissibleMonoid.free(1)
    assert doc.first("plan") == PlanSpec(("P",))
    assert doc.first("decoration") == MapDecoration({"A": True, "P": True})
    assert doc.first("coarse") == CoarseSpec({"s1": ()}, {"e": 1})


def test_serialize_is_stable():
    doc = parse_document(json.dumps(GRAPH_DOC))
    text = serialize(doc)
    assert text.endswith("\n")
    assert serialize(parse_document(text)) == text


def test_single_section_document(diagonal_monoid):
    doc = parse_document('{"kind": "monoid", "rank": 2, "generators": [["1/2", "1/2"]]}')
    assert doc.first("monoid") == diagonal_monoid
    out = json.loads(dump_document([diagonal_monoid]))
    assert out["sections"][0] == {"kind": "monoid", "rank": 2, "generators": [["1/2", "1/2"]],
                                  "description": "<N^2, (1/2, 1/2)>"}


def test_local_monoid_sections(z4_cocycle):
    doc = parse_document(json.dumps({"sections": [
        {"kind": "local-monoid", "invariant_factors": [4], "carry": [0, 1, 1, 2, 1, 0]},
        {"kind": "submonoid", "torsion": [2], "generators": [[1, 0], [1, 1]], "designated": [2, 1],
         "grading": {"invariant_factors": [4], "images": [[1], [2]]}},
    ]}))
    assert doc.first("local-monoid") == z4_cocycle
    presentation = doc.first("submonoid")
    assert presentation.grading_group == FiniteAbelianGroup((4,))
    assert local_monoid_from_submonoid(presentation) == z4_cocycle


def test_missing_sections_are_reported():
    doc = parse_document('{"kind": "monoid", "rank": 1}')
    assert doc.first("graph", required=False) is None
    with pytest.raises(DocumentError) as info:
        doc.first("graph")
    assert info.value.message == "document needs a 'graph' section"
    with pytest.raises(DocumentError) as info:
        doc.first("monoid", position=1)
    assert info.value.message == "document needs 2 of 'monoid' section"


def test_syntax_errors_carry_a_line():
    with pytest.raises(DocumentError) as info:
        parse_document('{\n  "kind": "monoid",\n  "rank": 1,\n}')
    assert info.value.path == "$"
    assert info.value.line == 4
    assert str(info.value).startswith("$ (line 4): ")


@pytest.mark.parametrize("section, path", [
    ({"kind": "monoid", "rank": 1, "generators": [["-1/2"]]}, "$.sections[0].generators[0]"),
    ({"kind": "monoid", "rank": 2, "generators": [["1/2"]]}, "$.sections[0].generators[0]"),
    ({"kind": "monoid", "rank": 1, "generators": [["1/0"]]}, "$.sections[0].generators[0][0]"),
    ({"kind": "monoid", "rank": -1}, "$.sections[0].rank"),
    ({"kind": "local-monoid", "invariant_factors": [4], "carry": [1]}, "$.sections[0].carry"),
    ({"kind": "local-monoid", "invariant_factors": [2, 3]}, "$.sections[0].invariant_factors"),
    ({"kind": "graph", "vertices": [{"id": "A"}], "edges": [{"id": "e", "ends": ["A"]}]},
     "$.sections[0].edges[0].ends"),
    ({"kind": "graph", "vertices": [{"genus": 0}]}, "$.sections[0].vertices[0]"),
    ({"kind": "glt", "node_index": {"e": 0}}, "$.sections[0].node_index.e"),
    ({"kind": "plan", "collapsed": [1]}, "$.sections[0].collapsed"),
    ({"kind": "teapot"}, "$.sections[0].kind"),
    ({"rank": 1}, "$.sections[0]"),
])
def test_schema_errors_carry_a_path(section, path):
    with pytest.raises(DocumentError) as info:
        parse_document(json.dumps({"sections": [section]}))
    assert info.value.path == path
    assert info.value.line is None


def test_non_object_documents():
    with pytest.raises(DocumentError):
        parse_document("[1, 2]")
    with pytest.raises(DocumentError):
        parse_document('{"sections": 3}')
    with pytest.raises(DocumentError):
        parse_document('{"sections": [3]}')
