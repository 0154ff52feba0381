from fractions import Fraction

import pytest

from admissible import AdmissibleMonoid, Stalk, StalkAssignment
from conftest import stalk_structure
from curve_graph import (
    Edge,
    GltStructure,
    MapDecoration,
    MarkedDualGraph,
    MarkedPoint,
    MissingWeightsError,
    UnknownIdError,
    Vertex,
    edge_stabilizer,
    genus,
    is_isomorphic,
    is_stable,
    local_chart,
    point_stabilizer,
    relabel,
    stability_numerics,
    validate_graph,
    validate_glt,
)
from exact_lattice import FiniteAbelianGroup
from random_instances import make_rng, random_permutation_names


def test_basic_lookups(bridge_graph, tail_graph):
    assert genus(bridge_graph) == 2
    assert bridge_graph.valence("P") == 2
    assert tail_graph.point_of_marking(2).id == "s2"
    assert tail_graph.edge("e").side_at("P") == 1
    with pytest.raises(UnknownIdError):
        tail_graph.vertex("Z")
    with pytest.raises(UnknownIdError):
        tail_graph.point_of_marking(3)


def test_loop_counts_twice():
    g = MarkedDualGraph((Vertex("C", 0),), (Edge("l", "C", "C"),))
    assert g.valence("C") == 2
    assert genus(g) == 1
    assert g.edge("l").is_loop


def test_points_without_markings_are_dropped():
    g = MarkedDualGraph((Vertex("C", 1),), (), (MarkedPoint("x", "C", ()), MarkedPoint("s", "C", (2, 1))), 2)
    assert g.point_ids() == ["s"]
    assert g.point("s").markings == (1, 2)


def test_valid_graphs_pass(bridge_graph, tail_graph, chain_graph, weighted_tail_graph):
    for g in (bridge_graph, tail_graph, chain_graph, weighted_tail_graph):
        assert validate_graph(g).ok


def test_graph_violation_codes():
    ab = (Vertex("A", 1), Vertex("B", 1))
    edge = (Edge("AB", "A", "B"),)
    cases = [
        (MarkedDualGraph(ab, edge, (MarkedPoint("s", "AB", (1,)),), 1), ["marking-on-node"]),
        (MarkedDualGraph(ab, edge, (MarkedPoint("s", "Z", (1,)),), 1), ["unknown-host"]),
        (MarkedDualGraph(ab), ["disconnected"]),
        (MarkedDualGraph(ab, (Edge("x", "A", "Z"),)), ["unknown-vertex"]),
        (MarkedDualGraph(ab, edge, (MarkedPoint("s", "A", (1,)), MarkedPoint("t", "B", (1,))), 1),
         ["duplicate-marking"]),
        (MarkedDualGraph(ab, edge, (MarkedPoint("s", "A", (1,)),), 2), ["missing-marking"]),
        (MarkedDualGraph(ab, edge, (MarkedPoint("s", "A", (1, 2)),), 2, ("3/5", "3/5")), ["weight-overflow"]),
        (MarkedDualGraph(ab, edge, (MarkedPoint("s", "A", (1,)),), 1, ("0",)), ["weight-range"]),
    ]
    for g, codes in cases:
        assert validate_graph(g).codes() == codes


def test_glt_violation_codes(tail_graph):
    untwisted = GltStructure.untwisted(tail_graph)
    assert validate_glt(tail_graph, untwisted).ok

    assert validate_glt(tail_graph, GltStructure({}, untwisted.stalks)).codes() == ["missing-node-index"]
    assert validate_glt(tail_graph, GltStructure({"e": 0}, untwisted.stalks)).codes() == ["node-index"]
    extra = GltStructure({"e": 1, "zz": 2}, untwisted.stalks)
    assert validate_glt(tail_graph, extra).codes() == ["unknown-edge-index"]

    only_s1 = StalkAssignment({"s1": untwisted.stalk("s1")})
    assert validate_glt(tail_graph, GltStructure({"e": 1}, only_s1)).codes() == ["stalk-missing"]
    swapped = StalkAssignment({"s1": untwisted.stalk("s2"), "s2": untwisted.stalk("s2")})
    assert validate_glt(tail_graph, GltStructure({"e": 1}, swapped)).codes() == ["stalk-markings"]
    stray = dict(untwisted.stalks.stalks)
    stray["ghost"] = Stalk((3,), AdmissibleMonoid.free(1))
    assert validate_glt(tail_graph, GltStructure({"e": 1}, StalkAssignment(stray))).codes() == ["unknown-point"]


def test_stability(weighted_tail_graph, tail_graph):
    assert stability_numerics(weighted_tail_graph) == Fraction(9, 10)
    report = is_stable(weighted_tail_graph, MapDecoration.all_contracted(weighted_tail_graph))
    assert not report.stable
    assert report.violators == ("P",)
    assert report.numerics_ok
    # a component the map does not contract is never a violator
    assert is_stable(weighted_tail_graph, MapDecoration({"A": True, "P": False})).stable
    with pytest.raises(MissingWeightsError):
        is_stable(tail_graph, MapDecoration.all_contracted(tail_graph))


def test_stabilizers_and_charts(two_marking_curve):
    glt = stalk_structure({"s": ((1, 2), [["1/2", "1/2"]])})
    assert validate_glt(two_marking_curve, glt).ok
    assert point_stabilizer(two_marking_curve, glt, "s") == FiniteAbelianGroup((2,))
    chart = local_chart(two_marking_curve, glt, "s")
    assert chart.kind == "point"
    assert not chart.trivial
    assert chart.describe() == ("point s: markings [1, 2], monoid <N^2, (1/2, 1/2)>, "
                                "group N^gp/Z^I = Z/2")


def test_node_charts(bridge_graph):
    glt = GltStructure({"AP": 3, "PB": 1})
    assert edge_stabilizer(bridge_graph, glt, "AP") == FiniteAbelianGroup((3,))
    chart = local_chart(bridge_graph, glt, "AP")
    assert (chart.node_order, chart.node_weights) == (3, (1, 2))
    assert chart.describe() == "node AP: [xy = t / mu_3] with weights (1, 2), group Z/3"
    assert local_chart(bridge_graph, glt, "PB").describe() == "node PB: untwisted node xy = t"
    with pytest.raises(UnknownIdError):
        local_chart(bridge_graph, glt, "P")


def test_isomorphism_after_random_relabeling(chain_graph):
    rng = make_rng(7)
    glt = GltStructure({"e1": 2, "e2": 3}, GltStructure.untwisted(chain_graph).stalks)
    vertex_names = random_permutation_names(rng, chain_graph.vertex_ids(), "v")
    edge_names = random_permutation_names(rng, chain_graph.edge_ids(), "n")
    point_names = random_permutation_names(rng, chain_graph.point_ids(), "p")
    other, other_glt = relabel(chain_graph, glt, vertex_names, edge_names, point_names)

    iso = is_isomorphic(chain_graph, glt, other, other_glt)
    assert iso is not None
    # the chain has no symmetries, so the map is the relabeling itself
    assert iso.vertex_map == vertex_names
    assert iso.edge_map == edge_names
    assert iso.point_map == point_names


def test_isomorphism_sees_indices_and_stalks(chain_graph):
    untwisted = GltStructure.untwisted(chain_graph)
    a = GltStructure({"e1": 2, "e2": 3}, untwisted.stalks)
    b = GltStructure({"e1": 3, "e2": 2}, untwisted.stalks)
    assert is_isomorphic(chain_graph, a, chain_graph, b) is None
    assert is_isomorphic(chain_graph, a, chain_graph, a) is not None
    twisted = stalk_structure({"s": ((1,), [["1/2"]])}, {"e1": 2, "e2": 3})
    assert is_isomorphic(chain_graph, a, chain_graph, twisted) is None


def test_isomorphism_respects_markings(tail_graph):
    moved = MarkedDualGraph(tail_graph.vertices, tail_graph.edges,
                            (MarkedPoint("s1", "A", (1,)), MarkedPoint("s2", "P", (2,))), 2)
    assert is_isomorphic(tail_graph, None, moved, None) is None
