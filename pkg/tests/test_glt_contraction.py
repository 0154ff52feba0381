import pytest

from admissible import AdmissibleGroup, AdmissibleMonoid, Stalk, StalkAssignment
from conftest import stalk_structure
from contraction import PlanMismatchError, identity_plan, make_plan
from curve_graph import GltStructure, MarkedDualGraph, MarkedPoint, Vertex
from glt_contraction import (
    GltContractionError,
    NonDivisorError,
    NotASubgroupError,
    initial_contraction,
    initial_contraction_oracle,
    is_glt_contraction,
    relative_coarse,
)
from random_instances import make_rng, random_glt, random_nested_subgroups, random_tree_graph


def halves_on_tail(index):
    return stalk_structure({"s1": ((1,), [["1/2"]]), "s2": ((2,), [["1/2"]])}, {"e": index})


def test_bridge_index_is_a_gcd(bridge_graph):
    glt = GltStructure({"AP": 4, "PB": 6})
    initial = initial_contraction(bridge_graph, glt, make_plan(bridge_graph, ["P"]))
    assert initial.structure.node_index == {"AP": 2}
    assert initial.check.valid


def test_tail_stalk_with_untwisted_node(tail_graph, diagonal_monoid):
    initial = initial_contraction(tail_graph, halves_on_tail(1), make_plan(tail_graph, ["P"]))
    stalk = initial.structure.stalk("s1")
    assert stalk.markings == (1, 2)
    assert stalk.monoid == diagonal_monoid


def test_tail_stalk_with_twisted_node(tail_graph, product_monoid):
    initial = initial_contraction(tail_graph, halves_on_tail(2), make_plan(tail_graph, ["P"]))
    assert initial.structure.stalk("s1").monoid == product_monoid


def test_untwisted_source_stays_untwisted(chain_graph):
    glt = GltStructure.untwisted(chain_graph)
    initial = initial_contraction(chain_graph, glt, make_plan(chain_graph, ["P", "Q"]))
    assert initial.structure.stalk("s").monoid == AdmissibleMonoid.free(1)


def test_invalid_source_is_rejected(tail_graph):
    glt = GltStructure({}, GltStructure.untwisted(tail_graph).stalks)
    with pytest.raises(GltContractionError):
        initial_contraction(tail_graph, glt, make_plan(tail_graph, ["P"]))


def test_compatibility_of_node_indices(bridge_graph):
    source = GltStructure({"AP": 4, "PB": 6})
    plan = make_plan(bridge_graph, ["P"])
    target_graph = initial_contraction(bridge_graph, source, plan).target
    assert is_glt_contraction(bridge_graph, source, target_graph, GltStructure({"AP": 1}), plan).valid
    check = is_glt_contraction(bridge_graph, source, target_graph, GltStructure({"AP": 4}), plan)
    assert not check.valid
    assert check.failures[0].kind == "node"
    assert check.failures[0].detail == "index 4 does not divide 2"


def test_compatibility_of_stalks(tail_graph, product_monoid):
    source = halves_on_tail(1)
    plan = make_plan(tail_graph, ["P"])
    target_graph = initial_contraction(tail_graph, source, plan).target
    free = GltStructure({}, StalkAssignment({"s1": Stalk((1, 2), AdmissibleMonoid.free(2))}))
    assert is_glt_contraction(tail_graph, source, target_graph, free, plan).valid
    too_big = GltStructure({}, StalkAssignment({"s1": Stalk((1, 2), product_monoid)}))
    check = is_glt_contraction(tail_graph, source, target_graph, too_big, plan)
    assert not check.valid
    assert check.failures[0].kind == "point"
    with pytest.raises(PlanMismatchError):
        is_glt_contraction(tail_graph, source, tail_graph, source, plan)


def test_relative_coarse_shrinks_in_place(two_marking_curve, diagonal_monoid):
    glt = stalk_structure({"s": ((1, 2), [["1/2", "0"], ["0", "1/2"]])})
    coarse = relative_coarse(two_marking_curve, glt, surviving={"s": [["1/2", "1/2"]]})
    assert coarse.stalk("s").monoid == diagonal_monoid
    untouched = relative_coarse(two_marking_curve, glt)
    assert untouched == glt
    with pytest.raises(NotASubgroupError):
        relative_coarse(two_marking_curve, glt, surviving={"s": [["1/3", "0"]]})
    with pytest.raises(NotASubgroupError):
        relative_coarse(two_marking_curve, glt, surviving={"zz": []})


def test_relative_coarse_keeps_the_order_two_classes():
    curve = MarkedDualGraph((Vertex("C", 1),), (), (MarkedPoint("s", "C", (1,)),), 1)
    glt = stalk_structure({"s": ((1,), [["1/4"]])})
    coarse = relative_coarse(curve, glt, surviving={"s": [["1/2"]]})
    assert coarse.stalk("s").monoid == AdmissibleMonoid.rank_one(2)
    assert relative_coarse(curve, glt, surviving={"s": [["3/4"]]}) == glt


def test_relative_coarse_divisors(tail_graph):
    glt = halves_on_tail(4)
    coarse = relative_coarse(tail_graph, glt, surviving={"s1": []}, divisors={"e": 2})
    assert coarse.index("e") == 2
    assert coarse.stalk("s1").monoid == AdmissibleMonoid.free(1)
    assert coarse.stalk("s2") == glt.stalk("s2")
    with pytest.raises(NonDivisorError):
        relative_coarse(tail_graph, glt, divisors={"e": 3})
    with pytest.raises(NonDivisorError):
        relative_coarse(tail_graph, glt, divisors={"zz": 1})


def test_oracle_confirms_maximality(tail_graph):
    report = initial_contraction_oracle(tail_graph, halves_on_tail(1), make_plan(tail_graph, ["P"]))
    assert report.ok
    assert report.points[0].bound == 2
    assert report.candidates_checked == 4

    report = initial_contraction_oracle(tail_graph, halves_on_tail(3), make_plan(tail_graph, ["P"]))
    assert report.ok
    assert report.points[0].bound == 6


def test_oracle_skips_large_bounds(tail_graph):
    report = initial_contraction_oracle(tail_graph, halves_on_tail(1), make_plan(tail_graph, ["P"]),
                                        max_denominator=1)
    assert report.points[0].skipped
    assert report.ok
    assert report.candidates_checked == 0


def test_oracle_on_identity_plan(bridge_graph):
    glt = GltStructure({"AP": 4, "PB": 6})
    report = initial_contraction_oracle(bridge_graph, glt, identity_plan(bridge_graph))
    assert report.ok
    assert report.points == ()


def _divisor(rng, index):
    return int(rng.choice([d for d in range(1, index + 1) if index % d == 0]))


def test_relative_coarse_twice_is_once_with_the_intersection():
    rng = make_rng(29)
    for _ in range(10):
        g = random_tree_graph(rng, max_vertices=4)
        glt = random_glt(rng, g, max_denominator=4)
        outer, inner, meet = {}, {}, {}
        for pid, stalk in glt.stalks.items():
            group = stalk.monoid.group
            outer[pid], inner[pid] = random_nested_subgroups(rng, group)
            both = AdmissibleGroup.generated_by(group.n, outer[pid]).intersection(
                AdmissibleGroup.generated_by(group.n, inner[pid]))
            meet[pid] = both.torsion_generators()
        first = {eid: _divisor(rng, index) for eid, index in glt.node_index.items()}
        second = {eid: _divisor(rng, index) for eid, index in first.items()}
        twice = relative_coarse(g, relative_coarse(g, glt, outer, first), inner, second)
        assert twice == relative_coarse(g, glt, meet, second)
