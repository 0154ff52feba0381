import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from admissible import AdmissibleMonoid, Stalk, StalkAssignment  # noqa: E402
from curve_graph import Edge, GltStructure, MarkedDualGraph, MarkedPoint, Vertex  # noqa: E402
from exact_lattice import FiniteAbelianGroup  # noqa: E402
from local_monoid import LocalMonoid  # noqa: E402

CORPUS_DIR = os.path.join(os.path.dirname(__file__), '..', 'corpus')


# ==========================================
# MONOIDS
# ==========================================

@pytest.fixture
def product_monoid():
    """(1/2)N x (1/2)N."""
    return AdmissibleMonoid.generated_by(2, [["1/2", "0"], ["0", "1/2"]])


@pytest.fixture
def diagonal_monoid():
    """<N^2, (1/2, 1/2)>."""
    return AdmissibleMonoid.generated_by(2, [["1/2", "1/2"]])


@pytest.fixture
def first_half():
    return AdmissibleMonoid.generated_by(2, [["1/2", "0"]])


@pytest.fixture
def second_half():
    return AdmissibleMonoid.generated_by(2, [["0", "1/2"]])


@pytest.fixture
def z4_cocycle():
    """Valid on Z/4 but not a pushout of any admissible monoid."""
    return LocalMonoid.from_upper_values(FiniteAbelianGroup((4,)), [0, 1, 1, 2, 1, 0])


@pytest.fixture
def mu2_cocycle():
    return LocalMonoid.from_upper_values(FiniteAbelianGroup((2,)), [3])


@pytest.fixture
def mu3_cocycle():
    return LocalMonoid.from_upper_values(FiniteAbelianGroup((3,)), [1, 2, 1])


# ==========================================
# GRAPHS
# ==========================================

@pytest.fixture
def bridge_graph():
    """A - P - B with P a rational bridge."""
    return MarkedDualGraph(
        (Vertex("A", 1), Vertex("B", 1), Vertex("P", 0)),
        (Edge("AP", "A", "P"), Edge("PB", "P", "B")),
    )


@pytest.fixture
def tail_graph():
    """A - P with two single markings on the rational tail P."""
    return MarkedDualGraph(
        (Vertex("A", 1), Vertex("P", 0)),
        (Edge("e", "A", "P"),),
        (MarkedPoint("s1", "P", (1,)), MarkedPoint("s2", "P", (2,))),
        2,
    )


@pytest.fixture
def chain_graph():
    """A - P - Q with the marking on the end of the tail."""
    return MarkedDualGraph(
        (Vertex("A", 1), Vertex("P", 0), Vertex("Q", 0)),
        (Edge("e1", "A", "P"), Edge("e2", "P", "Q")),
        (MarkedPoint("s", "Q", (1,)),),
        1,
    )


@pytest.fixture
def weighted_tail_graph():
    return MarkedDualGraph(
        (Vertex("A", 1), Vertex("P", 0)),
        (Edge("e", "A", "P"),),
        (MarkedPoint("s1", "P", (1,)), MarkedPoint("s2", "P", (2,))),
        2,
        ("1/2", "2/5"),
    )


@pytest.fixture
def two_marking_curve():
    """One genus-1 component with markings 1 and 2 at the same point."""
    return MarkedDualGraph((Vertex("C", 1),), (), (MarkedPoint("s", "C", (1, 2)),), 2)


def stalk_structure(point_generators, node_index=None):
    """GltStructure from {point: (markings, generators)}."""
    stalks = {pid: Stalk(markings, AdmissibleMonoid.generated_by(len(markings), gens))
              for pid, (markings, gens) in point_generators.items()}
    return GltStructure(dict(node_index or {}), StalkAssignment(stalks))
