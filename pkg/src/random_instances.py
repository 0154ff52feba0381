"""
Random Instances
================

Seeded generators for the property sweeps and the randomized tests.
Every function takes a numpy Generator so that a single seed reproduces
a whole sweep.
"""

import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from admissible import AdmissibleGroup, AdmissibleMonoid, RationalVector, Stalk, StalkAssignment
from contraction import ContractionPlan, InvalidPlanError, make_plan
from curve_graph import Edge, GltStructure, MapDecoration, MarkedDualGraph, MarkedPoint, Vertex
from exact_lattice import FiniteAbelianGroup, frac_part
from local_monoid import LocalMonoid, upper_pairs, validate

logger = logging.getLogger(__name__)


def make_rng(seed: Optional[int] = 42) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_rational_vector(rng: np.random.Generator, n: int, max_denominator: int) -> Tuple[Fraction, ...]:
    out = []
    for _ in range(n):
        den = int(rng.integers(1, max_denominator + 1))
        out.append(Fraction(int(rng.integers(0, den)), den))
    return tuple(out)


def random_admissible_monoid(rng: np.random.Generator, max_rank: int = 4, max_denominator: int = 12,
                             max_generators: int = 3, rank: Optional[int] = None) -> AdmissibleMonoid:
    """⟨N^n, a few random vectors in [0,1)^n⟩."""
    n = rank if rank is not None else int(rng.integers(1, max_rank + 1))
    count = int(rng.integers(0, max_generators + 1))
    gens = [random_rational_vector(rng, n, max_denominator) for _ in range(count)]
    return AdmissibleMonoid.generated_by(n, gens)


def random_cyclic_local_monoid(rng: np.random.Generator, order: int, max_carry: int = 4) -> LocalMonoid:
    """
    A valid cocycle on Z/order from random minimal lifts: δ_k = (a_k, k)
    with a_0 = 0, and c(j, k) = a_j + a_k − a_{j+k} + s·[j + k ≥ order].

    Any choice with s ≥ 1 and a_k ≥ 0 satisfying the carries' nonnegativity
    gives a valid local monoid; draws failing it are redrawn.
    """
    X = FiniteAbelianGroup.cyclic(order)
    if X.is_trivial():
        return LocalMonoid.trivial()
    while True:
        s = int(rng.integers(1, max_carry + 1))
        lifts = [0] + [int(rng.integers(0, max_carry + 1)) for _ in range(order - 1)]
        table = {}
        for (j,), (k,) in upper_pairs(X):
            table[((j,), (k,))] = lifts[j] + lifts[k] - lifts[(j + k) % order] + (s if j + k >= order else 0)
        d = LocalMonoid(X, table)
        if validate(d).valid:
            return d


# ==========================================
# GRAPHS
# ==========================================

def _random_tree(rng: np.random.Generator, nv: int) -> nx.Graph:
    """Uniform labeled tree on 0..nv-1 from a random Prufer sequence."""
    if nv < 2:
        return nx.empty_graph(nv)
    return nx.from_prufer_sequence([int(x) for x in rng.integers(0, nv, size=nv - 2)])


def random_weighted_graph(rng: np.random.Generator, max_vertices: int = 7, max_markings: int = 5,
                          extra_edges: int = 2, positive_genus: float = 0.25):
    """
    Random connected prestable weighted graph with a decoration.

    Returns (graph, decoration). Weights are drawn so that every point
    sums to at most 1 and 2g − 2 + Σa > 0.
    """
    while True:
        nv = int(rng.integers(1, max_vertices + 1))
        tree = _random_tree(rng, nv)
        vertices = [Vertex(f"v{k}", 1 if rng.random() < positive_genus else 0) for k in range(nv)]
        edges = [Edge(f"e{k}", f"v{min(a, b)}", f"v{max(a, b)}") for k, (a, b) in enumerate(sorted(tree.edges()))]
        for _ in range(int(rng.integers(0, extra_edges + 1))):
            a, b = sorted(int(x) for x in rng.integers(0, nv, size=2))
            edges.append(Edge(f"e{len(edges)}", f"v{a}", f"v{b}"))
        n = int(rng.integers(0, max_markings + 1))
        points = []
        weights = []
        for i in range(1, n + 1):
            host = f"v{int(rng.integers(nv))}"
            points.append(MarkedPoint(f"p{i}", host, (i,)))
            weights.append(Fraction(int(rng.integers(1, 6)), 5))
        g = MarkedDualGraph(tuple(vertices), tuple(edges), tuple(points), n, tuple(weights))
        numerics = 2 * (sum(v.genus for v in vertices) + len(edges) - nv + 1) - 2 + sum(weights, Fraction(0))
        if numerics > 0:
            decoration = MapDecoration({v.id: bool(rng.random() < 0.8) for v in vertices})
            return g, decoration


def random_tree_graph(rng: np.random.Generator, max_vertices: int = 8, max_markings: int = 4,
                      positive_genus: float = 0.2) -> MarkedDualGraph:
    """Random tree-shaped marked graph; markings sit on distinct points."""
    nv = int(rng.integers(1, max_vertices + 1))
    tree = _random_tree(rng, nv)
    vertices = [Vertex(f"v{k}", 1 if rng.random() < positive_genus else 0) for k in range(nv)]
    edges = [Edge(f"e{k}", f"v{min(a, b)}", f"v{max(a, b)}") for k, (a, b) in enumerate(sorted(tree.edges()))]
    n = int(rng.integers(0, max_markings + 1))
    points = [MarkedPoint(f"p{i}", f"v{int(rng.integers(nv))}", (i,)) for i in range(1, n + 1)]
    return MarkedDualGraph(tuple(vertices), tuple(edges), tuple(points), n, None)


def random_plan(rng: np.random.Generator, g: MarkedDualGraph, max_collapsed: int = 5,
                attempts: int = 200) -> ContractionPlan:
    """A random valid plan on g; the identity plan when nothing else is found."""
    candidates = [v.id for v in g.vertices if v.genus == 0]
    for _ in range(attempts):
        if not candidates:
            break
        size = int(rng.integers(1, min(max_collapsed, len(candidates)) + 1))
        chosen = list(rng.choice(candidates, size=size, replace=False))
        try:
            return make_plan(g, [str(v) for v in chosen])
        except InvalidPlanError:
            continue
    return make_plan(g, [])


def random_glt(rng: np.random.Generator, g: MarkedDualGraph, max_index: int = 6,
               max_denominator: int = 6) -> GltStructure:
    node_index = {e.id: int(rng.integers(1, max_index + 1)) for e in g.edges}
    stalks = {}
    for p in g.points:
        monoid = random_admissible_monoid(rng, max_denominator=max_denominator,
                                          max_generators=2, rank=len(p.markings))
        stalks[p.id] = Stalk(p.markings, monoid)
    return GltStructure(node_index, StalkAssignment(stalks))


def random_nested_subgroups(rng: np.random.Generator, group: AdmissibleGroup,
                            max_generators: int = 2) -> Tuple[List[RationalVector], List[RationalVector]]:
    """
    Generators in [0,1)^n of subgroups T ⊆ S of G/Z^n. S is spanned by
    random classes of G and T by random integer combinations of those.
    """
    def combine(basis: List[RationalVector], count: int) -> List[RationalVector]:
        out = []
        for _ in range(count):
            coefficients = [int(c) for c in rng.integers(0, group.exponent, size=len(basis))]
            vec = [Fraction(0)] * group.n
            for c, b in zip(coefficients, basis):
                vec = [q + c * x for q, x in zip(vec, b)]
            out.append(tuple(frac_part(q) for q in vec))
        return out

    torsion = group.torsion_generators()
    if not torsion:
        return [], []
    outer = combine(torsion, int(rng.integers(0, max_generators + 1)))
    inner = combine(outer, int(rng.integers(0, max_generators + 1))) if outer else []
    return outer, inner


def random_permutation_names(rng: np.random.Generator, ids: Sequence[str], prefix: str) -> dict:
    order = [int(x) for x in rng.permutation(len(ids))]
    return {ident: f"{prefix}{order[k]}" for k, ident in enumerate(ids)}
