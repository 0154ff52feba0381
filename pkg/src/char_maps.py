"""
Characteristic Monoid Charts of Contractions
============================================

For a contraction q: C → D these are the maps on characteristic data:

- the base map φ̄: N^{J(D)} → N^{J(C)}, sending a target node to the sum
  of the source nodes it replaces;
- at each target node, the images of its two branch generators as sums
  of source half-edges;
- at each target marking, the image of e_i as the sum of the half-edges
  toward s_i along the collapsed path, plus e_i itself.

Also here: the kernel of the Picard map of a collapsed tail, which
certifies that the marking chart is the only possible one.
"""

import logging
from collections import Counter, deque
from dataclasses import dataclass
from typing import Dict, NamedTuple, Sequence, Tuple

import networkx as nx

from contraction import ContractionPlan, ContractionResult, contract
from curve_graph import MarkedDualGraph
from exact_lattice import IntMatrix, integer_kernel, lattice_rank, same_row_lattice

logger = logging.getLogger(__name__)


class CharMapError(ValueError):
    """Base error for chart map computations."""


class MalformedTreeError(CharMapError):
    """The fiber handed to picard_kernel is not a rooted genus-0 tree."""


class HalfEdge(NamedTuple):
    edge: str
    side: int

    def label(self) -> str:
        return f"{self.edge}.{self.side}"


@dataclass(frozen=True)
class NodeChart:
    """Images of the branch generators at the two ends of a target node."""
    a_side: Tuple[HalfEdge, ...]
    b_side: Tuple[HalfEdge, ...]
    loop: bool = False

    def canonical(self):
        a, b = tuple(sorted(self.a_side)), tuple(sorted(self.b_side))
        if self.loop:
            return tuple(sorted((a, b)))
        return a, b


@dataclass(frozen=True)
class MarkingChart:
    """e_i ↦ Σ half_edges + e_i (of the source point carrying i)."""
    point: str
    source_point: str
    half_edges: Tuple[HalfEdge, ...]

    def canonical(self):
        return self.point, self.source_point, tuple(sorted(self.half_edges))


@dataclass(frozen=True)
class CharMaps:
    source_edges: Tuple[str, ...]
    target_edges: Tuple[str, ...]
    base: IntMatrix
    node_charts: Dict[str, NodeChart]
    marking_charts: Dict[int, MarkingChart]

    def column(self, target_edge: str) -> Dict[str, int]:
        j = self.target_edges.index(target_edge)
        return {e: self.base[i, j] for i, e in enumerate(self.source_edges) if self.base[i, j]}


def _side(g: MarkedDualGraph, eid: str, vertex: str) -> int:
    return g.edge(eid).side_at(vertex)


def char_maps_of(result: ContractionResult) -> CharMaps:
    g = result.source
    source_edges = tuple(g.edge_ids())
    target_edges = tuple(result.target.edge_ids())
    columns = []
    for t in target_edges:
        members = set(result.edge_map[t])
        columns.append([1 if e in members else 0 for e in source_edges])
    base = IntMatrix.from_columns(columns, rows=len(source_edges)) if columns \
        else IntMatrix.zeros(len(source_edges), 0)

    node_charts = {}
    for t in target_edges:
        walk = result.edge_walks[t]
        target_edge = result.target.edge(t)
        if len(walk) == 1 and walk[0].edge == t:
            node_charts[t] = NodeChart((HalfEdge(t, 0),), (HalfEdge(t, 1),), target_edge.is_loop)
            continue
        a_side = tuple(HalfEdge(s.edge, _side(g, s.edge, s.start)) for s in walk)
        b_side = tuple(HalfEdge(s.edge, _side(g, s.edge, s.end)) for s in walk)
        node_charts[t] = NodeChart(a_side, b_side, target_edge.is_loop)

    marking_charts = {}
    for p in result.target.points:
        for i in p.markings:
            walk = result.marking_walks[i]
            source_point = g.point_of_marking(i).id
            half_edges = tuple(HalfEdge(s.edge, _side(g, s.edge, s.end)) for s in walk)
            marking_charts[i] = MarkingChart(p.id, source_point, half_edges)
    return CharMaps(source_edges, target_edges, base, node_charts, dict(sorted(marking_charts.items())))


def char_maps(g: MarkedDualGraph, plan: ContractionPlan) -> CharMaps:
    """Base map and node/marking charts of the contraction described by plan."""
    return char_maps_of(contract(g, plan))


def compose_char_maps(first: CharMaps, second: CharMaps) -> CharMaps:
    """Charts of C → C' → C'' from those of C → C' and C' → C''."""
    if first.target_edges != second.source_edges:
        raise CharMapError("charts do not compose: middle node sets differ")

    def pull(half: HalfEdge) -> Tuple[HalfEdge, ...]:
        chart = first.node_charts[half.edge]
        return chart.a_side if half.side == 0 else chart.b_side

    node_charts = {}
    for t, chart in second.node_charts.items():
        a_side = tuple(h for half in chart.a_side for h in pull(half))
        b_side = tuple(h for half in chart.b_side for h in pull(half))
        node_charts[t] = NodeChart(a_side, b_side, chart.loop)
    marking_charts = {}
    for i, chart in second.marking_charts.items():
        inner = first.marking_charts[i]
        half_edges = tuple(h for half in chart.half_edges for h in pull(half)) + inner.half_edges
        marking_charts[i] = MarkingChart(chart.point, inner.source_point, half_edges)
    return CharMaps(first.source_edges, second.target_edges, first.base @ second.base,
                    node_charts, marking_charts)


def same_char_maps(a: CharMaps, b: CharMaps) -> bool:
    """Equality of chart data; the two branches of a loop may be swapped."""
    if a.source_edges != b.source_edges or a.target_edges != b.target_edges or a.base != b.base:
        return False
    if {t: c.canonical() for t, c in a.node_charts.items()} != {t: c.canonical() for t, c in b.node_charts.items()}:
        return False
    return ({i: c.canonical() for i, c in a.marking_charts.items()}
            == {i: c.canonical() for i, c in b.marking_charts.items()})


def half_edge_values(maps: CharMaps, markings: Sequence[int], values: Sequence) -> Counter:
    """Pull a vector on the markings back to the collapsed half-edges."""
    pulled: Counter = Counter()
    for i, value in zip(markings, values):
        for h in maps.marking_charts[i].half_edges:
            pulled[h] += value
    return pulled


# ==========================================
# PICARD KERNEL OF A COLLAPSED TAIL
# ==========================================

@dataclass(frozen=True)
class PicardKernel:
    """
    Kernel of the Picard map of a rooted genus-0 tree P.

    Variables: t0+, t0- (root node), tj+, tj- per internal node, w.
    """
    variables: Tuple[str, ...]
    matrix: IntMatrix
    kernel_basis: IntMatrix
    diagonals: Tuple[Tuple[int, ...], ...]
    w_prime: Tuple[int, ...]
    path: Tuple[str, ...]
    verified: bool

    def coefficient(self, variable: str) -> int:
        return self.w_prime[self.variables.index(variable)]


def picard_kernel(fiber: MarkedDualGraph, root_vertex: str, marking_vertex: str) -> PicardKernel:
    """
    Build the Picard map of the fiber and check that its kernel monoid is
    freely generated by the diagonals t+ + t- and by w' = Σ_path t- + w.
    """
    vertex_ids = fiber.vertex_ids()
    for vid in (root_vertex, marking_vertex):
        if vid not in vertex_ids:
            raise MalformedTreeError(f"{vid!r} is not a component of the fiber")
    if any(v.genus != 0 for v in fiber.vertices):
        raise MalformedTreeError("fiber components must have genus 0")
    if any(e.is_loop for e in fiber.edges) or len(fiber.edges) != len(vertex_ids) - 1 \
            or not fiber.is_connected():
        raise MalformedTreeError("fiber must be a tree")

    depth = {root_vertex: 0}
    queue = deque([root_vertex])
    while queue:
        x = queue.popleft()
        for e in fiber.edges_at(x):
            y = e.other(x)
            if y not in depth:
                depth[y] = depth[x] + 1
                queue.append(y)

    edges = list(fiber.edges)
    variables = ["t0+", "t0-"]
    for e in edges:
        variables += [f"t[{e.id}]+", f"t[{e.id}]-"]
    variables.append("w")
    row_of = {vid: k for k, vid in enumerate(vertex_ids)}
    columns = []
    column = [0] * len(vertex_ids)
    column[row_of[root_vertex]] = -1
    columns.append(column)
    columns.append([-x for x in column])
    for e in edges:
        near, far = (e.u, e.v) if depth[e.u] < depth[e.v] else (e.v, e.u)
        plus = [0] * len(vertex_ids)
        plus[row_of[near]] = 1
        plus[row_of[far]] = -1
        columns.append(plus)
        columns.append([-x for x in plus])
    column = [0] * len(vertex_ids)
    column[row_of[marking_vertex]] = -1
    columns.append(column)
    matrix = IntMatrix.from_columns(columns, rows=len(vertex_ids))

    kernel = integer_kernel(matrix)
    width = len(variables)
    diagonals = []
    for k in range(len(edges) + 1):
        vec = [0] * width
        vec[2 * k] = vec[2 * k + 1] = 1
        diagonals.append(tuple(vec))

    tree = fiber.to_networkx()
    path = nx.shortest_path(nx.Graph(tree), root_vertex, marking_vertex)
    on_path = set()
    for a, b in zip(path, path[1:]):
        on_path.add(next(e.id for e in edges if {e.u, e.v} == {a, b}))
    w_prime = [0] * width
    w_prime[1] = 1
    for k, e in enumerate(edges):
        if e.id in on_path:
            w_prime[2 * k + 3] = 1
    w_prime[-1] = 1
    proposed = IntMatrix.from_rows(diagonals + [tuple(w_prime)], cols=width)

    in_kernel = all(not any(matrix.apply(row)) for row in proposed.to_rows())
    same_rank = lattice_rank(proposed) == kernel.rows == proposed.rows
    spans = same_rank and same_row_lattice(proposed, kernel)
    # coordinates t+ and w carry the identity, so nonnegative kernel elements
    # have nonnegative coefficients in these generators
    pivots = [2 * k for k in range(len(edges) + 1)] + [width - 1]
    identity = all(proposed[r, c] == (1 if r == k else 0)
                   for r in range(proposed.rows) for k, c in enumerate(pivots))
    nonnegative = all(x >= 0 for x in proposed.entries)
    verified = in_kernel and spans and identity and nonnegative
    if not verified:
        logger.warning("picard kernel check failed for root %s, marking %s", root_vertex, marking_vertex)
    return PicardKernel(tuple(variables), matrix, kernel, tuple(diagonals), tuple(w_prime),
                        tuple(path), verified)
