"""
Marked Dual Graphs
==================

Dual graphs of marked prestable curves over an algebraically closed
field: vertices are components (with the genus of their normalization),
edges are nodes (loops allowed), and marked points sit on vertices and
carry sets of marking indices. A generalized log twisted structure adds
a positive index at every node and an admissible stalk at every marked
point.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import networkx as nx
from networkx.algorithms.isomorphism import MultiGraphMatcher

from admissible import AdmissibleMonoid, Stalk, StalkAssignment, stabilizer_group
from exact_lattice import FiniteAbelianGroup, format_rational, parse_rational

logger = logging.getLogger(__name__)


class CurveGraphError(ValueError):
    """Base error for dual graph computations."""


class UnknownIdError(CurveGraphError):
    """Raised when a vertex, edge or point id does not exist."""


class MissingWeightsError(CurveGraphError):
    """Raised when stability is asked of a graph without marking weights."""


# ==========================================
# GRAPH DATA
# ==========================================

@dataclass(frozen=True)
class Vertex:
    id: str
    genus: int = 0


@dataclass(frozen=True)
class Edge:
    """A node; end 0 sits on ``u`` and end 1 on ``v``."""
    id: str
    u: str
    v: str

    @property
    def is_loop(self) -> bool:
        return self.u == self.v

    def end(self, side: int) -> str:
        return self.u if side == 0 else self.v

    def side_at(self, vertex: str) -> int:
        if vertex == self.u:
            return 0
        if vertex == self.v:
            return 1
        raise CurveGraphError(f"edge {self.id} does not touch {vertex}")

    def other(self, vertex: str) -> str:
        return self.v if vertex == self.u else self.u


@dataclass(frozen=True)
class MarkedPoint:
    id: str
    host: str
    markings: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "markings", tuple(sorted(int(i) for i in self.markings)))


@dataclass(frozen=True)
class MarkedDualGraph:
    """
    Dual graph of an n-marked prestable curve.

    Tuples are kept sorted by id; points without markings are dropped.
    ``weights[i - 1]`` is the weight of marking i.
    """
    vertices: Tuple[Vertex, ...]
    edges: Tuple[Edge, ...] = ()
    points: Tuple[MarkedPoint, ...] = ()
    n: int = 0
    weights: Optional[Tuple[Fraction, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices, key=lambda x: x.id)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda x: x.id)))
        kept = tuple(p for p in self.points if p.markings)
        object.__setattr__(self, "points", tuple(sorted(kept, key=lambda x: x.id)))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(parse_rational(w) for w in self.weights))

    # --- lookups -------------------------------------------------------
    def vertex_ids(self) -> List[str]:
        return [v.id for v in self.vertices]

    def edge_ids(self) -> List[str]:
        return [e.id for e in self.edges]

    def point_ids(self) -> List[str]:
        return [p.id for p in self.points]

    def vertex(self, vid: str) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise UnknownIdError(f"unknown vertex {vid!r}")

    def edge(self, eid: str) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise UnknownIdError(f"unknown edge {eid!r}")

    def point(self, pid: str) -> MarkedPoint:
        for p in self.points:
            if p.id == pid:
                return p
        raise UnknownIdError(f"unknown point {pid!r}")

    def edges_at(self, vid: str) -> List[Edge]:
        return [e for e in self.edges if vid in (e.u, e.v)]

    def valence(self, vid: str) -> int:
        """Node branches at a vertex; a loop counts twice."""
        return sum(2 if e.is_loop else 1 for e in self.edges_at(vid))

    def points_at(self, vid: str) -> List[MarkedPoint]:
        return [p for p in self.points if p.host == vid]

    def point_of_marking(self, i: int) -> MarkedPoint:
        for p in self.points:
            if i in p.markings:
                return p
        raise UnknownIdError(f"marking {i} is not carried by any point")

    def weight(self, i: int) -> Fraction:
        if self.weights is None:
            raise MissingWeightsError("graph has no marking weights")
        return self.weights[i - 1]

    def point_weight(self, pid: str) -> Fraction:
        return sum((self.weight(i) for i in self.point(pid).markings), Fraction(0))

    def vertex_weight(self, vid: str) -> Fraction:
        return sum((self.point_weight(p.id) for p in self.points_at(vid)), Fraction(0))

    def to_networkx(self, node_index: Optional[Dict[str, int]] = None) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        for v in self.vertices:
            marks = frozenset(p.markings for p in self.points_at(v.id))
            graph.add_node(v.id, genus=v.genus, marks=marks)
        for e in self.edges:
            index = node_index.get(e.id, 1) if node_index else 1
            graph.add_edge(e.u, e.v, key=e.id, index=index)
        return graph

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        return nx.is_connected(self.to_networkx())

    def describe(self) -> str:
        lines = [f"genus {genus(self)}, {len(self.vertices)} components, "
                 f"{len(self.edges)} nodes, {self.n} markings"]
        for v in self.vertices:
            marks = ", ".join("{" + ",".join(map(str, p.markings)) + "}" for p in self.points_at(v.id))
            lines.append(f"  {v.id}: genus {v.genus}, valence {self.valence(v.id)}"
                         + (f", points {marks}" if marks else ""))
        return "\n".join(lines)


def genus(g: MarkedDualGraph) -> int:
    """Σ g_v + |E| − |V| + 1 for a connected dual graph."""
    return sum(v.genus for v in g.vertices) + len(g.edges) - len(g.vertices) + 1


# ==========================================
# STRUCTURES AND DECORATIONS
# ==========================================

@dataclass(frozen=True)
class GltStructure:
    """Node indices d_e ≥ 1 and admissible stalks at the marked points."""
    node_index: Dict[str, int] = field(default_factory=dict)
    stalks: StalkAssignment = field(default_factory=StalkAssignment)

    @classmethod
    def untwisted(cls, g: MarkedDualGraph) -> "GltStructure":
        stalks = {p.id: Stalk(p.markings, AdmissibleMonoid.free(len(p.markings))) for p in g.points}
        return cls({e.id: 1 for e in g.edges}, StalkAssignment(stalks))

    def index(self, eid: str) -> int:
        if eid not in self.node_index:
            raise UnknownIdError(f"no node index for edge {eid!r}")
        return self.node_index[eid]

    def stalk(self, pid: str) -> Stalk:
        stalk = self.stalks.get(pid)
        if stalk is None:
            raise UnknownIdError(f"no stalk for point {pid!r}")
        return stalk


@dataclass(frozen=True)
class MapDecoration:
    """Per vertex: whether the map sends the component to a point."""
    contracted: Dict[str, bool] = field(default_factory=dict)

    @classmethod
    def all_contracted(cls, g: MarkedDualGraph) -> "MapDecoration":
        return cls({v.id: True for v in g.vertices})

    def is_contracted(self, vid: str) -> bool:
        return bool(self.contracted.get(vid, False))

    def restricted_to(self, g: MarkedDualGraph) -> "MapDecoration":
        return MapDecoration({v.id: self.is_contracted(v.id) for v in g.vertices})


# ==========================================
# VALIDATION
# ==========================================

@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> List[str]:
        return [v.code for v in self.violations]


def _graph_violations(g: MarkedDualGraph) -> List[Violation]:
    found: List[Violation] = []
    vertex_ids = [v.id for v in g.vertices]
    edge_ids = [e.id for e in g.edges]
    for kind, ids in (("vertex", vertex_ids), ("edge", edge_ids), ("point", [p.id for p in g.points])):
        dupes = sorted({x for x in ids if ids.count(x) > 1})
        for x in dupes:
            found.append(Violation("duplicate-id", f"{kind}s.{x}", f"{kind} id {x} used twice"))
    if not g.vertices:
        found.append(Violation("empty", "vertices", "graph has no components"))
    for v in g.vertices:
        if v.genus < 0:
            found.append(Violation("genus", f"vertices.{v.id}", f"negative genus {v.genus}"))
    for e in g.edges:
        for end in (e.u, e.v):
            if end not in vertex_ids:
                found.append(Violation("unknown-vertex", f"edges.{e.id}", f"endpoint {end} is not a vertex"))
    if g.vertices and all(end in vertex_ids for e in g.edges for end in (e.u, e.v)) and not g.is_connected():
        found.append(Violation("disconnected", "vertices", "dual graph is not connected"))

    seen: Dict[int, str] = {}
    for p in g.points:
        if p.host in edge_ids and p.host not in vertex_ids:
            found.append(Violation("marking-on-node", f"points.{p.id}",
                                   f"point sits on node {p.host}; markings must be smooth points"))
        elif p.host not in vertex_ids:
            found.append(Violation("unknown-host", f"points.{p.id}", f"host {p.host} is not a vertex"))
        for i in p.markings:
            if not 1 <= i <= g.n:
                found.append(Violation("marking-range", f"points.{p.id}", f"marking {i} outside 1..{g.n}"))
            elif i in seen:
                found.append(Violation("duplicate-marking", f"points.{p.id}",
                                       f"marking {i} also carried by {seen[i]}"))
            else:
                seen[i] = p.id
    for i in range(1, g.n + 1):
        if i not in seen:
            found.append(Violation("missing-marking", "points", f"marking {i} is carried by no point"))

    if g.weights is not None:
        if len(g.weights) != g.n:
            found.append(Violation("weights", "weights", f"{len(g.weights)} weights for {g.n} markings"))
        else:
            for i, w in enumerate(g.weights, start=1):
                if not 0 < w <= 1:
                    found.append(Violation("weight-range", f"weights.{i}",
                                           f"weight {format_rational(w)} outside (0, 1]"))
            for p in g.points:
                if all(1 <= i <= g.n for i in p.markings):
                    total = g.point_weight(p.id)
                    if total > 1:
                        found.append(Violation("weight-overflow", f"points.{p.id}",
                                               f"weights at the point sum to {format_rational(total)} > 1"))
    return found


def validate_graph(g: MarkedDualGraph) -> ValidationReport:
    return ValidationReport(tuple(_graph_violations(g)))


def validate_glt(g: MarkedDualGraph, glt: GltStructure) -> ValidationReport:
    """Every type invariant of the graph and of the structure on it."""
    found = _graph_violations(g)
    edge_ids = set(g.edge_ids())
    for eid in sorted(edge_ids):
        if eid not in glt.node_index:
            found.append(Violation("missing-node-index", f"node_index.{eid}", "node has no index"))
        elif not isinstance(glt.node_index[eid], int) or glt.node_index[eid] < 1:
            found.append(Violation("node-index", f"node_index.{eid}",
                                   f"index {glt.node_index[eid]!r} is not a positive integer"))
    for eid in sorted(set(glt.node_index) - edge_ids):
        found.append(Violation("unknown-edge-index", f"node_index.{eid}", "index given for an unknown node"))
    point_ids = set(g.point_ids())
    for p in g.points:
        stalk = glt.stalks.get(p.id)
        if stalk is None:
            found.append(Violation("stalk-missing", f"stalks.{p.id}", "marked point has no stalk"))
        elif stalk.markings != p.markings:
            found.append(Violation("stalk-markings", f"stalks.{p.id}",
                                   f"stalk markings {stalk.markings} differ from point markings {p.markings}"))
    for pid in sorted(set(glt.stalks.point_ids()) - point_ids):
        found.append(Violation("unknown-point", f"stalks.{pid}", "stalk given for an unknown point"))
    return ValidationReport(tuple(found))


# ==========================================
# STABILITY
# ==========================================

@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    violators: Tuple[str, ...]
    numerics_ok: bool


def stability_numerics(g: MarkedDualGraph) -> Fraction:
    """2g − 2 + Σ a_i."""
    if g.weights is None:
        raise MissingWeightsError("graph has no marking weights")
    return 2 * genus(g) - 2 + sum(g.weights, Fraction(0))


def is_unstable_vertex(g: MarkedDualGraph, vid: str) -> bool:
    v = g.vertex(vid)
    return v.genus == 0 and g.valence(vid) + g.vertex_weight(vid) <= 2


def is_stable(g: MarkedDualGraph, decoration: MapDecoration) -> StabilityReport:
    """A contracted genus-0 vertex with branches + weight ≤ 2 is a violator."""
    if g.weights is None:
        raise MissingWeightsError("stability needs marking weights")
    violators = tuple(v.id for v in g.vertices
                      if decoration.is_contracted(v.id) and is_unstable_vertex(g, v.id))
    return StabilityReport(not violators, violators, stability_numerics(g) > 0)


# ==========================================
# STABILIZERS AND CHARTS
# ==========================================

def point_stabilizer(g: MarkedDualGraph, glt: GltStructure, pid: str) -> FiniteAbelianGroup:
    g.point(pid)
    return stabilizer_group(glt.stalk(pid).monoid)


def edge_stabilizer(g: MarkedDualGraph, glt: GltStructure, eid: str) -> FiniteAbelianGroup:
    g.edge(eid)
    return FiniteAbelianGroup.cyclic(glt.index(eid))


@dataclass(frozen=True)
class LocalChart:
    """Presentation data of the stack chart at a marked point or a node."""
    kind: str
    id: str
    group: FiniteAbelianGroup
    markings: Tuple[int, ...] = ()
    monoid: Optional[AdmissibleMonoid] = None
    node_order: int = 1
    node_weights: Tuple[int, int] = (1, 0)

    @property
    def trivial(self) -> bool:
        return self.group.is_trivial()

    def describe(self) -> str:
        if self.kind == "point":
            return (f"point {self.id}: markings {list(self.markings)}, "
                    f"monoid {self.monoid.describe()}, group N^gp/Z^I = {self.group}")
        if self.node_order == 1:
            return f"node {self.id}: untwisted node xy = t"
        return (f"node {self.id}: [xy = t / mu_{self.node_order}] "
                f"with weights {self.node_weights}, group {self.group}")


def local_chart(g: MarkedDualGraph, glt: GltStructure, ident: str) -> LocalChart:
    """Chart data at a marked point, or at a node when ident is an edge id."""
    if ident in g.point_ids():
        stalk = glt.stalk(ident)
        return LocalChart("point", ident, stabilizer_group(stalk.monoid), stalk.markings, stalk.monoid)
    if ident in g.edge_ids():
        d = glt.index(ident)
        return LocalChart("node", ident, FiniteAbelianGroup.cyclic(d), node_order=d,
                          node_weights=(1, d - 1) if d > 1 else (1, 0))
    raise UnknownIdError(f"{ident!r} is neither a marked point nor a node")


# ==========================================
# ISOMORPHISM
# ==========================================

@dataclass(frozen=True)
class Isomorphism:
    vertex_map: Dict[str, str]
    edge_map: Dict[str, str]
    point_map: Dict[str, str]


def is_isomorphic(a: MarkedDualGraph, glt_a: Optional[GltStructure],
                  b: MarkedDualGraph, glt_b: Optional[GltStructure]) -> Optional[Isomorphism]:
    """
    Label-preserving isomorphism of decorated dual graphs, or None.

    Marking labels are fixed, so points correspond by marking set; node
    indices and stalks must agree under the correspondence.
    """
    if a.n != b.n or a.weights != b.weights:
        return None
    if len(a.vertices) != len(b.vertices) or len(a.edges) != len(b.edges):
        return None
    points_a = {p.markings: p for p in a.points}
    points_b = {p.markings: p for p in b.points}
    if set(points_a) != set(points_b):
        return None
    if glt_a is not None and glt_b is not None:
        for marks, p in points_a.items():
            if glt_a.stalk(p.id).monoid != glt_b.stalk(points_b[marks].id).monoid:
                return None

    ga = a.to_networkx(glt_a.node_index if glt_a else None)
    gb = b.to_networkx(glt_b.node_index if glt_b else None)

    def node_match(x, y):
        return x["genus"] == y["genus"] and x["marks"] == y["marks"]

    def edge_match(x, y):
        return sorted(d["index"] for d in x.values()) == sorted(d["index"] for d in y.values())

    matcher = MultiGraphMatcher(ga, gb, node_match=node_match, edge_match=edge_match)
    mapping = next(matcher.isomorphisms_iter(), None)
    if mapping is None:
        return None

    def index_of(glt, eid):
        return glt.node_index.get(eid, 1) if glt else 1

    edge_map: Dict[str, str] = {}
    for e in a.edges:
        if e.id in edge_map:
            continue
        ends = {e.u, e.v}
        group_a = sorted((x for x in a.edges if {x.u, x.v} == ends), key=lambda x: (index_of(glt_a, x.id), x.id))
        image_ends = {mapping[e.u], mapping[e.v]}
        group_b = sorted((x for x in b.edges if {x.u, x.v} == image_ends),
                         key=lambda x: (index_of(glt_b, x.id), x.id))
        for x, y in zip(group_a, group_b):
            edge_map[x.id] = y.id
    point_map = {p.id: points_b[marks].id for marks, p in points_a.items()}
    logger.debug("isomorphism found: %s", mapping)
    return Isomorphism(dict(sorted(mapping.items())), dict(sorted(edge_map.items())),
                       dict(sorted(point_map.items())))


def relabel(g: MarkedDualGraph, glt: Optional[GltStructure], vertex_names: Dict[str, str],
            edge_names: Dict[str, str], point_names: Dict[str, str]):
    """Copy of (g, glt) with every id renamed; marking labels stay."""
    vertices = [Vertex(vertex_names[v.id], v.genus) for v in g.vertices]
    edges = [Edge(edge_names[e.id], vertex_names[e.u], vertex_names[e.v]) for e in g.edges]
    points = [MarkedPoint(point_names[p.id], vertex_names[p.host], p.markings) for p in g.points]
    graph = MarkedDualGraph(tuple(vertices), tuple(edges), tuple(points), g.n, g.weights)
    if glt is None:
        return graph, None
    structure = GltStructure(
        {edge_names[e]: d for e, d in glt.node_index.items()},
        StalkAssignment({point_names[p]: s for p, s in glt.stalks.stalks.items()}),
    )
    return graph, structure
