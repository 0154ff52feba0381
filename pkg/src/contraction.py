"""
Contractions of Marked Dual Graphs
==================================

A contraction is given by the set of collapsed vertices. Each connected
collapsed component must be a tree of genus-0 components attached to the
rest of the curve at one node (it becomes a smooth point carrying all of
its markings) or at two nodes (it becomes a single node, and it may not
carry markings).

Target ids are determined by the source alone:

- a surviving vertex, edge or point keeps its id;
- the node replacing a two-attachment component takes the smallest id
  among the source edges on the path it replaces;
- the point replacing a one-attachment component takes the smallest id
  among the points it absorbs.

With these rules, contracting in steps gives the same target as
contracting all at once.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Tuple

import networkx as nx

from curve_graph import (
    Edge,
    MapDecoration,
    MarkedDualGraph,
    MarkedPoint,
    MissingWeightsError,
    is_stable,
    stability_numerics,
    validate_graph,
)
from exact_lattice import format_rational

logger = logging.getLogger(__name__)


class ContractionError(ValueError):
    """Base error for contraction computations."""


class InvalidPlanError(ContractionError):
    """The collapsed vertex set does not describe a contraction."""


class WeightOverflowError(InvalidPlanError):
    """Markings merged into one point would carry weight above 1."""


class InfeasibleMergeError(ContractionError):
    """Stabilization was forced into a merge that breaks prestability."""


class PlanMismatchError(ContractionError):
    """A plan does not carry the given source onto the given target."""


class Step(NamedTuple):
    """One edge crossed while walking from ``start`` to ``end``."""
    edge: str
    start: str
    end: str


@dataclass(frozen=True)
class CollapsedComponent:
    vertices: Tuple[str, ...]
    internal_edges: Tuple[str, ...]
    attachments: Tuple[str, ...]
    outside: Tuple[str, ...]
    inside: Tuple[str, ...]
    points: Tuple[str, ...]
    markings: Tuple[int, ...]

    @property
    def kind(self) -> str:
        return "tail" if len(self.attachments) == 1 else "bridge"


@dataclass(frozen=True)
class ContractionPlan:
    source: MarkedDualGraph
    collapsed: FrozenSet[str]
    components: Tuple[CollapsedComponent, ...] = ()

    @property
    def is_identity(self) -> bool:
        return not self.collapsed


def make_plan(g: MarkedDualGraph, collapsed: Iterable[str]) -> ContractionPlan:
    """Validate a collapsed vertex set and derive its components."""
    chosen = frozenset(collapsed)
    vertex_ids = set(g.vertex_ids())
    unknown = sorted(chosen - vertex_ids)
    if unknown:
        raise InvalidPlanError(f"unknown collapsed vertices {unknown}")
    if chosen and chosen == vertex_ids:
        raise InvalidPlanError("a contraction cannot collapse every component")

    inner = nx.MultiGraph()
    inner.add_nodes_from(sorted(chosen))
    for e in g.edges:
        if e.u in chosen and e.v in chosen:
            inner.add_edge(e.u, e.v, key=e.id)

    components = []
    for block in nx.connected_components(inner):
        verts = tuple(sorted(block))
        for vid in verts:
            if g.vertex(vid).genus != 0:
                raise InvalidPlanError(f"collapsed component {vid} has positive genus")
        internal = tuple(sorted(e.id for e in g.edges if e.u in block and e.v in block))
        if len(internal) != len(verts) - 1:
            raise InvalidPlanError(f"collapsed vertices {list(verts)} do not form a tree")
        attaching = sorted((e for e in g.edges if (e.u in block) != (e.v in block)), key=lambda e: e.id)
        if len(attaching) not in (1, 2):
            raise InvalidPlanError(
                f"collapsed vertices {list(verts)} meet the rest of the curve at {len(attaching)} nodes"
            )
        points = tuple(sorted(p.id for p in g.points if p.host in block))
        markings = tuple(sorted(i for p in g.points if p.host in block for i in p.markings))
        if len(attaching) == 2 and markings:
            raise InvalidPlanError(f"collapsed bridge {list(verts)} carries markings {list(markings)}")
        outside = tuple(e.v if e.u in block else e.u for e in attaching)
        inside = tuple(e.u if e.u in block else e.v for e in attaching)
        components.append(CollapsedComponent(verts, internal, tuple(e.id for e in attaching),
                                             outside, inside, points, markings))
    components.sort(key=lambda c: c.vertices[0])
    return ContractionPlan(g, chosen, tuple(components))


def identity_plan(g: MarkedDualGraph) -> ContractionPlan:
    return make_plan(g, [])


def _tree_walk(g: MarkedDualGraph, comp: CollapsedComponent, start: str, goal: str) -> List[Step]:
    tree = nx.Graph()
    tree.add_nodes_from(comp.vertices)
    for eid in comp.internal_edges:
        e = g.edge(eid)
        tree.add_edge(e.u, e.v, id=eid)
    path = nx.shortest_path(tree, start, goal)
    return [Step(tree.edges[a, b]["id"], a, b) for a, b in zip(path, path[1:])]


# ==========================================
# CONTRACTION
# ==========================================

@dataclass(frozen=True)
class ContractionResult:
    """
    Target graph plus the correspondences of a contraction.

    edge_walks[t] walks the source edges replaced by target edge t from its
    end 0 to its end 1; marking_walks[i] walks from the target host of
    marking i to the source vertex carrying it (empty when the point
    survives).
    """
    plan: ContractionPlan
    target: MarkedDualGraph
    edge_map: Dict[str, Tuple[str, ...]]
    point_map: Dict[str, Tuple[str, ...]]
    vertex_map: Dict[str, str]
    edge_walks: Dict[str, Tuple[Step, ...]] = field(repr=False, default_factory=dict)
    marking_walks: Dict[int, Tuple[Step, ...]] = field(repr=False, default_factory=dict)

    @property
    def source(self) -> MarkedDualGraph:
        return self.plan.source


def contract(g: MarkedDualGraph, plan: ContractionPlan) -> ContractionResult:
    """Collapse every component of the plan; genus is preserved."""
    if plan.source != g:
        raise PlanMismatchError("plan was built for a different graph")
    chosen = plan.collapsed
    vertices = [v for v in g.vertices if v.id not in chosen]
    edges: List[Edge] = []
    edge_walks: Dict[str, Tuple[Step, ...]] = {}
    for e in g.edges:
        if e.u not in chosen and e.v not in chosen:
            edges.append(e)
            edge_walks[e.id] = (Step(e.id, e.u, e.v),)
    points: List[MarkedPoint] = []
    point_map: Dict[str, Tuple[str, ...]] = {}
    marking_walks: Dict[int, Tuple[Step, ...]] = {}
    for p in g.points:
        if p.host not in chosen:
            points.append(p)
            point_map[p.id] = (p.id,)
            for i in p.markings:
                marking_walks[i] = ()

    for comp in plan.components:
        if comp.kind == "bridge":
            first, second = comp.attachments
            start, goal = comp.outside
            if start > goal:
                first, second = second, first
                start, goal = goal, start
            inner_start = comp.inside[comp.attachments.index(first)]
            inner_goal = comp.inside[comp.attachments.index(second)]
            walk = ([Step(first, start, inner_start)]
                    + _tree_walk(g, comp, inner_start, inner_goal)
                    + [Step(second, inner_goal, goal)])
            new_id = min(step.edge for step in walk)
            edges.append(Edge(new_id, start, goal))
            edge_walks[new_id] = tuple(walk)
            continue
        if not comp.points:
            continue
        (attachment,), (host,), (inner,) = comp.attachments, comp.outside, comp.inside
        merged = MarkedPoint(min(comp.points), host, comp.markings)
        if g.weights is not None:
            total = sum((g.weight(i) for i in comp.markings), Fraction(0))
            if total > 1:
                raise WeightOverflowError(
                    f"markings {list(comp.markings)} merge into one point of weight {format_rational(total)}"
                )
        points.append(merged)
        point_map[merged.id] = comp.points
        for pid in comp.points:
            p = g.point(pid)
            walk = [Step(attachment, host, inner)] + _tree_walk(g, comp, inner, p.host)
            for i in p.markings:
                marking_walks[i] = tuple(walk)

    target = MarkedDualGraph(tuple(vertices), tuple(edges), tuple(points), g.n, g.weights)
    edge_map = {t: tuple(sorted(step.edge for step in walk)) for t, walk in sorted(edge_walks.items())}
    logger.debug("contracted %d components: %d -> %d vertices",
                 len(plan.components), len(g.vertices), len(target.vertices))
    return ContractionResult(
        plan=plan,
        target=target,
        edge_map=edge_map,
        point_map=dict(sorted(point_map.items())),
        vertex_map={v.id: v.id for v in vertices},
        edge_walks=dict(sorted(edge_walks.items())),
        marking_walks=dict(sorted(marking_walks.items())),
    )


def greedy_factorization(g: MarkedDualGraph, plan: ContractionPlan) -> List[ContractionResult]:
    """
    Rounds that contract every current rational tail inside the collapsed
    locus, then one final round of rational bridges.
    """
    if plan.source != g:
        raise PlanMismatchError("plan was built for a different graph")
    current = g
    remaining = set(plan.collapsed)
    steps: List[ContractionResult] = []
    while remaining:
        tails = sorted(v for v in remaining if current.valence(v) == 1)
        step_plan = make_plan(current, tails if tails else remaining)
        if not tails and any(c.kind != "bridge" for c in step_plan.components):
            raise InvalidPlanError("collapsed locus reduces to something other than bridges")
        result = contract(current, step_plan)
        steps.append(result)
        remaining -= set(step_plan.collapsed)
        current = result.target
    return steps


# ==========================================
# STABILIZATION
# ==========================================

@dataclass(frozen=True)
class StabilizationResult:
    plan: ContractionPlan
    target: MarkedDualGraph
    decoration: MapDecoration
    order: Tuple[str, ...]


def stabilize(g: MarkedDualGraph, decoration: MapDecoration, rng=None) -> StabilizationResult:
    """
    Contract violating vertices one at a time until the map is stable.

    With an ``rng`` the next violator is drawn at random instead of taking
    the smallest id; the outcome is the same either way.
    """
    if g.weights is None:
        raise MissingWeightsError("stabilization needs marking weights")
    report = validate_graph(g)
    if not report.ok:
        raise InvalidPlanError(f"input is not prestable: {', '.join(report.codes())}")
    if stability_numerics(g) <= 0:
        raise ContractionError("2g - 2 + sum of weights must be positive")

    current = g
    deco = decoration.restricted_to(g)
    order: List[str] = []
    while True:
        status = is_stable(current, deco)
        if status.stable:
            break
        violators = list(status.violators)
        pick = violators[0] if rng is None else violators[int(rng.integers(len(violators)))]
        try:
            step = contract(current, make_plan(current, [pick]))
        except WeightOverflowError as exc:
            raise InfeasibleMergeError(str(exc)) from exc
        order.append(pick)
        current = step.target
        deco = deco.restricted_to(current)

    plan = make_plan(g, order)
    if contract(g, plan).target != current:
        raise ContractionError("stepwise stabilization disagrees with the combined contraction")
    logger.info("stabilized by collapsing %s", order)
    return StabilizationResult(plan, current, deco, tuple(order))
