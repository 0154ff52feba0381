"""
Contractions of Generalized Log Twisted Structures
==================================================

Given a contraction q: C → D of the underlying curves and a structure on
C, this module computes the initial structure on D (node indices by gcd,
stalks by the fiber-product formula), checks whether a given structure
on D is compatible, and builds relative coarse structures by shrinking
stabilizers in place.

The initial stalk at a target point y is the group of v ∈ Q^{I_y} with

- v restricted to I_x in the source stalk group, for each source point x
  over y;
- Σ_{i : ν on the path to s_i} v_i ∈ (1/c_ν)·Z, for each collapsed node ν.

It is computed through dual forms. The compatibility check evaluates the
same conditions directly on chart data, which is what the maximality
oracle compares against.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from admissible import AdmissibleGroup, AdmissibleMonoid, RationalVector, Stalk, StalkAssignment, as_rational_vector
from char_maps import CharMaps, char_maps_of, half_edge_values
from contraction import ContractionPlan, ContractionResult, PlanMismatchError, contract, identity_plan
from curve_graph import GltStructure, MarkedDualGraph, validate_glt
from exact_lattice import format_rational, frac_part, lcm

logger = logging.getLogger(__name__)


class GltContractionError(ValueError):
    """Base error for contractions of structures."""


class NotASubgroupError(GltContractionError):
    """A proposed surviving subgroup is not inside the stabilizer character group."""


class NonDivisorError(GltContractionError):
    """A proposed node index does not divide the source index."""


def _require_valid(g: MarkedDualGraph, glt: GltStructure, what: str) -> None:
    report = validate_glt(g, glt)
    if not report.ok:
        raise GltContractionError(f"{what} structure is invalid: {', '.join(report.codes())}")


def _collapsed_sets(result: ContractionResult, markings: Sequence[int]) -> Dict[str, List[int]]:
    """Collapsed node → markings whose path from the target point crosses it."""
    sets: Dict[str, List[int]] = {}
    for i in markings:
        for step in result.marking_walks[i]:
            sets.setdefault(step.edge, []).append(i)
    return dict(sorted(sets.items()))


def _gcd_all(values: Sequence[int]) -> int:
    out = 0
    for v in values:
        out = gcd(out, v)
    return out


# ==========================================
# INITIAL CONTRACTION
# ==========================================

@dataclass(frozen=True)
class InitialContraction:
    result: ContractionResult
    structure: GltStructure
    maps: CharMaps
    check: "GltCheck"

    @property
    def target(self) -> MarkedDualGraph:
        return self.result.target


def initial_stalk_group(result: ContractionResult, glt: GltStructure, point_id: str) -> AdmissibleGroup:
    """The group of the initial stalk at a target point."""
    markings = result.target.point(point_id).markings
    position = {i: k for k, i in enumerate(markings)}
    forms = []
    for pid in result.point_map[point_id]:
        stalk = glt.stalk(pid)
        for f in stalk.monoid.group.dual_forms():
            lifted = [0] * len(markings)
            for value, i in zip(f, stalk.markings):
                lifted[position[i]] = value
            forms.append(lifted)
    for eid, members in _collapsed_sets(result, markings).items():
        c = glt.index(eid)
        lifted = [0] * len(markings)
        for i in members:
            lifted[position[i]] = c
        forms.append(lifted)
    return AdmissibleGroup.from_dual_forms(len(markings), forms)


def initial_contraction(g: MarkedDualGraph, glt: GltStructure, plan: ContractionPlan) -> InitialContraction:
    """
    The initial structure on the contracted curve.

    Node index of a target node: gcd of the source indices along the path
    it replaces. Stalks: the fiber-product formula in the module docstring.
    """
    _require_valid(g, glt, "source")
    result = contract(g, plan)
    node_index = {t: _gcd_all([glt.index(e) for e in path]) for t, path in result.edge_map.items()}
    stalks = {}
    for p in result.target.points:
        group = initial_stalk_group(result, glt, p.id)
        stalks[p.id] = Stalk(p.markings, AdmissibleMonoid(group))
    structure = GltStructure(node_index, StalkAssignment(stalks))
    maps = char_maps_of(result)
    check = check_glt_contraction(result, glt, structure, maps)
    if not check.valid:
        raise GltContractionError("initial structure fails its own compatibility check")
    logger.info("initial contraction: %d nodes, %d points", len(node_index), len(stalks))
    return InitialContraction(result, structure, maps, check)


# ==========================================
# COMPATIBILITY CHECK
# ==========================================

@dataclass(frozen=True)
class GltFailure:
    kind: str
    id: str
    detail: str


@dataclass(frozen=True)
class GltCheck:
    valid: bool
    failures: Tuple[GltFailure, ...] = ()


def point_condition(result: ContractionResult, maps: CharMaps, glt: GltStructure,
                    point_id: str, v: Sequence[Fraction]) -> Optional[str]:
    """
    None when v ∈ Q^{I_y} meets every source condition at the target point,
    otherwise a description of the first failed condition.
    """
    markings = result.target.point(point_id).markings
    values = dict(zip(markings, v))
    for pid in result.point_map[point_id]:
        stalk = glt.stalk(pid)
        restricted = [values[i] for i in stalk.markings]
        if not stalk.monoid.group.contains(restricted):
            shown = ", ".join(format_rational(q) for q in restricted)
            return f"restriction ({shown}) leaves the stalk at {pid}"
    for half, total in sorted(half_edge_values(maps, markings, v).items()):
        c = glt.index(half.edge)
        if (total * c).denominator != 1:
            return f"{format_rational(total)} at {half.label()} is not in (1/{c})Z"
    return None


def check_glt_contraction(result: ContractionResult, source: GltStructure,
                          target: GltStructure, maps: Optional[CharMaps] = None) -> GltCheck:
    maps = maps or char_maps_of(result)
    failures: List[GltFailure] = []
    for t, path in result.edge_map.items():
        shared = _gcd_all([source.index(e) for e in path])
        d = target.index(t)
        if shared % d:
            failures.append(GltFailure("node", t, f"index {d} does not divide {shared}"))
    for p in result.target.points:
        stalk = target.stalk(p.id)
        if stalk.markings != p.markings:
            failures.append(GltFailure("point", p.id, "stalk markings differ from the point"))
            continue
        for gen in stalk.monoid.group.generators():
            reason = point_condition(result, maps, source, p.id, gen)
            if reason:
                failures.append(GltFailure("point", p.id, reason))
                break
    return GltCheck(not failures, tuple(failures))


def is_glt_contraction(g: MarkedDualGraph, source: GltStructure, target_graph: MarkedDualGraph,
                       target: GltStructure, plan: ContractionPlan) -> GltCheck:
    """
    Whether the structures are compatible along the contraction: target
    node indices divide the gcd along their paths, and target stalks lie
    inside what the source allows.
    """
    result = contract(g, plan)
    if result.target != target_graph:
        raise PlanMismatchError("plan does not carry the source graph onto the target graph")
    _require_valid(g, source, "source")
    _require_valid(target_graph, target, "target")
    return check_glt_contraction(result, source, target)


# ==========================================
# RELATIVE COARSE STRUCTURES
# ==========================================

def relative_coarse(g: MarkedDualGraph, glt: GltStructure,
                    surviving: Optional[Dict[str, Sequence[Sequence]]] = None,
                    divisors: Optional[Dict[str, int]] = None) -> GltStructure:
    """
    Keep, at each point, the stalk elements whose class lies in the
    subgroup S_x generated by ``surviving[x]`` (vectors of the stalk group,
    taken mod Z^I), and replace node indices by ``divisors``.

    Points and nodes not mentioned are left unchanged.
    """
    _require_valid(g, glt, "source")
    surviving = surviving or {}
    divisors = divisors or {}
    stalks = {}
    for pid, stalk in glt.stalks.items():
        if pid not in surviving:
            stalks[pid] = stalk
            continue
        group = stalk.monoid.group
        vectors = []
        for raw in surviving[pid]:
            vec = as_rational_vector(raw)
            if len(vec) != group.n or not group.contains(vec):
                shown = ", ".join(format_rational(q) for q in vec)
                raise NotASubgroupError(f"({shown}) is not a class of the stalk group at {pid}")
            vectors.append(vec)
        stalks[pid] = Stalk(stalk.markings, AdmissibleMonoid.generated_by(group.n, [
            tuple(frac_part(q) for q in vec) for vec in vectors]))
    for pid in surviving:
        if pid not in glt.stalks:
            raise NotASubgroupError(f"no stalk at {pid!r}")

    node_index = dict(glt.node_index)
    for eid, divisor in divisors.items():
        if eid not in node_index:
            raise NonDivisorError(f"no node {eid!r}")
        if divisor < 1 or node_index[eid] % divisor:
            raise NonDivisorError(f"{divisor} does not divide the index {node_index[eid]} at {eid}")
        node_index[eid] = divisor

    coarse = GltStructure(node_index, StalkAssignment(stalks))
    check = is_glt_contraction(g, glt, g, coarse, identity_plan(g))
    if not check.valid:
        raise GltContractionError(f"relative coarse structure fails the check: {check.failures[0].detail}")
    return coarse


# ==========================================
# MAXIMALITY ORACLE
# ==========================================

@dataclass(frozen=True)
class OraclePoint:
    point: str
    bound: int
    candidates: int
    mismatches: int
    skipped: bool = False


@dataclass(frozen=True)
class OracleReport:
    points: Tuple[OraclePoint, ...]
    node_mismatches: Tuple[str, ...] = ()
    disagreements: Tuple[Tuple[str, RationalVector, str], ...] = field(default=(), repr=False)

    @property
    def ok(self) -> bool:
        return not self.node_mismatches and all(p.mismatches == 0 for p in self.points)

    @property
    def candidates_checked(self) -> int:
        return sum(p.candidates for p in self.points)


def _largest_common_divisor(values: Sequence[int]) -> int:
    for d in range(min(values), 0, -1):
        if all(v % d == 0 for v in values):
            return d
    return 1


def initial_contraction_oracle(g: MarkedDualGraph, glt: GltStructure, plan: ContractionPlan,
                               max_denominator: int = 64, max_candidates: int = 100000) -> OracleReport:
    """
    Check the initial stalks against the chart conditions class by class.

    Every class u ∈ ((1/B)Z ∩ [0,1))^{I_y} passes the chart conditions
    exactly when it lies in the initial stalk group, so no admissible
    stalk strictly larger than the initial one is compatible. B is the
    lcm of the source exponents and collapsed node indices, and must not
    exceed ``max_denominator``. Node indices are compared against a
    direct search for the largest common divisor.
    """
    initial = initial_contraction(g, glt, plan)
    result, maps = initial.result, initial.maps

    node_mismatches = []
    for t, path in result.edge_map.items():
        expected = _largest_common_divisor([glt.index(e) for e in path])
        if initial.structure.index(t) != expected:
            node_mismatches.append(t)

    rows: List[OraclePoint] = []
    disagreements = []
    for p in result.target.points:
        markings = p.markings
        exponents = [glt.stalk(pid).monoid.group.exponent for pid in result.point_map[p.id]]
        exponents += [glt.index(e) for e in _collapsed_sets(result, markings)]
        bound = lcm(*exponents)
        size = bound ** len(markings)
        if bound > max_denominator or size > max_candidates:
            logger.warning("oracle skips point %s: bound %d, %d candidates", p.id, bound, size)
            rows.append(OraclePoint(p.id, bound, 0, 0, skipped=True))
            continue
        group = initial.structure.stalk(p.id).monoid.group
        mismatches = 0
        for numerators in itertools.product(range(bound), repeat=len(markings)):
            u = tuple(Fraction(k, bound) for k in numerators)
            passes = point_condition(result, maps, glt, p.id, u) is None
            inside = group.contains(u)
            if passes != inside:
                mismatches += 1
                if len(disagreements) < 10:
                    disagreements.append((p.id, u, "passes outside" if passes else "fails inside"))
        rows.append(OraclePoint(p.id, bound, size, mismatches))
    report = OracleReport(tuple(rows), tuple(node_mismatches), tuple(disagreements))
    logger.debug("oracle checked %d candidates, ok=%s", report.candidates_checked, report.ok)
    return report
