"""
JSON Documents
==============

Reading and writing the document format used by the command line.

A document is either a single section object or ``{"sections": [...]}``.
Every section has a ``kind``:

    monoid         {"rank": 2, "generators": [["1/2", "1/2"]]}
    local-monoid   {"invariant_factors": [4], "carry": [0, 1, 1, 2, 1, 0]}
    submonoid      {"torsion": [2], "generators": [[1, 0], [1, 1]],
                    "designated": [2, 1],
                    "grading": {"invariant_factors": [4], "images": [[1], [2]]}}
    graph          {"vertices": [{"id": "A", "genus": 0}],
                    "edges": [{"id": "e", "ends": ["A", "B"]}],
                    "points": [{"id": "s", "host": "A", "markings": [1]}],
                    "markings": 1, "weights": ["1/2"]}
    glt            {"node_index": {"e": 2},
                    "stalks": {"s": {"markings": [1], "generators": [["1/2"]]}}}
    plan           {"collapsed": ["P"]}
    decoration     {"contracted": ["P"]}
    coarse         {"surviving": {"s": [["1/2"]]}, "divisors": {"e": 1}}
    result         free-form output of a command, with an "operation" key

Rationals are strings "p/q" in lowest terms (integers may be plain
numbers on input). Output sections may carry extra informational keys;
readers ignore keys they do not know.
"""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from admissible import AdmissibleMonoid, Stalk, StalkAssignment
from curve_graph import Edge, GltStructure, MapDecoration, MarkedDualGraph, MarkedPoint, Vertex
from exact_lattice import FiniteAbelianGroup, LatticeError, format_rational, parse_rational
from local_monoid import LocalMonoid, LocalMonoidError, SubmonoidPresentation

logger = logging.getLogger(__name__)


class DocumentError(ValueError):
    """Schema or syntax problem, located by a JSON path and, if known, a line."""

    def __init__(self, message: str, path: str = "$", line: Optional[int] = None):
        self.message = message
        self.path = path
        self.line = line
        where = f"{path} (line {line})" if line is not None else path
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class PlanSpec:
    collapsed: Tuple[str, ...]


@dataclass(frozen=True)
class CoarseSpec:
    surviving: Dict[str, Tuple[Tuple[Fraction, ...], ...]] = field(default_factory=dict)
    divisors: Dict[str, int] = field(default_factory=dict)


# ==========================================
# FIELD HELPERS
# ==========================================

def _field(obj: Dict, key: str, path: str, kind=None, default=...):
    if key not in obj:
        if default is not ...:
            return default
        raise DocumentError(f"missing field {key!r}", path)
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise DocumentError(f"expected {getattr(kind, '__name__', kind)}", f"{path}.{key}")
    return value


def _int(value, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise DocumentError("expected an integer", path)
    if minimum is not None and value < minimum:
        raise DocumentError(f"expected an integer >= {minimum}", path)
    return value


def _rational(value, path: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise DocumentError("expected a rational \"p/q\"", path)
    try:
        return parse_rational(value)
    except LatticeError as exc:
        raise DocumentError(str(exc), path) from exc


def _rational_rows(value, path: str, width: Optional[int] = None) -> List[Tuple[Fraction, ...]]:
    if not isinstance(value, list):
        raise DocumentError("expected a list of vectors", path)
    rows = []
    for k, row in enumerate(value):
        if not isinstance(row, list):
            raise DocumentError("expected a vector", f"{path}[{k}]")
        if width is not None and len(row) != width:
            raise DocumentError(f"expected {width} entries", f"{path}[{k}]")
        rows.append(tuple(_rational(x, f"{path}[{k}][{j}]") for j, x in enumerate(row)))
    return rows


def _int_list(value, path: str, minimum: Optional[int] = None) -> List[int]:
    if not isinstance(value, list):
        raise DocumentError("expected a list of integers", path)
    return [_int(x, f"{path}[{k}]", minimum) for k, x in enumerate(value)]


def _str_list(value, path: str) -> List[str]:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise DocumentError("expected a list of strings", path)
    return list(value)


def _group(factors: List[int], path: str) -> FiniteAbelianGroup:
    try:
        return FiniteAbelianGroup(tuple(factors))
    except LatticeError as exc:
        raise DocumentError(str(exc), path) from exc


def rational_list(values: Sequence[Fraction]) -> List[str]:
    return [format_rational(Fraction(q)) for q in values]


# ==========================================
# SECTIONS
# ==========================================

def parse_monoid(obj: Dict, path: str = "$") -> AdmissibleMonoid:
    rank = _int(_field(obj, "rank", path), f"{path}.rank", 0)
    gens = _rational_rows(_field(obj, "generators", path, default=[]), f"{path}.generators", rank)
    for k, g in enumerate(gens):
        if any(q < 0 for q in g):
            raise DocumentError("monoid generators must be nonnegative", f"{path}.generators[{k}]")
    return AdmissibleMonoid.generated_by(rank, gens)


def monoid_to_json(m: AdmissibleMonoid) -> Dict[str, Any]:
    return {"kind": "monoid", "rank": m.n, "generators": [rational_list(g) for g in m.generators()],
            "description": m.describe()}


def parse_local_monoid(obj: Dict, path: str = "$") -> LocalMonoid:
    X = _group(_int_list(_field(obj, "invariant_factors", path, default=[]), f"{path}.invariant_factors"),
               f"{path}.invariant_factors")
    values = _int_list(_field(obj, "carry", path, default=[]), f"{path}.carry")
    try:
        return LocalMonoid.from_upper_values(X, values)
    except LocalMonoidError as exc:
        raise DocumentError(str(exc), f"{path}.carry") from exc


def local_monoid_to_json(d: LocalMonoid) -> Dict[str, Any]:
    return {"kind": "local-monoid", "invariant_factors": list(d.X.invariant_factors),
            "carry": list(d.upper_values())}


def parse_submonoid(obj: Dict, path: str = "$") -> SubmonoidPresentation:
    torsion = _int_list(_field(obj, "torsion", path, default=[]), f"{path}.torsion", 1)
    width = 1 + len(torsion)
    gens = []
    for k, g in enumerate(_field(obj, "generators", path, list)):
        row = _int_list(g, f"{path}.generators[{k}]")
        if len(row) != width:
            raise DocumentError(f"expected {width} entries", f"{path}.generators[{k}]")
        gens.append(tuple(row))
    designated = _int_list(_field(obj, "designated", path), f"{path}.designated")
    if len(designated) != width:
        raise DocumentError(f"expected {width} entries", f"{path}.designated")
    grading = _field(obj, "grading", path, dict)
    X = _group(_int_list(_field(grading, "invariant_factors", f"{path}.grading", default=[]),
                         f"{path}.grading.invariant_factors"), f"{path}.grading.invariant_factors")
    images = []
    for k, img in enumerate(_field(grading, "images", f"{path}.grading", list)):
        row = _int_list(img, f"{path}.grading.images[{k}]")
        if len(row) != X.num_generators:
            raise DocumentError(f"expected {X.num_generators} entries", f"{path}.grading.images[{k}]")
        images.append(X.normalize(row))
    return SubmonoidPresentation(tuple(torsion), tuple(gens), tuple(designated), X, tuple(images))


def submonoid_to_json(s: SubmonoidPresentation) -> Dict[str, Any]:
    return {"kind": "submonoid", "torsion": list(s.torsion), "generators": [list(g) for g in s.generators],
            "designated": list(s.designated),
            "grading": {"invariant_factors": list(s.grading_group.invariant_factors),
                        "images": [list(img) for img in s.grading_images]}}


def parse_graph(obj: Dict, path: str = "$") -> MarkedDualGraph:
    vertices = []
    for k, v in enumerate(_field(obj, "vertices", path, list)):
        p = f"{path}.vertices[{k}]"
        if not isinstance(v, dict):
            raise DocumentError("expected an object", p)
        vertices.append(Vertex(_field(v, "id", p, str), _int(_field(v, "genus", p, default=0), f"{p}.genus")))
    edges = []
    for k, e in enumerate(_field(obj, "edges", path, list, default=[])):
        p = f"{path}.edges[{k}]"
        if not isinstance(e, dict):
            raise DocumentError("expected an object", p)
        ends = _str_list(_field(e, "ends", p), f"{p}.ends")
        if len(ends) != 2:
            raise DocumentError("a node has exactly two ends", f"{p}.ends")
        edges.append(Edge(_field(e, "id", p, str), ends[0], ends[1]))
    points = []
    for k, q in enumerate(_field(obj, "points", path, list, default=[])):
        p = f"{path}.points[{k}]"
        if not isinstance(q, dict):
            raise DocumentError("expected an object", p)
        points.append(MarkedPoint(_field(q, "id", p, str), _field(q, "host", p, str),
                                  tuple(_int_list(_field(q, "markings", p), f"{p}.markings"))))
    n = _int(_field(obj, "markings", path, default=0), f"{path}.markings", 0)
    raw_weights = _field(obj, "weights", path, list, default=None)
    weights = None
    if raw_weights is not None:
        weights = tuple(_rational(w, f"{path}.weights[{k}]") for k, w in enumerate(raw_weights))
    return MarkedDualGraph(tuple(vertices), tuple(edges), tuple(points), n, weights)


def graph_to_json(g: MarkedDualGraph) -> Dict[str, Any]:
    out = {
        "kind": "graph",
        "vertices": [{"id": v.id, "genus": v.genus} for v in g.vertices],
        "edges": [{"id": e.id, "ends": [e.u, e.v]} for e in g.edges],
        "points": [{"id": p.id, "host": p.host, "markings": list(p.markings)} for p in g.points],
        "markings": g.n,
    }
    if g.weights is not None:
        out["weights"] = rational_list(g.weights)
    return out


def parse_glt(obj: Dict, path: str = "$") -> GltStructure:
    raw_index = _field(obj, "node_index", path, dict, default={})
    node_index = {eid: _int(d, f"{path}.node_index.{eid}", 1) for eid, d in sorted(raw_index.items())}
    stalks = {}
    for pid, s in sorted(_field(obj, "stalks", path, dict, default={}).items()):
        p = f"{path}.stalks.{pid}"
        if not isinstance(s, dict):
            raise DocumentError("expected an object", p)
        markings = _int_list(_field(s, "markings", p), f"{p}.markings")
        monoid = parse_monoid({"rank": len(markings), "generators": _field(s, "generators", p, default=[])}, p)
        stalks[pid] = Stalk(tuple(markings), monoid)
    return GltStructure(node_index, StalkAssignment(stalks))


def glt_to_json(glt: GltStructure) -> Dict[str, Any]:
    return {
        "kind": "glt",
        "node_index": dict(sorted(glt.node_index.items())),
        "stalks": {pid: {"markings": list(s.markings),
                         "generators": [rational_list(g) for g in s.monoid.generators()],
                         "description": s.monoid.describe()}
                   for pid, s in glt.stalks.items()},
    }


def parse_plan(obj: Dict, path: str = "$") -> PlanSpec:
    return PlanSpec(tuple(sorted(_str_list(_field(obj, "collapsed", path, default=[]), f"{path}.collapsed"))))


def plan_to_json(collapsed: Sequence[str]) -> Dict[str, Any]:
    return {"kind": "plan", "collapsed": sorted(collapsed)}


def parse_decoration(obj: Dict, path: str = "$") -> MapDecoration:
    contracted = _str_list(_field(obj, "contracted", path, default=[]), f"{path}.contracted")
    return MapDecoration({vid: True for vid in sorted(contracted)})


def decoration_to_json(d: MapDecoration) -> Dict[str, Any]:
    return {"kind": "decoration", "contracted": sorted(v for v, flag in d.contracted.items() if flag)}


def parse_coarse(obj: Dict, path: str = "$") -> CoarseSpec:
    surviving = {pid: tuple(_rational_rows(rows, f"{path}.surviving.{pid}"))
                 for pid, rows in sorted(_field(obj, "surviving", path, dict, default={}).items())}
    divisors = {eid: _int(d, f"{path}.divisors.{eid}", 1)
                for eid, d in sorted(_field(obj, "divisors", path, dict, default={}).items())}
    return CoarseSpec(surviving, divisors)


def coarse_to_json(c: CoarseSpec) -> Dict[str, Any]:
    return {"kind": "coarse",
            "surviving": {pid: [rational_list(v) for v in rows] for pid, rows in c.surviving.items()},
            "divisors": dict(c.divisors)}


def parse_result(obj: Dict, path: str = "$") -> Dict[str, Any]:
    """Command results are kept as plain JSON objects."""
    return dict(obj)


PARSERS = {
    "monoid": parse_monoid,
    "local-monoid": parse_local_monoid,
    "submonoid": parse_submonoid,
    "graph": parse_graph,
    "glt": parse_glt,
    "plan": parse_plan,
    "decoration": parse_decoration,
    "coarse": parse_coarse,
    "result": parse_result,
}


def section_to_json(value) -> Dict[str, Any]:
    if isinstance(value, AdmissibleMonoid):
        return monoid_to_json(value)
    if isinstance(value, LocalMonoid):
        return local_monoid_to_json(value)
    if isinstance(value, SubmonoidPresentation):
        return submonoid_to_json(value)
    if isinstance(value, MarkedDualGraph):
        return graph_to_json(value)
    if isinstance(value, GltStructure):
        return glt_to_json(value)
    if isinstance(value, PlanSpec):
        return plan_to_json(value.collapsed)
    if isinstance(value, MapDecoration):
        return decoration_to_json(value)
    if isinstance(value, CoarseSpec):
        return coarse_to_json(value)
    if isinstance(value, dict) and "kind" in value:
        return value
    raise TypeError(f"no section format for {type(value).__name__}")


# ==========================================
# DOCUMENTS
# ==========================================

@dataclass
class Document:
    """Parsed sections in file order, as (kind, value) pairs."""
    sections: List[Tuple[str, Any]] = field(default_factory=list)

    def all(self, kind: str) -> List[Any]:
        return [value for k, value in self.sections if k == kind]

    def first(self, kind: str, required: bool = True, position: int = 0):
        found = self.all(kind)
        if len(found) <= position:
            if required:
                which = "a" if position == 0 else f"{position + 1} of"
                raise DocumentError(f"document needs {which} {kind!r} section", "$.sections")
            return None
        return found[position]


def load_document(obj: Any) -> Document:
    if isinstance(obj, dict) and "sections" in obj:
        raw = obj["sections"]
        if not isinstance(raw, list):
            raise DocumentError("expected a list", "$.sections")
        paths = [f"$.sections[{k}]" for k in range(len(raw))]
    elif isinstance(obj, dict):
        raw, paths = [obj], ["$"]
    else:
        raise DocumentError("a document is an object", "$")
    doc = Document()
    for section, path in zip(raw, paths):
        if not isinstance(section, dict):
            raise DocumentError("a section is an object", path)
        kind = _field(section, "kind", path, str)
        if kind not in PARSERS:
            raise DocumentError(f"unknown section kind {kind!r}", f"{path}.kind")
        doc.sections.append((kind, PARSERS[kind](section, path)))
    logger.debug("loaded document with sections %s", [k for k, _ in doc.sections])
    return doc


def parse_document(text: str) -> Document:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(exc.msg, "$", exc.lineno) from exc
    return load_document(obj)


def dump_document(sections: Sequence[Any]) -> str:
    """Deterministic text: two-space indent, fixed key order, trailing newline."""
    body = {"sections": [section_to_json(s) for s in sections]}
    return json.dumps(body, indent=2, ensure_ascii=False) + "\n"


def serialize(doc: Document) -> str:
    return dump_document([value for _, value in doc.sections])
