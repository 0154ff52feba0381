"""
Command Line
============

    python src/cli.py <command> <action> [--input FILE] [--output FILE] ...

Commands read one JSON document (see documents.py) and write one. Exit
codes: 0 success, 1 negative answer (a decision that came out NO, a
failed check), 2 bad input.

    monoid     contains | equal | contained | quotient | pushout | envelope | stabilizer
    local      validate | from-admissible | decide | build
    curve      validate | genus | stabilizer | chart | isomorphic | stable
    contract   apply | factor | char-maps | check | initial | rel-coarse | picard
    stabilize
    count
    selftest   run the bundled corpus, then a seeded smoke sweep
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from admissible import equal, free_envelope, is_contained, stabilizer_group
from char_maps import char_maps, picard_kernel
from contraction import contract, greedy_factorization, make_plan, stabilize
from curve_graph import (
    GltStructure,
    MapDecoration,
    edge_stabilizer,
    genus,
    is_isomorphic,
    is_stable,
    local_chart,
    point_stabilizer,
    validate_glt,
    validate_graph,
)
from documents import (
    CoarseSpec,
    Document,
    DocumentError,
    PlanSpec,
    dump_document,
    parse_document,
    rational_list,
    serialize,
)
from exact_lattice import FiniteAbelianGroup, parse_rational
from glt_contraction import initial_contraction, initial_contraction_oracle, is_glt_contraction, relative_coarse
from local_monoid import decide_pushout, local_monoid_from_submonoid, pushout_to_local, validate
from property_sweeps import run_all
from settings import REPO_ROOT, configure_logging, load_config
from structure_count import count_structures

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2


@dataclass
class RunResult:
    code: int
    output: str = ""
    error: str = ""
    destination: Optional[str] = None


@dataclass
class Session:
    """What a command handler sees: parsed input, settings and the output sections."""
    config: Dict[str, Any]
    input_text: Optional[str] = None
    sections: List[Any] = field(default_factory=list)
    _document: Optional[Document] = None

    @property
    def document(self) -> Document:
        if self._document is None:
            self._document = parse_document(self.input_text or "")
        return self._document

    def emit(self, *sections) -> None:
        self.sections.extend(sections)


def _result(operation: str, **fields) -> Dict[str, Any]:
    return {"kind": "result", "operation": operation, **fields}


def _group_json(group: FiniteAbelianGroup) -> Dict[str, Any]:
    return {"invariant_factors": list(group.invariant_factors), "order": group.order,
            "description": str(group)}


def _parse_vector(text: str) -> List[Fraction]:
    try:
        return [parse_rational(x.strip()) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise DocumentError(str(exc), "--vector") from exc


def _parse_indices(text: Optional[str]) -> List[int]:
    """1-based comma list → 0-based positions."""
    if text is None:
        raise DocumentError("this action needs --indices", "--indices")
    try:
        indices = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise DocumentError(f"bad index list {text!r}", "--indices") from exc
    if any(i < 1 for i in indices):
        raise DocumentError("indices start at 1", "--indices")
    return [i - 1 for i in indices]


def _require(value, flag: str):
    if value is None:
        raise DocumentError(f"this action needs {flag}", flag)
    return value


def _plan(session: Session, g):
    section: PlanSpec = session.document.first("plan")
    return make_plan(g, section.collapsed)


# ==========================================
# MONOID
# ==========================================

def cmd_monoid(args, session: Session) -> int:
    doc = session.document
    m = doc.first("monoid")
    if args.action == "contains":
        vector = _parse_vector(_require(args.vector, "--vector"))
        inside = m.contains(vector)
        session.emit(_result("contains", vector=rational_list(vector), contains=inside))
        return EXIT_OK if inside else EXIT_NEGATIVE
    if args.action in ("equal", "contained"):
        other = doc.first("monoid", position=1)
        answer = equal(m, other) if args.action == "equal" else is_contained(m, other)
        session.emit(_result(args.action, answer=answer))
        return EXIT_OK if answer else EXIT_NEGATIVE
    if args.action == "quotient":
        indices = _parse_indices(args.indices)
        q = m.quotient(indices)
        session.emit(q, _result("quotient", indices=[i + 1 for i in indices], description=q.describe()))
        return EXIT_OK
    if args.action == "pushout":
        indices = _parse_indices(args.indices)
        po = m.group.pushout_abelian(indices)
        parts = ["Z"] * po.free_rank + [f"Z/{d}" for d in po.torsion.invariant_factors]
        session.emit(_result("pushout", indices=[i + 1 for i in indices], free_rank=po.free_rank,
                             torsion=_group_json(po.torsion), description=" + ".join(parts) or "0"))
        return EXIT_OK
    if args.action == "envelope":
        envelope = free_envelope(m)
        session.emit(envelope.envelope, _result("envelope", orders=list(envelope.orders),
                                                equal=envelope.envelope == m))
        return EXIT_OK
    group = stabilizer_group(m)
    session.emit(_result("stabilizer", group=_group_json(group)))
    return EXIT_OK


# ==========================================
# LOCAL MONOID
# ==========================================

def _decision_json(decision) -> Dict[str, Any]:
    out: Dict[str, Any] = {"representable": decision.representable, "raw_feasible": decision.raw_feasible,
                           "separation_failures": decision.separation_failures}
    if decision.representable:
        out["multiplicities"] = [{"character": chi.describe(), "multiplicity": m}
                                 for chi, m in decision.multiplicities]
        out["labeling"] = [{"element": list(theta), "vector": rational_list(vec)}
                           for theta, vec in sorted(decision.labeling.items())]
        return out
    cert = decision.certificate
    out["certificate"] = {
        "bounds": [{"character": chi, "bound": b} for chi, b in cert.bounds],
        "pruned": [{"assignment": [[chi, m] for chi, m in p.assignment],
                    "pair": [list(p.pair[0]), list(p.pair[1])],
                    "residual": p.residual, "reason": p.reason} for p in cert.pruned],
        "pruned_total": cert.pruned_total,
        "nodes_explored": cert.nodes_explored,
        "truncated": cert.truncated,
    }
    return out


def cmd_local(args, session: Session) -> int:
    doc = session.document
    if args.action == "from-admissible":
        d = pushout_to_local(doc.first("monoid"))
        session.emit(d, _result("from-admissible", quotient=_group_json(d.X)))
        return EXIT_OK
    if args.action == "build":
        presentation = doc.first("submonoid")
        d = local_monoid_from_submonoid(presentation, max_first_coordinate=args.max_denominator)
        session.emit(d)
        return EXIT_OK
    d = doc.first("local-monoid")
    if args.action == "validate":
        report = validate(d)
        session.emit(_result("validate", valid=report.valid, axiom=report.axiom,
                             elements=[list(x) for x in report.elements], detail=report.describe()))
        return EXIT_OK if report.valid else EXIT_NEGATIVE
    decision = decide_pushout(d, session.config["local_monoid"]["certificate_limit"])
    sections = [decision.witness] if decision.representable else []
    session.emit(*sections, _result("decide", **_decision_json(decision)))
    return EXIT_OK if decision.representable else EXIT_NEGATIVE


# ==========================================
# CURVE
# ==========================================

def _violations_json(report) -> List[Dict[str, str]]:
    return [{"code": v.code, "path": v.path, "detail": v.detail} for v in report.violations]


def cmd_curve(args, session: Session) -> int:
    doc = session.document
    g = doc.first("graph")
    if args.action == "validate":
        glt = doc.first("glt", required=False)
        report = validate_glt(g, glt) if glt is not None else validate_graph(g)
        session.emit(_result("validate", valid=report.ok, violations=_violations_json(report)))
        return EXIT_OK if report.ok else EXIT_NEGATIVE
    if args.action == "genus":
        session.emit(_result("genus", genus=genus(g)))
        return EXIT_OK
    if args.action == "stable":
        decoration = doc.first("decoration", required=False) or MapDecoration.all_contracted(g)
        report = is_stable(g, decoration)
        session.emit(_result("stable", stable=report.stable, violators=list(report.violators),
                             numerics_ok=report.numerics_ok))
        return EXIT_OK if report.stable and report.numerics_ok else EXIT_NEGATIVE
    if args.action == "isomorphic":
        other = doc.first("graph", position=1)
        glts = doc.all("glt")
        glt_a, glt_b = (glts[0], glts[1]) if len(glts) >= 2 else (None, None)
        iso = is_isomorphic(g, glt_a, other, glt_b)
        if iso is None:
            session.emit(_result("isomorphic", isomorphic=False))
            return EXIT_NEGATIVE
        session.emit(_result("isomorphic", isomorphic=True, vertex_map=iso.vertex_map,
                             edge_map=iso.edge_map, point_map=iso.point_map))
        return EXIT_OK

    ident = _require(args.id, "--id")
    glt = doc.first("glt", required=False) or GltStructure.untwisted(g)
    if args.action == "stabilizer":
        group = point_stabilizer(g, glt, ident) if ident in g.point_ids() else edge_stabilizer(g, glt, ident)
        session.emit(_result("stabilizer", id=ident, group=_group_json(group)))
        return EXIT_OK
    chart = local_chart(g, glt, ident)
    out = _result("chart", id=ident, type=chart.kind, group=_group_json(chart.group),
                  description=chart.describe())
    if chart.kind == "point":
        out["markings"] = list(chart.markings)
        out["monoid"] = chart.monoid.describe()
    else:
        out["node_order"] = chart.node_order
        out["weights"] = list(chart.node_weights)
    session.emit(out)
    return EXIT_OK


# ==========================================
# CONTRACT
# ==========================================

def _maps_json(maps) -> Dict[str, Any]:
    return {
        "source_edges": list(maps.source_edges),
        "target_edges": list(maps.target_edges),
        "base": {t: maps.column(t) for t in maps.target_edges},
        "node_charts": {t: {"a": [h.label() for h in c.a_side], "b": [h.label() for h in c.b_side],
                            "loop": c.loop}
                        for t, c in sorted(maps.node_charts.items())},
        "marking_charts": {str(i): {"point": c.point, "source_point": c.source_point,
                                    "half_edges": [h.label() for h in c.half_edges]}
                           for i, c in maps.marking_charts.items()},
    }


def _check_json(check) -> Dict[str, Any]:
    return {"valid": check.valid,
            "failures": [{"type": f.kind, "id": f.id, "detail": f.detail} for f in check.failures]}


def cmd_contract(args, session: Session) -> int:
    doc = session.document
    g = doc.first("graph")
    if args.action == "picard":
        kernel = picard_kernel(g, _require(args.root, "--root"), _require(args.marking, "--marking"))
        session.emit(_result("picard", variables=list(kernel.variables),
                             matrix=kernel.matrix.to_rows(), kernel_basis=kernel.kernel_basis.to_rows(),
                             w_prime={v: c for v, c in zip(kernel.variables, kernel.w_prime) if c},
                             path=list(kernel.path), verified=kernel.verified))
        return EXIT_OK if kernel.verified else EXIT_NEGATIVE
    if args.action == "rel-coarse":
        coarse: CoarseSpec = doc.first("coarse")
        session.emit(relative_coarse(g, doc.first("glt"), coarse.surviving, coarse.divisors))
        return EXIT_OK
    if args.action == "check":
        plan = _plan(session, g)
        check = is_glt_contraction(g, doc.first("glt"), doc.first("graph", position=1),
                                   doc.first("glt", position=1), plan)
        session.emit(_result("check", **_check_json(check)))
        return EXIT_OK if check.valid else EXIT_NEGATIVE

    plan = _plan(session, g)
    if args.action == "apply":
        result = contract(g, plan)
        session.emit(result.target, _result(
            "apply",
            components=[{"type": c.kind, "vertices": list(c.vertices)} for c in plan.components],
            edge_map={t: list(path) for t, path in result.edge_map.items()},
            point_map={p: list(src) for p, src in result.point_map.items()},
        ))
        return EXIT_OK
    if args.action == "factor":
        steps = greedy_factorization(g, plan)
        session.emit(*[s.target for s in steps], _result(
            "factor", steps=[{"collapsed": sorted(s.plan.collapsed),
                              "types": sorted({c.kind for c in s.plan.components})} for s in steps]))
        return EXIT_OK
    if args.action == "char-maps":
        session.emit(_result("char-maps", **_maps_json(char_maps(g, plan))))
        return EXIT_OK

    initial = initial_contraction(g, doc.first("glt"), plan)
    out = _result("initial", node_index=dict(initial.structure.node_index))
    code = EXIT_OK
    if args.verify:
        report = initial_contraction_oracle(g, doc.first("glt"), plan, max_denominator=args.max_denominator)
        out["oracle"] = {"ok": report.ok, "candidates": report.candidates_checked,
                         "node_mismatches": list(report.node_mismatches),
                         "skipped": [p.point for p in report.points if p.skipped]}
        code = EXIT_OK if report.ok else EXIT_NEGATIVE
    session.emit(initial.target, initial.structure, out)
    return code


# ==========================================
# STABILIZE AND COUNT
# ==========================================

def cmd_stabilize(args, session: Session) -> int:
    doc = session.document
    g = doc.first("graph")
    decoration = doc.first("decoration", required=False) or MapDecoration.all_contracted(g)
    result = stabilize(g, decoration)
    session.emit(PlanSpec(tuple(sorted(result.plan.collapsed))), result.target, result.decoration,
                 _result("stabilize", order=list(result.order), genus=genus(result.target)))
    return EXIT_OK


def cmd_count(args, session: Session) -> int:
    d = session.document.first("local-monoid")
    A = d.X
    if args.group is not None:
        try:
            A = FiniteAbelianGroup.from_orders([int(x) for x in args.group.split(",") if x.strip()])
        except ValueError as exc:
            raise DocumentError(str(exc), "--group") from exc
    result = count_structures(A, _require(args.n, "--n"), d,
                              max_enumeration=session.config["counting"]["max_enumeration"])
    session.emit(_result("count", group=_group_json(result.group), n=result.n, predicted=result.predicted,
                         enumerated=result.enumerated, status=result.status, injective=result.injective,
                         distinct_groups=result.distinct_groups, monoid_exact=result.monoid_exact,
                         psi=result.psi.describe() if result.psi else None))
    return EXIT_NEGATIVE if result.status == "mismatch" else EXIT_OK


# ==========================================
# SELFTEST
# ==========================================

def _lookup(obj: Any, dotted: str) -> Any:
    for part in dotted.split("."):
        if isinstance(obj, list):
            obj = obj[int(part)]
        else:
            obj = obj[part]
    return obj


def run_case(case: Dict[str, Any], config_path: Optional[str] = None) -> Dict[str, Any]:
    """One corpus case: exit code, expected values, determinism and round trip."""
    name = case.get("name", "?")
    text = case["raw"] if "raw" in case else json.dumps(case.get("document", {}))
    argv = list(case["argv"]) + (["--config", config_path] if config_path else [])
    first = run(argv, text)
    problems = []
    if first.code != case.get("expect_exit", 0):
        problems.append(f"exit {first.code}, expected {case.get('expect_exit', 0)} {first.error.strip()}")
    if case.get("expect_error") and case["expect_error"] not in first.error:
        problems.append(f"error {first.error.strip()!r} does not mention {case['expect_error']!r}")
    if run(argv, text).output != first.output:
        problems.append("output differs between runs")
    if first.output:
        out = json.loads(first.output)
        for path, expected in sorted(case.get("expect", {}).items()):
            try:
                found = _lookup(out, path)
            except (KeyError, IndexError, ValueError, TypeError):
                problems.append(f"{path} missing")
                continue
            if found != expected:
                problems.append(f"{path} = {found!r}, expected {expected!r}")
        try:
            once = serialize(parse_document(first.output))
            if serialize(parse_document(once)) != once:
                problems.append("output does not survive a parse/serialize round trip")
        except ValueError as exc:
            problems.append(f"output does not parse: {exc}")
    try:
        doc = parse_document(text)
        if parse_document(serialize(doc)).sections != doc.sections:
            problems.append("input does not survive a parse/serialize round trip")
    except ValueError:
        pass
    return {"name": name, "passed": not problems, "problems": problems}


def load_corpus(directory: str) -> List[Dict[str, Any]]:
    cases = []
    for fname in sorted(os.listdir(directory)):
        if not fname.endswith(".json"):
            continue
        path = os.path.join(directory, fname)
        with open(path) as f:
            try:
                body = json.load(f)
            except json.JSONDecodeError as exc:
                raise DocumentError(exc.msg, path, exc.lineno) from exc
        for case in body.get("cases", [body]):
            cases.append(dict(case, name=f"{fname[:-5]}/{case.get('name', '')}".rstrip("/")))
    return cases


def cmd_selftest(args, session: Session) -> int:
    selftest = session.config["selftest"]
    directory = args.corpus or os.path.join(REPO_ROOT, selftest["corpus"])
    cases = load_corpus(directory)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        outcomes = list(pool.map(lambda c: run_case(c, args.config), cases))
    for outcome in outcomes:
        if not outcome["passed"]:
            logger.warning("case %s failed: %s", outcome["name"], "; ".join(outcome["problems"]))

    sweeps = {}
    if not args.skip_sweeps:
        tables = run_all(seed=args.seed, sizes=selftest["smoke"])
        for name, table in tables.items():
            failed = int((~table["passed"]).sum()) if len(table) else 0
            sweeps[name] = {"rows": len(table), "failed": failed}
    passed = all(o["passed"] for o in outcomes) and all(s["failed"] == 0 for s in sweeps.values())
    session.emit(_result("selftest", passed=passed, cases=outcomes, sweeps=sweeps, seed=args.seed))
    return EXIT_OK if passed else EXIT_NEGATIVE


# ==========================================
# PARSER AND DISPATCH
# ==========================================

def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", default=None, help="JSON document (default: stdin)")
    common.add_argument("--output", default=None, help="where to write the result (default: stdout)")
    common.add_argument("--config", default=None, help="YAML settings merged over configs/default.yaml")
    common.add_argument("--jobs", type=int, default=None)
    common.add_argument("--max-denominator", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--log-level", default=None)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="glt", description="Exact computations with generalized log twisted curves")
    sub = ap.add_subparsers(dest="cmd", required=True)

    m = sub.add_parser("monoid", parents=[common])
    m.add_argument("action", choices=["contains", "equal", "contained", "quotient", "pushout",
                                      "envelope", "stabilizer"])
    m.add_argument("--vector", default=None, help="comma-separated rationals, e.g. 1/2,1/2")
    m.add_argument("--indices", default=None, help="comma-separated marking positions starting at 1")
    m.set_defaults(func=cmd_monoid)

    loc = sub.add_parser("local", parents=[common])
    loc.add_argument("action", choices=["validate", "from-admissible", "decide", "build"])
    loc.set_defaults(func=cmd_local)

    c = sub.add_parser("curve", parents=[common])
    c.add_argument("action", choices=["validate", "genus", "stabilizer", "chart", "isomorphic", "stable"])
    c.add_argument("--id", default=None, help="marked point or node id")
    c.set_defaults(func=cmd_curve)

    k = sub.add_parser("contract", parents=[common])
    k.add_argument("action", choices=["apply", "factor", "char-maps", "check", "initial", "rel-coarse", "picard"])
    k.add_argument("--root", default=None, help="component attached to the rest of the curve")
    k.add_argument("--marking", default=None, help="component carrying the marking")
    k.add_argument("--verify", action="store_true", help="run the maximality oracle on the initial stalks")
    k.set_defaults(func=cmd_contract)

    s = sub.add_parser("stabilize", parents=[common])
    s.set_defaults(func=cmd_stabilize)

    n = sub.add_parser("count", parents=[common])
    n.add_argument("--n", type=int, default=None, help="number of colliding markings")
    n.add_argument("--group", default=None, help="expected quotient as cyclic orders, e.g. 2,2")
    n.set_defaults(func=cmd_count)

    t = sub.add_parser("selftest", parents=[common])
    t.add_argument("--corpus", default=None, help="directory of corpus cases")
    t.add_argument("--skip-sweeps", action="store_true")
    t.set_defaults(func=cmd_selftest)
    return ap


def _settings(args) -> Dict[str, Any]:
    config = load_config(args.config)
    search = config["search"]
    if args.max_denominator is not None:
        search["max_denominator"] = args.max_denominator
    if args.jobs is not None:
        search["jobs"] = args.jobs
    if args.seed is not None:
        search["seed"] = args.seed
    if args.log_level is not None:
        config["logging"]["level"] = args.log_level
    args.max_denominator = search["max_denominator"]
    args.jobs = search["jobs"]
    args.seed = search["seed"]
    return config


def run(argv: Sequence[str], input_text: Optional[str] = None, setup_logging: bool = False) -> RunResult:
    """
    Run one command without touching stdout.

    ``input_text`` replaces --input/stdin. The document is read only by
    commands that need one.
    """
    try:
        args = build_parser().parse_args(list(argv))
    except SystemExit as exc:
        return RunResult(int(exc.code or 0))
    try:
        config = _settings(args)
        if setup_logging:
            configure_logging(config["logging"]["level"])
        if input_text is None and args.cmd != "selftest":
            if args.input:
                try:
                    with open(args.input) as f:
                        input_text = f.read()
                except OSError as exc:
                    raise DocumentError(f"cannot read input: {exc.strerror}", args.input) from exc
            else:
                input_text = sys.stdin.read()
        session = Session(config, input_text)
        code = args.func(args, session)
        return RunResult(code, dump_document(session.sections), destination=args.output)
    except DocumentError as exc:
        return RunResult(EXIT_INPUT, error=f"error: {exc}\n")
    except ValueError as exc:
        return RunResult(EXIT_INPUT, error=f"error: $: {exc}\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    result = run(sys.argv[1:] if argv is None else argv, setup_logging=True)
    if result.error:
        sys.stderr.write(result.error)
    if result.output and result.destination:
        with open(result.destination, "w") as f:
            f.write(result.output)
    elif result.output:
        sys.stdout.write(result.output)
    return result.code


if __name__ == '__main__':
    sys.exit(main())
