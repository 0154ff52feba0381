"""
Property Sweeps
===============

Randomized and exhaustive checks of the library's structural laws. Each
sweep returns a pandas DataFrame with one row per instance and a
``passed`` column; experiments/run_property_sweeps.py runs them at full
size and writes the tables to CSV.
"""

import itertools
import logging
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import networkx as nx
import numpy as np
import pandas as pd
from tqdm import tqdm

from admissible import (
    AdmissibleMonoid,
    free_envelope,
    group_from_monoid,
    monoid_from_group,
    stabilizer_group,
)
from char_maps import char_maps, char_maps_of, compose_char_maps, picard_kernel, same_char_maps
from contraction import InfeasibleMergeError, contract, greedy_factorization, stabilize
from curve_graph import Edge, MarkedDualGraph, Vertex, genus, is_stable
from exact_lattice import FiniteAbelianGroup, frac_part
from glt_contraction import initial_contraction_oracle
from local_monoid import decide_pushout, pushout_to_local, pushout_to_local_along
from random_instances import (
    random_admissible_monoid,
    random_cyclic_local_monoid,
    random_glt,
    random_plan,
    random_tree_graph,
    random_weighted_graph,
)
from structure_count import count_structures

logger = logging.getLogger(__name__)

COUNTING_GROUPS = [(2,), (3,), (4,), (5,), (6,), (2, 2), (2, 4), (3, 3)]


def _progress(iterable: Iterable, progress: bool, desc: str, total: Optional[int] = None):
    return tqdm(iterable, desc=desc, total=total, disable=not progress)


def _random_subset(rng: np.random.Generator, n: int) -> list:
    return sorted(int(i) for i in range(n) if rng.random() < 0.6)


# ==========================================
# ADMISSIBLE MONOIDS
# ==========================================

def sweep_admissible(rng: np.random.Generator, count: int = 500, max_rank: int = 4,
                     max_denominator: int = 12, progress: bool = False) -> pd.DataFrame:
    """Round trips, fractional-part law, quotients, rank one, envelopes."""
    rows = []
    for k in _progress(range(count), progress, "admissible"):
        m = random_admissible_monoid(rng, max_rank=max_rank, max_denominator=max_denominator)
        n = m.n
        g = group_from_monoid(m)
        round_trip = monoid_from_group(g) == m and group_from_monoid(monoid_from_group(g)) == g

        # an element of m from a random combination; its fractional part stays in m
        element = [Fraction(int(x)) for x in rng.integers(0, 3, size=n)]
        for gen in m.generators():
            c = int(rng.integers(0, 4))
            element = [a + c * q for a, q in zip(element, gen)]
        fractional = tuple(frac_part(q) for q in element)
        integral_law = m.contains(element) and m.contains(fractional)

        I = _random_subset(rng, n)
        J = [j for j in I if rng.random() < 0.6]
        nested = m.quotient(I).quotient([I.index(j) for j in J]) == m.quotient(J)

        pushout = g.pushout_abelian(I)
        torsion_free = (pushout.free_rank == len(I)
                        and g.quotient(I).stabilizer_group().order * pushout.torsion.order
                        == g.stabilizer_group().order)

        rank_one = all(m.quotient([i]) == AdmissibleMonoid.rank_one(m.quotient([i]).group.exponent)
                       for i in range(n))

        envelope = free_envelope(m)
        contained = m.is_contained_in(envelope.envelope)
        product = FiniteAbelianGroup.from_orders(envelope.orders)
        envelope_law = (envelope.envelope == m) == (stabilizer_group(m) == product)

        checks = dict(round_trip=round_trip, integral_law=integral_law, nested_quotient=nested,
                      torsion_free_pushout=torsion_free, rank_one=rank_one,
                      envelope_contains=contained, envelope_equality=envelope_law)
        rows.append(dict(instance=k, rank=n, stabilizer=str(stabilizer_group(m)), **checks,
                         passed=all(checks.values())))
    return pd.DataFrame(rows)


# ==========================================
# PUSHOUT DECISION
# ==========================================

def sweep_pushout_decision(rng: np.random.Generator, count: int = 200, orders: Sequence[int] = (2, 3),
                           from_monoids: int = 50, certificate_limit: int = 200,
                           progress: bool = False) -> pd.DataFrame:
    """Random cocycles on small cyclic groups, then pushouts of random monoids."""
    rows = []
    for k in _progress(range(count), progress, "decide (cocycles)"):
        order = int(orders[k % len(orders)])
        d = random_cyclic_local_monoid(rng, order)
        decision = decide_pushout(d, certificate_limit)
        sound = decision.representable and pushout_to_local_along(
            decision.witness, d.X, decision.labeling) == d
        rows.append(dict(instance=k, source="cocycle", X=str(d.X), carry=str(d.upper_values()),
                         representable=decision.representable, rank=decision.witness.n if sound else None,
                         passed=bool(sound)))
    for k in _progress(range(from_monoids), progress, "decide (monoids)"):
        m = random_admissible_monoid(rng, max_rank=3, max_denominator=4, max_generators=2)
        d = pushout_to_local(m)
        if d.X.order > 12:
            continue
        decision = decide_pushout(d, certificate_limit)
        sound = decision.representable and pushout_to_local_along(
            decision.witness, d.X, decision.labeling) == d
        rows.append(dict(instance=count + k, source="monoid", X=str(d.X), carry=str(d.upper_values()),
                         representable=decision.representable, rank=decision.witness.n if sound else None,
                         passed=bool(sound)))
    return pd.DataFrame(rows)


# ==========================================
# CONTRACTIONS
# ==========================================

def sweep_stabilization(rng: np.random.Generator, count: int = 100, orders: int = 20,
                        progress: bool = False) -> pd.DataFrame:
    """
    stabilize is stable, preserves genus, and ignores the contraction order.

    A forced overweight merge is recorded as "skipped"; any other error is a
    failed row.
    """
    rows = []
    for k in _progress(range(count), progress, "stabilize"):
        g, decoration = random_weighted_graph(rng)
        try:
            base = stabilize(g, decoration)
            shuffled = [stabilize(g, decoration, rng=rng).target for _ in range(orders)]
        except InfeasibleMergeError:
            rows.append(dict(instance=k, vertices=len(g.vertices), collapsed=None,
                             outcome="skipped", passed=False))
            continue
        except ValueError as exc:
            logger.warning("stabilization failed on instance %d: %s", k, exc)
            rows.append(dict(instance=k, vertices=len(g.vertices), collapsed=None,
                             outcome=type(exc).__name__, passed=False))
            continue
        stable = is_stable(base.target, base.decoration).stable
        same_genus = genus(base.target) == genus(g)
        confluent = all(target == base.target for target in shuffled)
        rows.append(dict(instance=k, vertices=len(g.vertices), collapsed=len(base.order),
                         outcome="stabilized", passed=stable and same_genus and confluent))
    return pd.DataFrame(rows)


def sweep_factorization(rng: np.random.Generator, count: int = 100, max_vertices: int = 8,
                        progress: bool = False) -> pd.DataFrame:
    """Greedy factorization composes to the all-at-once contraction and charts."""
    rows = []
    for k in _progress(range(count), progress, "factorize"):
        g = random_tree_graph(rng, max_vertices=max_vertices)
        plan = random_plan(rng, g)
        whole = contract(g, plan)
        steps = greedy_factorization(g, plan)
        composite_target = steps[-1].target if steps else g
        composed = None
        for step in steps:
            maps = char_maps_of(step)
            composed = maps if composed is None else compose_char_maps(composed, maps)
        functorial = composed is None or same_char_maps(composed, char_maps(g, plan))
        rows.append(dict(instance=k, vertices=len(g.vertices), collapsed=len(plan.collapsed),
                         steps=len(steps),
                         passed=(composite_target == whole.target and genus(whole.target) == genus(g)
                                 and functorial)))
    return pd.DataFrame(rows)


def _tree_fibers(max_vertices: int):
    yield MarkedDualGraph((Vertex("x0", 0),))
    for nv in range(2, max_vertices + 1):
        for tree in nx.nonisomorphic_trees(nv):
            vertices = tuple(Vertex(f"x{k}", 0) for k in range(nv))
            edges = tuple(Edge(f"n{k}", f"x{min(a, b)}", f"x{max(a, b)}")
                          for k, (a, b) in enumerate(sorted(tree.edges())))
            yield MarkedDualGraph(vertices, edges)


def sweep_picard_kernels(max_vertices: int = 7, progress: bool = False) -> pd.DataFrame:
    """Every tree up to max_vertices, every root and every marking placement."""
    rows = []
    fibers = list(_tree_fibers(max_vertices))
    for k, fiber in enumerate(_progress(fibers, progress, "picard")):
        for root, mark in itertools.product(fiber.vertex_ids(), repeat=2):
            kernel = picard_kernel(fiber, root, mark)
            coefficients = (kernel.coefficient("t0+"), kernel.coefficient("t0-"))
            rows.append(dict(tree=k, vertices=len(fiber.vertices), root=root, marking=mark,
                             path_length=len(kernel.path), t0=str(coefficients),
                             passed=kernel.verified and coefficients == (0, 1)))
    return pd.DataFrame(rows)


def sweep_initial_contractions(rng: np.random.Generator, count: int = 100, max_collapsed: int = 5,
                               max_denominator: int = 6, bound: int = 64,
                               progress: bool = False) -> pd.DataFrame:
    """Initial stalks are exactly the classes passing the chart conditions."""
    rows = []
    for k in _progress(range(count), progress, "initial"):
        g = random_tree_graph(rng, max_vertices=max_collapsed + 2, max_markings=3)
        glt = random_glt(rng, g, max_index=max_denominator, max_denominator=max_denominator)
        plan = random_plan(rng, g, max_collapsed=max_collapsed)
        report = initial_contraction_oracle(g, glt, plan, max_denominator=bound)
        rows.append(dict(instance=k, collapsed=len(plan.collapsed), points=len(report.points),
                         candidates=report.candidates_checked,
                         skipped=sum(p.skipped for p in report.points), passed=report.ok))
    return pd.DataFrame(rows)


# ==========================================
# COUNTING
# ==========================================

def sweep_counting(max_enumeration: int = 10 ** 4, groups: Sequence[Sequence[int]] = COUNTING_GROUPS,
                   progress: bool = False) -> pd.DataFrame:
    """Every (A, n) with exp(A)^n·|A| ≤ max_enumeration."""
    rows = []
    for factors in _progress(groups, progress, "count"):
        A = FiniteAbelianGroup(tuple(factors))
        # ⊕ (1/d_k)N has quotient A in its canonical labeling
        gens = [[Fraction(1, d) if j == k else 0 for j in range(len(factors))] for k, d in enumerate(factors)]
        d = pushout_to_local(AdmissibleMonoid.generated_by(len(factors), gens))
        n = 1
        while A.exponent ** n * A.order <= max_enumeration:
            result = count_structures(A, n, d, max_enumeration=max_enumeration)
            rows.append(dict(group=str(A), n=n, predicted=result.predicted, enumerated=result.enumerated,
                             injective=result.injective, distinct_groups=result.distinct_groups,
                             status=result.status, passed=result.status == "verified"))
            n += 1
    return pd.DataFrame(rows)


def run_all(seed: int = 42, sizes: Optional[dict] = None, progress: bool = False) -> dict:
    """Every sweep with one seed; ``sizes`` overrides instance counts."""
    sizes = sizes or {}
    rng = np.random.default_rng(seed)
    tables = {
        "admissible": sweep_admissible(rng, sizes.get("admissible", 500), progress=progress),
        "pushout_decision": sweep_pushout_decision(rng, sizes.get("pushout_decision", 200), progress=progress),
        "stabilization": sweep_stabilization(rng, sizes.get("stabilization", 100),
                                             orders=sizes.get("stabilization_orders", 20), progress=progress),
        "factorization": sweep_factorization(rng, sizes.get("factorization", 100), progress=progress),
        "picard": sweep_picard_kernels(sizes.get("picard_max_vertices", 7), progress=progress),
        "initial_contraction": sweep_initial_contractions(rng, sizes.get("initial_contraction", 100),
                                                          progress=progress),
        "counting": sweep_counting(sizes.get("counting_max_enumeration", 10 ** 4), progress=progress),
    }
    for name, table in tables.items():
        failed = int((~table["passed"]).sum()) if len(table) else 0
        logger.info("sweep %s: %d rows, %d failed", name, len(table), failed)
    return tables
