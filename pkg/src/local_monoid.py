"""
Local Monoids
=============

A local monoid D with integral inclusion N ↪ D and finite quotient
X = D^gp/Z is presented by X and a carry cocycle c: elements are pairs
(a, θ) with a ∈ N, θ ∈ X, and

    (a, θ) + (a', θ') = (a + a' + c(θ, θ'), θ + θ').

This module validates cocycles, builds them from admissible monoids
(pushout along the coordinate-sum map N^n → N) and from explicit
submonoids of Z ⊕ (finite group), and decides whether a given cocycle
arises as such a pushout.
"""

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from admissible import AdmissibleMonoid, RationalVector
from exact_lattice import Element, FiniteAbelianGroup, GroupHom, format_rational, frac_part

logger = logging.getLogger(__name__)

Pair = Tuple[Element, Element]
LocalElement = Tuple[int, Element]


class LocalMonoidError(ValueError):
    """Base error for local monoid computations."""


class InvalidCocycleError(LocalMonoidError):
    """Raised when an operation needs a valid cocycle and gets a broken one."""

    def __init__(self, report: "CocycleReport"):
        super().__init__(report.describe())
        self.report = report


class NotASubmonoidError(LocalMonoidError):
    """The described subset is not a submonoid with the designated generator."""


class QuotientInfiniteError(LocalMonoidError):
    """The designated N does not have finite index."""


# ==========================================
# LOCAL MONOIDS
# ==========================================

def upper_pairs(group: FiniteAbelianGroup) -> List[Pair]:
    """Unordered pairs of nonzero elements, lexicographic, first ≤ second."""
    nonzero = list(group.elements())[1:]
    return [(a, b) for i, a in enumerate(nonzero) for b in nonzero[i:]]


@dataclass(frozen=True, eq=False)
class LocalMonoid:
    """
    Carry-cocycle presentation (X, c).

    Args:
        X: the finite quotient D^gp/Z
        carry: entries c(θ, θ'); each unordered pair of nonzero elements
            must appear in at least one order, pairs involving 0 may be
            omitted (they are 0)
    """
    X: FiniteAbelianGroup
    carry: Dict[Pair, int] = field(default_factory=dict)

    @classmethod
    def from_upper_values(cls, X: FiniteAbelianGroup, values: Sequence[int]) -> "LocalMonoid":
        pairs = upper_pairs(X)
        if len(values) != len(pairs):
            raise LocalMonoidError(f"{len(values)} carry values given, {len(pairs)} expected for {X}")
        return cls(X, {p: int(v) for p, v in zip(pairs, values)})

    @classmethod
    def trivial(cls) -> "LocalMonoid":
        return cls(FiniteAbelianGroup(()), {})

    def c(self, x: Element, y: Element) -> int:
        x, y = tuple(x), tuple(y)
        if (x, y) in self.carry:
            return self.carry[(x, y)]
        if (y, x) in self.carry:
            return self.carry[(y, x)]
        zero = self.X.zero()
        if x == zero or y == zero:
            return 0
        raise InvalidCocycleError(CocycleReport(False, "missing", (x, y), "no carry entry"))

    def upper_values(self) -> Tuple[int, ...]:
        return tuple(self.c(a, b) for a, b in upper_pairs(self.X))

    def add(self, x: LocalElement, y: LocalElement) -> LocalElement:
        (a, theta), (b, eta) = x, y
        return a + b + self.c(theta, eta), self.X.add(theta, eta)

    def multiple(self, k: int, x: LocalElement) -> LocalElement:
        out: LocalElement = (0, self.X.zero())
        for _ in range(k):
            out = self.add(out, x)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, LocalMonoid):
            return NotImplemented
        return self.X == other.X and self.upper_values() == other.upper_values()

    def __hash__(self) -> int:
        return hash((self.X, self.upper_values()))

    def describe(self) -> str:
        values = ", ".join(str(v) for v in self.upper_values())
        return f"X = {self.X}, carry = ({values})"


@dataclass(frozen=True)
class CocycleReport:
    """Outcome of validate: valid, or the first violated axiom and its witness tuple."""
    valid: bool
    axiom: Optional[str] = None
    elements: Tuple = ()
    detail: str = ""

    def describe(self) -> str:
        if self.valid:
            return "valid local monoid"
        return f"{self.axiom} violated at {self.elements}: {self.detail}"


def _is_pair_of_elements(X: FiniteAbelianGroup, key) -> bool:
    if not isinstance(key, tuple) or len(key) != 2:
        return False
    for t in key:
        if not isinstance(t, tuple) or len(t) != X.num_generators:
            return False
        if any(not 0 <= x < d for x, d in zip(t, X.invariant_factors)):
            return False
    return True


def validate(d: LocalMonoid) -> CocycleReport:
    """Check table shape, identity, commutativity, associativity and sharpness."""
    X = d.X
    elements = list(X.elements())
    zero = X.zero()

    for key, value in d.carry.items():
        if not _is_pair_of_elements(X, key):
            return CocycleReport(False, "malformed", tuple(key), "entry indexed by a non-element")
        if not isinstance(value, int) or value < 0:
            return CocycleReport(False, "nonnegativity", tuple(key), f"carry {value!r} is not a nonnegative integer")
    for a, b in upper_pairs(X):
        if (a, b) not in d.carry and (b, a) not in d.carry:
            return CocycleReport(False, "missing", (a, b), "no carry entry")

    for theta in elements:
        if d.c(zero, theta) != 0:
            return CocycleReport(False, "identity", (zero, theta), f"c(0, θ) = {d.c(zero, theta)}")
    for (a, b), value in d.carry.items():
        if (b, a) in d.carry and d.carry[(b, a)] != value:
            return CocycleReport(False, "commutativity", (a, b),
                                 f"c(θ, θ') = {value} but c(θ', θ) = {d.carry[(b, a)]}")
    for x, y, z in itertools.product(elements, repeat=3):
        left = d.c(x, y) + d.c(X.add(x, y), z)
        right = d.c(x, X.add(y, z)) + d.c(y, z)
        if left != right:
            return CocycleReport(False, "associativity", (x, y, z), f"{left} != {right}")
    for theta in elements[1:]:
        if d.c(theta, X.neg(theta)) <= 0:
            return CocycleReport(False, "sharpness", (theta,), "c(θ, -θ) = 0 for θ != 0")
    return CocycleReport(True)


def add(d: LocalMonoid, x: LocalElement, y: LocalElement) -> LocalElement:
    return d.add(x, y)


def isomorphic(a: LocalMonoid, b: LocalMonoid) -> Optional[Dict[Element, Element]]:
    """An automorphism φ of X with c_b(φθ, φθ') = c_a(θ, θ'), if one exists."""
    if a.X != b.X:
        return None
    if sorted(a.upper_values()) != sorted(b.upper_values()):
        return None
    X = a.X
    elements = list(X.elements())
    # an automorphism sends a generator of order d to an element of order d
    candidates = [[y for y in elements if X.element_order(y) == d] for d in X.invariant_factors]
    for images in itertools.product(*candidates):
        hom = GroupHom(X, X, images)
        if not hom.is_injective():
            continue
        phi = hom.table()
        if all(a.c(s, t) == b.c(phi[s], phi[t]) for s, t in upper_pairs(X)):
            return phi
    return None


# ==========================================
# PUSHOUTS OF ADMISSIBLE MONOIDS
# ==========================================

def _carry_from_representatives(X: FiniteAbelianGroup,
                                reps: Dict[Element, RationalVector]) -> Dict[Pair, int]:
    table = {}
    for a, b in upper_pairs(X):
        table[(a, b)] = sum(1 for p, q in zip(reps[a], reps[b]) if p + q >= 1)
    return table


def pushout_to_local(m: AdmissibleMonoid) -> LocalMonoid:
    """
    Local monoid of the pushout N ⊕_{N^n} N along coordinate sum.

    Carries count the coordinates where the fractional representatives of
    θ and θ' add up past 1.
    """
    labeling = m.group.labeling()
    X = labeling.group
    reps = {theta: labeling.representative(theta) for theta in X.elements()}
    return LocalMonoid(X, _carry_from_representatives(X, reps))


def pullback_to_local(X: FiniteAbelianGroup, assignment: Dict[Element, Sequence[Fraction]]) -> LocalMonoid:
    """
    Carry table of the extension of X by Z pulled back from the pushout
    along a homomorphism X → (Q/Z)^n, given by its values.

    Any homomorphism is allowed; the table is sharp only when it is injective.
    """
    reps = {theta: tuple(frac_part(Fraction(q)) for q in assignment[theta]) for theta in X.elements()}
    return LocalMonoid(X, _carry_from_representatives(X, reps))


def pushout_to_local_along(m: AdmissibleMonoid, X: FiniteAbelianGroup,
                           assignment: Dict[Element, Sequence[Fraction]]) -> LocalMonoid:
    """
    Carry table of the pushout for an explicit labeling θ ↦ class in G/Z^n.

    The assignment must be an isomorphism X ≅ G/Z^n.
    """
    reps = {}
    for theta in X.elements():
        if theta not in assignment:
            raise LocalMonoidError(f"labeling misses {theta}")
        vec = tuple(frac_part(Fraction(q)) for q in assignment[theta])
        if len(vec) != m.n or not m.group.contains(vec):
            raise LocalMonoidError(f"labeling sends {theta} outside the group")
        reps[theta] = vec
    if len(set(reps.values())) != X.order or X.order != m.group.stabilizer_group().order:
        raise LocalMonoidError("labeling is not a bijection onto G/Z^n")
    for s, t in itertools.product(X.elements(), repeat=2):
        total = tuple(frac_part(p + q) for p, q in zip(reps[s], reps[t]))
        if total != reps[X.add(s, t)]:
            raise LocalMonoidError("labeling is not a homomorphism")
    return pullback_to_local(X, reps)


# ==========================================
# CHARACTERS
# ==========================================

@dataclass(frozen=True)
class Character:
    """Hom(X, Q/Z) element given by its values on the generators of X, in [0,1)."""
    values: Tuple[Fraction, ...]

    def __call__(self, theta: Element) -> Fraction:
        return frac_part(sum((k * v for k, v in zip(theta, self.values)), Fraction(0)))

    def is_zero(self) -> bool:
        return not any(self.values)

    def describe(self) -> str:
        return "(" + ", ".join(format_rational(v) for v in self.values) + ")"


def characters(X: FiniteAbelianGroup, include_zero: bool = False) -> List[Character]:
    """All characters, lexicographic in the numerators of the generator values."""
    out = []
    for numerators in itertools.product(*(range(d) for d in X.invariant_factors)):
        chi = Character(tuple(Fraction(j, d) for j, d in zip(numerators, X.invariant_factors)))
        if include_zero or not chi.is_zero():
            out.append(chi)
    return out


def carry_of_character(chi: Character, X: FiniteAbelianGroup) -> Dict[Pair, int]:
    """t(θ, θ') = 1 when χ(θ) + χ(θ') ≥ 1 with values in [0,1)."""
    return {(a, b): int(chi(a) + chi(b) >= 1) for a, b in upper_pairs(X)}


def extension_character(d: LocalMonoid) -> Character:
    """
    Class of D^gp as an extension of X by Z: for a generator θ of order k,
    k·(0, θ) = (s, 0) and ψ(θ) = s/k.
    """
    values = []
    for gen, order in zip(d.X.generators(), d.X.invariant_factors):
        s, rest = d.multiple(order, (0, gen))
        if rest != d.X.zero():
            raise LocalMonoidError("multiple of a generator does not land in N")
        values.append(frac_part(Fraction(s, order)))
    return Character(tuple(values))


# ==========================================
# PUSHOUT DECISION
# ==========================================

@dataclass(frozen=True)
class PrunedBranch:
    """A dead end of the multiplicity search: the pair equation that failed."""
    assignment: Tuple[Tuple[str, int], ...]
    pair: Pair
    residual: int
    reason: str


@dataclass(frozen=True)
class InfeasibilityCertificate:
    bounds: Tuple[Tuple[str, int], ...]
    pruned: Tuple[PrunedBranch, ...]
    pruned_total: int
    nodes_explored: int
    truncated: bool


@dataclass(frozen=True)
class PushoutDecision:
    representable: bool
    raw_feasible: bool
    multiplicities: Tuple[Tuple[Character, int], ...] = ()
    witness: Optional[AdmissibleMonoid] = None
    labeling: Dict[Element, RationalVector] = field(default_factory=dict)
    certificate: Optional[InfeasibilityCertificate] = None
    separation_failures: int = 0


class _MultiplicitySearch:
    """Depth-first search for m_χ with Σ m_χ t^χ = c on every pair."""

    def __init__(self, d: LocalMonoid, certificate_limit: int):
        X = d.X
        self.pairs = upper_pairs(X)
        self.target = [d.c(a, b) for a, b in self.pairs]
        self.chars = characters(X)
        self.tables = [[carry_of_character(chi, X)[p] for p in self.pairs] for chi in self.chars]
        self.bounds = []
        for chi in self.chars:
            caps = [d.c(theta, X.neg(theta)) for theta in list(X.elements())[1:] if chi(theta) != 0]
            self.bounds.append(min(caps))
        # cover[k][p]: some character from position k on has t = 1 at pair p
        k_max = len(self.chars)
        self.cover = [[False] * len(self.pairs) for _ in range(k_max + 1)]
        for k in range(k_max - 1, -1, -1):
            self.cover[k] = [self.cover[k + 1][p] or self.tables[k][p] == 1
                             for p in range(len(self.pairs))]
        self.limit = certificate_limit
        self.pruned: List[PrunedBranch] = []
        self.pruned_total = 0
        self.nodes = 0

    def _prune(self, assignment, p, residual, reason):
        self.pruned_total += 1
        if len(self.pruned) < self.limit:
            labeled = tuple((self.chars[k].describe(), m) for k, m in enumerate(assignment))
            self.pruned.append(PrunedBranch(labeled, self.pairs[p], residual, reason))

    def _cap(self, k: int, residual: List[int]) -> int:
        covered = [residual[p] for p in range(len(self.pairs)) if self.tables[k][p]]
        return min([self.bounds[k]] + covered)

    def solutions(self) -> Iterator[Tuple[int, ...]]:
        yield from self._search(0, list(self.target), [])

    def _search(self, k: int, residual: List[int], assignment: List[int]) -> Iterator[Tuple[int, ...]]:
        self.nodes += 1
        n_pairs = len(self.pairs)
        for p in range(n_pairs):
            if residual[p] > 0 and not self.cover[k][p]:
                self._prune(assignment, p, residual[p], "no remaining character carries this pair")
                return
        if k == len(self.chars):
            yield tuple(assignment)
            return
        caps = [self._cap(j, residual) for j in range(k, len(self.chars))]
        for p in range(n_pairs):
            if residual[p] > 0:
                reach = sum(cap for j, cap in zip(range(k, len(self.chars)), caps) if self.tables[j][p])
                if reach < residual[p]:
                    self._prune(assignment, p, residual[p], "remaining capacity too small")
                    return
        low, high = 0, caps[0]
        # pairs whose last coverer is this character force its multiplicity
        for p in range(n_pairs):
            if self.tables[k][p] and not self.cover[k + 1][p]:
                low = max(low, residual[p])
                high = min(high, residual[p])
        if low > high:
            forced = next(p for p in range(n_pairs) if self.tables[k][p] and not self.cover[k + 1][p])
            self._prune(assignment, forced, residual[forced], "forced multiplicities disagree")
            return
        for m in range(low, high + 1):
            nxt = [r - m * t for r, t in zip(residual, self.tables[k])]
            yield from self._search(k + 1, nxt, assignment + [m])


def decide_pushout(d: LocalMonoid, certificate_limit: int = 200) -> PushoutDecision:
    """
    Decide whether d is the pushout of an admissible monoid along the sum map.

    Returns the first witness in the deterministic search order, or a
    certificate listing the pruned branches.
    """
    report = validate(d)
    if not report.valid:
        raise InvalidCocycleError(report)
    X = d.X
    search = _MultiplicitySearch(d, certificate_limit)
    nonzero = list(X.elements())[1:]
    raw_feasible = False
    failures = 0
    for solution in search.solutions():
        raw_feasible = True
        support = [(chi, m) for chi, m in zip(search.chars, solution) if m > 0]
        separates = all(any(chi(theta) != 0 for chi, _ in support) for theta in nonzero)
        if not separates:
            failures += 1
            logger.info("multiplicity solution %s does not separate points", solution)
            continue
        coords = [chi for chi, m in support for _ in range(m)]
        labeling = {theta: tuple(chi(theta) for chi in coords) for theta in X.elements()}
        witness = AdmissibleMonoid.generated_by(len(coords), [labeling[g] for g in X.generators()])
        logger.info("pushout witness of rank %d found after %d nodes", len(coords), search.nodes)
        return PushoutDecision(True, True, tuple(support), witness, labeling, None, failures)

    certificate = InfeasibilityCertificate(
        bounds=tuple((chi.describe(), b) for chi, b in zip(search.chars, search.bounds)),
        pruned=tuple(search.pruned),
        pruned_total=search.pruned_total,
        nodes_explored=search.nodes,
        truncated=search.pruned_total > len(search.pruned),
    )
    logger.info("no pushout presentation; %d branches pruned", search.pruned_total)
    return PushoutDecision(False, raw_feasible, certificate=certificate, separation_failures=failures)


# ==========================================
# SUBMONOIDS OF Z ⊕ (FINITE GROUP)
# ==========================================

@dataclass(frozen=True)
class SubmonoidPresentation:
    """
    D ⊆ Z ⊕ ∏ Z/t_j generated by ``generators``; the first coordinate is
    the free one. ``designated`` is the generator z of N ↪ D and the
    grading sends the unit vectors of the ambient group to X.
    """
    torsion: Tuple[int, ...]
    generators: Tuple[Tuple[int, ...], ...]
    designated: Tuple[int, ...]
    grading_group: FiniteAbelianGroup
    grading_images: Tuple[Element, ...]

    def normalize(self, u: Sequence[int]) -> Tuple[int, ...]:
        if len(u) != 1 + len(self.torsion):
            raise NotASubmonoidError(f"element {tuple(u)} has the wrong length")
        return (int(u[0]),) + tuple(int(x) % t for x, t in zip(u[1:], self.torsion))

    def plus(self, u: Sequence[int], v: Sequence[int]) -> Tuple[int, ...]:
        return self.normalize([a + b for a, b in zip(u, v)])

    def minus(self, u: Sequence[int], v: Sequence[int]) -> Tuple[int, ...]:
        return self.normalize([a - b for a, b in zip(u, v)])

    def grade(self, u: Sequence[int]) -> Element:
        X = self.grading_group
        out = X.zero()
        for k, img in zip(u, self.grading_images):
            out = X.add(out, X.scale(k, img))
        return out


def local_monoid_from_submonoid(presentation: SubmonoidPresentation,
                                max_first_coordinate: int = 64) -> LocalMonoid:
    """
    Carry cocycle of D by brute-force minimal lifts.

    D is enumerated up to the first-coordinate bound; δ_θ is the unique
    element of the fiber over θ with δ_θ - z ∉ D, and carries are read off
    δ_θ + δ_θ' = δ_{θ+θ'} + c·z.
    """
    pres = presentation
    X = pres.grading_group
    if len(pres.grading_images) != 1 + len(pres.torsion):
        raise LocalMonoidError("one grading image per ambient coordinate is required")
    for t, img in zip(pres.torsion, pres.grading_images[1:]):
        if X.scale(t, X.normalize(img)) != X.zero():
            raise LocalMonoidError(f"grading of a Z/{t} coordinate is not killed by {t}")
    gens = [pres.normalize(g) for g in pres.generators]
    for g in gens:
        if g[0] < 0:
            raise NotASubmonoidError(f"generator {g} has a negative first coordinate")
    z = pres.normalize(pres.designated)
    if z[0] <= 0:
        raise QuotientInfiniteError("designated element must have positive first coordinate")
    if pres.grade(z) != X.zero():
        raise LocalMonoidError("designated element has nonzero grading")
    bound = max(max_first_coordinate, 2 * z[0])

    zero = pres.normalize([0] * (1 + len(pres.torsion)))
    members = {zero}
    queue = deque([zero])
    while queue:
        u = queue.popleft()
        for g in gens:
            w = pres.plus(u, g)
            if w[0] <= bound and w not in members:
                members.add(w)
                queue.append(w)
    logger.debug("enumerated %d submonoid elements up to first coordinate %d", len(members), bound)
    if z not in members:
        raise NotASubmonoidError(f"designated element {z} is not in the submonoid")

    lifts: Dict[Element, Tuple[int, ...]] = {}
    for theta in X.elements():
        fiber = sorted(u for u in members if pres.grade(u) == theta)
        minimal = [u for u in fiber if pres.minus(u, z) not in members]
        if not minimal:
            raise QuotientInfiniteError(f"no lift of {theta} up to first coordinate {bound}")
        if len(minimal) > 1:
            raise LocalMonoidError(f"fiber over {theta} has several minimal lifts {minimal}")
        delta = minimal[0]
        for u in fiber:
            diff = pres.minus(u, delta)
            k, rem = divmod(diff[0], z[0])
            if rem or k < 0 or pres.normalize([k * x for x in z]) != diff:
                raise LocalMonoidError(f"fiber over {theta} is not δ + N·z (element {u})")
        lifts[theta] = delta

    table = {}
    for a, b in upper_pairs(X):
        s = pres.plus(lifts[a], lifts[b])
        t = lifts[X.add(a, b)]
        diff = pres.minus(s, t)
        k, rem = divmod(diff[0], z[0])
        if rem or k < 0 or pres.normalize([k * x for x in z]) != diff:
            raise LocalMonoidError(f"δ_{a} + δ_{b} is not δ_{X.add(a, b)} + N·z")
        table[(a, b)] = k
    result = LocalMonoid(X, table)
    report = validate(result)
    if not report.valid:
        raise InvalidCocycleError(report)
    return result
