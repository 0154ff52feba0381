"""
Admissible Monoids and Groups
=============================

An admissible group is a finitely generated subgroup G ⊆ Q^n containing
Z^n; its admissible monoid is G ∩ Q^n_{≥0}. Both are stored through the
same canonical form: the exponent e of G/Z^n together with the Hermite
normal form of the lattice e·G ⊆ Z^n. Two groups are equal exactly when
their canonical forms agree, so dataclass equality is set equality.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from exact_lattice import (
    CokernelResult,
    Element,
    FiniteAbelianGroup,
    IntMatrix,
    LatticeError,
    cokernel,
    common_denominator,
    format_rational,
    frac_part,
    hermite_normal_form,
    parse_rational,
    rational_inverse,
    smith_form,
    solve_congruences,
    vector_gcd,
)

logger = logging.getLogger(__name__)

RationalVector = Tuple[Fraction, ...]


class AdmissibleError(ValueError):
    """Base error for admissible monoid computations."""


class RankMismatchError(AdmissibleError):
    """Raised when a vector or monoid lives in the wrong ambient rank."""


def as_rational_vector(values: Sequence) -> RationalVector:
    try:
        return tuple(parse_rational(v) for v in values)
    except LatticeError as exc:
        raise AdmissibleError(str(exc)) from exc


def _unit(n: int, i: int, scale: int = 1) -> List[int]:
    return [scale if j == i else 0 for j in range(n)]


# ==========================================
# CHARACTER LABELING
# ==========================================

@dataclass(frozen=True)
class CharacterLabeling:
    """
    Explicit isomorphism G/Z^n ≅ X onto a canonical finite abelian group.

    ``generator_vectors[k]`` is the representative in [0,1)^n of the k-th
    generator of X.
    """
    group: FiniteAbelianGroup
    generator_vectors: Tuple[RationalVector, ...]
    n: int
    _exponent: int = field(repr=False)
    _r: IntMatrix = field(repr=False)
    _v: IntMatrix = field(repr=False)
    _positions: Tuple[int, ...] = field(repr=False)

    def representative(self, theta: Element) -> RationalVector:
        """Fractional representative in [0,1)^n of the class labeled theta."""
        theta = self.group.normalize(theta)
        out = [Fraction(0)] * self.n
        for k, vec in zip(theta, self.generator_vectors):
            for i in range(self.n):
                out[i] += k * vec[i]
        return tuple(frac_part(q) for q in out)

    def label(self, v: Sequence[Fraction]) -> Element:
        """Label of the class of v ∈ G in X."""
        w = [self._exponent * Fraction(q) for q in v]
        if any(q.denominator != 1 for q in w):
            raise AdmissibleError(f"vector {tuple(v)} is not in the group")
        # coordinates of w in the lattice basis: x = w·R/e
        e = self._exponent
        x = []
        for k in range(self.n):
            total = sum(int(w[i]) * self._r[i, k] for i in range(self.n))
            if total % e:
                raise AdmissibleError(f"vector {tuple(v)} is not in the group")
            x.append(total // e)
        xv = [sum(x[i] * self._v[i, j] for i in range(self.n)) for j in range(self.n)]
        return self.group.normalize([xv[p] for p in self._positions])


# ==========================================
# ADMISSIBLE GROUPS
# ==========================================

@dataclass(frozen=True)
class AdmissibleGroup:
    """
    Finitely generated subgroup of Q^n containing Z^n.

    Args:
        n: ambient rank
        exponent: smallest e ≥ 1 with e·G ⊆ Z^n
        lattice: Hermite normal form basis (n×n) of e·G
    """
    n: int
    exponent: int
    lattice: IntMatrix

    @classmethod
    def generated_by(cls, n: int, generators: Sequence[Sequence] = ()) -> "AdmissibleGroup":
        """The group Z^n + ⟨generators⟩; redundant generators are fine."""
        if n < 0:
            raise AdmissibleError("ambient rank must be nonnegative")
        gens = [as_rational_vector(g) for g in generators]
        for g in gens:
            if len(g) != n:
                raise RankMismatchError(f"generator {tuple(map(format_rational, g))} is not in rank {n}")
        den = common_denominator(gens)
        rows = [_unit(n, i, den) for i in range(n)]
        rows += [[int(q * den) for q in g] for g in gens]
        basis = hermite_normal_form(IntMatrix.from_rows(rows, cols=n))
        content = vector_gcd(basis.entries)
        shrink = gcd(den, content) if content else den
        exponent = den // shrink
        lattice = IntMatrix(basis.rows, basis.cols, tuple(x // shrink for x in basis.entries))
        return cls(n, exponent, lattice)

    @classmethod
    def integral(cls, n: int) -> "AdmissibleGroup":
        return cls.generated_by(n, [])

    @classmethod
    def from_dual_forms(cls, n: int, forms: Sequence[Sequence[int]]) -> "AdmissibleGroup":
        """
        The group {v ∈ Q^n : f·v ∈ Z for every form f}.

        The forms must span a full-rank sublattice of Z^n, otherwise the
        set is not finitely generated.
        """
        if n == 0:
            return cls.integral(0)
        for f in forms:
            if len(f) != n:
                raise RankMismatchError(f"form {tuple(f)} is not in rank {n}")
        hnf = hermite_normal_form(IntMatrix.from_rows([[int(x) for x in f] for f in forms], cols=n))
        if hnf.rows < n:
            raise AdmissibleError("dual forms do not have full rank")
        inverse = rational_inverse(hnf)
        columns = [tuple(inverse[i][j] for i in range(n)) for j in range(n)]
        return cls.generated_by(n, columns)

    def generators(self) -> List[RationalVector]:
        """Rows of the canonical lattice basis divided by the exponent."""
        e = self.exponent
        return [tuple(Fraction(x, e) for x in self.lattice.row(i)) for i in range(self.lattice.rows)]

    def torsion_generators(self) -> List[RationalVector]:
        """Canonical generators of G/Z^n, fractional parts, zero classes dropped."""
        out = []
        for g in self.generators():
            rep = tuple(frac_part(q) for q in g)
            if any(rep) and rep not in out:
                out.append(rep)
        return out

    def is_integral(self) -> bool:
        return self.exponent == 1

    def contains(self, v: Sequence) -> bool:
        vec = as_rational_vector(v)
        if len(vec) != self.n:
            raise RankMismatchError(f"vector of length {len(vec)} tested in rank {self.n}")
        if self.n == 0:
            return True
        e = self.exponent
        w = [q * e for q in vec]
        if any(q.denominator != 1 for q in w):
            return False
        # w ∈ e·G iff w ≡ x·H (mod e) for some integer x
        solution = solve_congruences(self.lattice.transpose(), [int(q) for q in w], [e] * self.n)
        return solution is not None

    def is_subgroup_of(self, other: "AdmissibleGroup") -> bool:
        if self.n != other.n:
            raise RankMismatchError(f"ranks {self.n} and {other.n} differ")
        return all(other.contains(g) for g in self.generators())

    def dual_forms(self) -> List[Tuple[int, ...]]:
        """Hermite basis of G^∨ = {f ∈ Z^n : f·g ∈ Z for all g ∈ G}."""
        if self.n == 0:
            return []
        relation = self._relation_matrix()
        forms = hermite_normal_form(relation.transpose())
        return [forms.row(i) for i in range(forms.rows)]

    def intersection(self, other: "AdmissibleGroup") -> "AdmissibleGroup":
        if self.n != other.n:
            raise RankMismatchError(f"ranks {self.n} and {other.n} differ")
        return AdmissibleGroup.from_dual_forms(self.n, self.dual_forms() + other.dual_forms())

    def join(self, other: "AdmissibleGroup") -> "AdmissibleGroup":
        if self.n != other.n:
            raise RankMismatchError(f"ranks {self.n} and {other.n} differ")
        return AdmissibleGroup.generated_by(self.n, self.generators() + other.generators())

    def quotient(self, indices: Sequence[int]) -> "AdmissibleGroup":
        """Image under the projection Q^n → Q^I (0-based positions, in order)."""
        idx = _check_indices(indices, self.n)
        gens = [tuple(g[i] for i in idx) for g in self.generators()]
        return AdmissibleGroup.generated_by(len(idx), gens)

    def _relation_matrix(self) -> IntMatrix:
        """R = e·H⁻¹, the coordinates of e·Z^n in the lattice basis H."""
        if self.n == 0:
            return IntMatrix.zeros(0, 0)
        inverse = rational_inverse(self.lattice)
        rows = []
        for i in range(self.n):
            row = [q * self.exponent for q in inverse[i]]
            if any(q.denominator != 1 for q in row):
                raise AdmissibleError("lattice does not contain e·Z^n")
            rows.append([int(q) for q in row])
        return IntMatrix.from_rows(rows, cols=self.n)

    def labeling(self) -> CharacterLabeling:
        """Isomorphism of G/Z^n with its canonical finite abelian group."""
        n = self.n
        relation = self._relation_matrix()
        form = smith_form(relation)
        diag = form.diagonal
        positions = tuple(i for i, d in enumerate(diag) if d > 1)
        group = FiniteAbelianGroup(tuple(diag[i] for i in positions))
        vectors = []
        for i in positions:
            row = form.v_inverse.row(i)
            lifted = [sum(row[k] * self.lattice[k, j] for k in range(n)) for j in range(n)]
            vectors.append(tuple(frac_part(Fraction(x, self.exponent)) for x in lifted))
        return CharacterLabeling(group, tuple(vectors), n, self.exponent, relation, form.v, positions)

    def stabilizer_group(self) -> FiniteAbelianGroup:
        return self.labeling().group

    def pushout_abelian(self, indices: Sequence[int]) -> CokernelResult:
        """
        The pushout Z^I ⊕_{Z^n} G of abelian groups, as a cokernel.

        Generators are the basis of Z^I followed by the canonical basis of
        G; relation j identifies the image of e_j on both sides.
        """
        idx = _check_indices(indices, self.n)
        relation = self._relation_matrix()
        columns = []
        for j in range(self.n):
            proj = [1 if idx[k] == j else 0 for k in range(len(idx))]
            columns.append(proj + [-relation[j, k] for k in range(self.n)])
        matrix = IntMatrix.from_columns(columns, rows=len(idx) + self.n) if columns \
            else IntMatrix.zeros(len(idx), 0)
        return cokernel(matrix)

    def describe(self) -> str:
        gens = self.torsion_generators()
        if not gens:
            return f"Z^{self.n}" if self.n != 1 else "Z"
        body = ", ".join("(" + ", ".join(format_rational(q) for q in g) + ")" for g in gens)
        return f"<Z^{self.n}, {body}>"


def _check_indices(indices: Sequence[int], n: int) -> Tuple[int, ...]:
    idx = tuple(int(i) for i in indices)
    if len(set(idx)) != len(idx):
        raise AdmissibleError(f"repeated index in {idx}")
    for i in idx:
        if not 0 <= i < n:
            raise RankMismatchError(f"index {i} outside rank {n}")
    return idx


# ==========================================
# ADMISSIBLE MONOIDS
# ==========================================

@dataclass(frozen=True)
class AdmissibleMonoid:
    """The monoid G ∩ Q^n_{≥0} of an admissible group G."""
    group: AdmissibleGroup

    @classmethod
    def generated_by(cls, n: int, generators: Sequence[Sequence] = ()) -> "AdmissibleMonoid":
        gens = [as_rational_vector(g) for g in generators]
        for g in gens:
            if any(q < 0 for q in g):
                raise AdmissibleError(f"monoid generator {tuple(map(format_rational, g))} has a negative entry")
        return cls(AdmissibleGroup.generated_by(n, gens))

    @classmethod
    def free(cls, n: int) -> "AdmissibleMonoid":
        return cls(AdmissibleGroup.integral(n))

    @classmethod
    def rank_one(cls, m: int) -> "AdmissibleMonoid":
        """The monoid (1/m)N."""
        return cls.generated_by(1, [[Fraction(1, m)]])

    @property
    def n(self) -> int:
        return self.group.n

    def contains(self, v: Sequence) -> bool:
        vec = as_rational_vector(v)
        if len(vec) != self.n:
            raise RankMismatchError(f"vector of length {len(vec)} tested in rank {self.n}")
        return all(q >= 0 for q in vec) and self.group.contains(vec)

    def quotient(self, indices: Sequence[int]) -> "AdmissibleMonoid":
        return AdmissibleMonoid(self.group.quotient(indices))

    def is_contained_in(self, other: "AdmissibleMonoid") -> bool:
        return self.group.is_subgroup_of(other.group)

    def generators(self) -> List[RationalVector]:
        return self.group.torsion_generators()

    def describe(self) -> str:
        if self.n == 0:
            return "0"
        if self.n == 1:
            e = self.group.exponent
            return "N" if e == 1 else f"(1/{e})N"
        envelope = free_envelope(self)
        if envelope.envelope == self:
            return " x ".join("N" if m == 1 else f"(1/{m})N" for m in envelope.orders)
        body = ", ".join("(" + ", ".join(format_rational(q) for q in g) + ")"
                         for g in self.generators())
        return f"<N^{self.n}, {body}>"


@dataclass(frozen=True)
class FreeEnvelope:
    orders: Tuple[int, ...]
    envelope: AdmissibleMonoid


def group_from_monoid(m: AdmissibleMonoid) -> AdmissibleGroup:
    return m.group


def monoid_from_group(g: AdmissibleGroup) -> AdmissibleMonoid:
    return AdmissibleMonoid(g)


def contains(m: AdmissibleMonoid, v: Sequence) -> bool:
    return m.contains(v)


def quotient(m: AdmissibleMonoid, indices: Sequence[int]) -> AdmissibleMonoid:
    return m.quotient(indices)


def pushout_abelian(g: AdmissibleGroup, indices: Sequence[int]) -> CokernelResult:
    return g.pushout_abelian(indices)


def free_envelope(m: AdmissibleMonoid) -> FreeEnvelope:
    """Orders m_i with N^{i} = (1/m_i)N, and the free monoid ⊕ (1/m_i)N."""
    orders = tuple(m.group.quotient([i]).exponent for i in range(m.n))
    gens = [[Fraction(1, orders[i]) if j == i else 0 for j in range(m.n)] for i in range(m.n)]
    return FreeEnvelope(orders, AdmissibleMonoid.generated_by(m.n, gens))


def _same_rank(a: AdmissibleMonoid, b: AdmissibleMonoid) -> None:
    if a.n != b.n:
        raise RankMismatchError(f"ranks {a.n} and {b.n} differ")


def equal(a: AdmissibleMonoid, b: AdmissibleMonoid) -> bool:
    _same_rank(a, b)
    return a == b


def is_contained(a: AdmissibleMonoid, b: AdmissibleMonoid) -> bool:
    _same_rank(a, b)
    return a.is_contained_in(b)


def stabilizer_group(m: AdmissibleMonoid) -> FiniteAbelianGroup:
    """Character group N^gp/Z^n of the stabilizer."""
    return m.group.stabilizer_group()


# ==========================================
# STALK ASSIGNMENTS
# ==========================================

@dataclass(frozen=True)
class Stalk:
    """Stalk at a marked point: its marking indices (sorted) and monoid."""
    markings: Tuple[int, ...]
    monoid: AdmissibleMonoid

    def __post_init__(self):
        object.__setattr__(self, "markings", tuple(sorted(int(i) for i in self.markings)))
        if self.monoid.n != len(self.markings):
            raise RankMismatchError(
                f"stalk monoid of rank {self.monoid.n} for {len(self.markings)} markings"
            )


@dataclass(frozen=True)
class StalkAssignment:
    """Marked point id → stalk."""
    stalks: Dict[str, Stalk] = field(default_factory=dict)

    def __getitem__(self, point_id: str) -> Stalk:
        return self.stalks[point_id]

    def __contains__(self, point_id: object) -> bool:
        return point_id in self.stalks

    def get(self, point_id: str) -> Optional[Stalk]:
        return self.stalks.get(point_id)

    def items(self):
        return sorted(self.stalks.items())

    def point_ids(self) -> List[str]:
        return sorted(self.stalks)
