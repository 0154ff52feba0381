"""
Exact Lattice Arithmetic
========================

Integer matrices, Smith and Hermite normal forms, integer kernels,
linear congruences and finite abelian groups in invariant-factor form.

Everything here is exact: entries are Python integers (numpy arrays are
only used with dtype=object so products never overflow), rationals are
``fractions.Fraction``. Values are immutable once built.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy import ZZ
from sympy.matrices.normalforms import invariant_factors

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]
Element = Tuple[int, ...]


class LatticeError(ValueError):
    """Base error for exact lattice computations."""


class DimensionMismatchError(LatticeError):
    """Raised when matrix or vector shapes do not agree."""


# ==========================================
# RATIONALS
# ==========================================

def parse_rational(text) -> Fraction:
    """Parse "p/q", "p" or an int into a Fraction in lowest terms."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise LatticeError(f"not a rational: {text!r}")
    value = text.strip()
    if not value:
        raise LatticeError("empty rational")
    try:
        if "/" in value:
            num, den = value.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise LatticeError(f"not a rational: {text!r}") from exc


def format_rational(q: Fraction) -> str:
    """Render a rational as "p/q", or "p" when it is an integer."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def frac_part(q: Fraction) -> Fraction:
    """Representative of q + Z in [0, 1)."""
    return q - (q.numerator // q.denominator)


def lcm(*values: int) -> int:
    return reduce(lambda a, b: a * b // gcd(a, b) if a and b else 0, values, 1)


def common_denominator(vectors: Sequence[Sequence[Fraction]]) -> int:
    """Least common multiple of all denominators (1 for integral input)."""
    den = 1
    for vec in vectors:
        for q in vec:
            den = lcm(den, Fraction(q).denominator)
    return den


# ==========================================
# INTEGER MATRICES
# ==========================================

@dataclass(frozen=True)
class IntMatrix:
    """Integer matrix stored row-major as a tuple of Python ints."""
    rows: int
    cols: int
    entries: Tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DimensionMismatchError("negative matrix shape")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatchError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )
        object.__setattr__(self, "entries", tuple(int(x) for x in self.entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            if not rows:
                raise DimensionMismatchError("column count needed for an empty matrix")
            cols = len(rows[0])
        for r in rows:
            if len(r) != cols:
                raise DimensionMismatchError("ragged rows")
        return cls(len(rows), cols, tuple(int(x) for r in rows for x in r))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntMatrix":
        return cls.from_rows([[int(c[i]) for c in columns] for i in range(rows)], cols=len(columns))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def diagonal(cls, values: Sequence[int]) -> "IntMatrix":
        n = len(values)
        return cls(n, n, tuple(values[i] if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def from_array(cls, array) -> "IntMatrix":
        arr = np.asarray(array, dtype=object)
        r, c = arr.shape
        return cls(r, c, tuple(int(x) for x in arr.reshape(-1)))

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> Vector:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> List[List[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def to_array(self) -> np.ndarray:
        arr = np.empty((self.rows, self.cols), dtype=object)
        for i in range(self.rows):
            for j in range(self.cols):
                arr[i, j] = self[i, j]
        return arr

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows,
                         tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionMismatchError(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return IntMatrix.zeros(self.rows, other.cols)
        return IntMatrix.from_array(self.to_array().dot(other.to_array()))

    def apply(self, vector: Sequence[int]) -> Vector:
        """Matrix times column vector."""
        if len(vector) != self.cols:
            raise DimensionMismatchError("vector length does not match column count")
        return tuple(sum(self[i, j] * int(vector[j]) for j in range(self.cols))
                     for i in range(self.rows))

    def determinant(self) -> int:
        if self.rows != self.cols:
            raise DimensionMismatchError("determinant of a non-square matrix")
        return _bareiss_determinant(self)

    def __str__(self) -> str:
        return "\n".join("[" + " ".join(str(x) for x in self.row(i)) + "]" for i in range(self.rows))


def _bareiss_determinant(m: IntMatrix) -> int:
    """Fraction-free elimination; every division below is exact."""
    a = m.to_rows()
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n):
        pivot = next((i for i in range(k, n) if a[i][k] != 0), None)
        if pivot is None:
            return 0
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# ==========================================
# NORMAL FORMS
# ==========================================

@dataclass(frozen=True)
class SmithForm:
    """U·m·V = D with U, V unimodular; v_inverse is V⁻¹."""
    u: IntMatrix
    d: IntMatrix
    v: IntMatrix
    v_inverse: IntMatrix

    @property
    def diagonal(self) -> Tuple[int, ...]:
        return tuple(self.d[i, i] for i in range(min(self.d.rows, self.d.cols)))

    @property
    def rank(self) -> int:
        return sum(1 for x in self.diagonal if x != 0)


def smith_form(m: IntMatrix) -> SmithForm:
    """
    Smith normal form with transforms.

    Pivot rule: smallest nonzero absolute value in the active block,
    ties broken by lowest row and then lowest column.
    """
    r, c = m.rows, m.cols
    a = m.to_rows()
    u = IntMatrix.identity(r).to_rows()
    v = IntMatrix.identity(c).to_rows()
    v_inv = IntMatrix.identity(c).to_rows()

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]
        v_inv[i], v_inv[j] = v_inv[j], v_inv[i]

    def add_row(target, source, q):
        # row_target += q * row_source
        a[target] = [x + q * y for x, y in zip(a[target], a[source])]
        u[target] = [x + q * y for x, y in zip(u[target], u[source])]

    def add_col(target, source, q):
        # col_target += q * col_source
        for row in a:
            row[target] += q * row[source]
        for row in v:
            row[target] += q * row[source]
        v_inv[source] = [x - q * y for x, y in zip(v_inv[source], v_inv[target])]

    for t in range(min(r, c)):
        while True:
            best = None
            for i in range(t, r):
                for j in range(t, c):
                    if a[i][j] != 0:
                        key = (abs(a[i][j]), i, j)
                        if best is None or key < best:
                            best = key
            if best is None:
                break
            _, pi, pj = best
            if pi != t:
                swap_rows(t, pi)
            if pj != t:
                swap_cols(t, pj)
            pivot = a[t][t]
            clean = True
            for i in range(t + 1, r):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // pivot))
                    clean = clean and a[i][t] == 0
            for j in range(t + 1, c):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // pivot))
                    clean = clean and a[t][j] == 0
            if not clean:
                continue
            offender = next(((i, j) for i in range(t + 1, r) for j in range(t + 1, c)
                             if a[i][j] % pivot), None)
            if offender is not None:
                add_row(t, offender[0], 1)
                continue
            if pivot < 0:
                a[t] = [-x for x in a[t]]
                u[t] = [-x for x in u[t]]
            break

    return SmithForm(
        u=IntMatrix.from_rows(u, cols=r),
        d=IntMatrix.from_rows(a, cols=c),
        v=IntMatrix.from_rows(v, cols=c),
        v_inverse=IntMatrix.from_rows(v_inv, cols=c),
    )


def smith_normal_form(m: IntMatrix) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (U, D, V) with U·m·V = D diagonal, entries a divisibility chain."""
    form = smith_form(m)
    return form.u, form.d, form.v


def hermite_normal_form(m: IntMatrix) -> IntMatrix:
    """
    Row-style Hermite normal form: the nonzero rows of an echelon basis of
    the row lattice, pivots positive, entries above a pivot reduced into
    [0, pivot).
    """
    a = m.to_rows()
    n_rows, n_cols = m.rows, m.cols
    r = 0
    for j in range(n_cols):
        if r >= n_rows:
            break
        while True:
            nonzero = [i for i in range(r, n_rows) if a[i][j] != 0]
            if not nonzero:
                break
            p = min(nonzero, key=lambda i: (abs(a[i][j]), i))
            if p != r:
                a[r], a[p] = a[p], a[r]
            done = True
            for i in range(r + 1, n_rows):
                if a[i][j]:
                    q = a[i][j] // a[r][j]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    done = done and a[i][j] == 0
            if done:
                break
        if a[r][j] == 0:
            continue
        if a[r][j] < 0:
            a[r] = [-x for x in a[r]]
        for i in range(r):
            q = a[i][j] // a[r][j]
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
    return IntMatrix.from_rows(a[:r], cols=n_cols)


def integer_kernel(m: IntMatrix) -> IntMatrix:
    """Basis of {x ∈ Z^cols : m·x = 0}, returned as the rows of a matrix."""
    form = smith_form(m)
    rank = form.rank
    basis = [form.v.column(j) for j in range(rank, m.cols)]
    return IntMatrix.from_rows(basis, cols=m.cols)


def same_row_lattice(a: IntMatrix, b: IntMatrix) -> bool:
    """True when the rows of a and b span the same sublattice."""
    if a.cols != b.cols:
        raise DimensionMismatchError("lattices live in different ambient ranks")
    return hermite_normal_form(a) == hermite_normal_form(b)


# ==========================================
# FINITE ABELIAN GROUPS
# ==========================================

@dataclass(frozen=True)
class FiniteAbelianGroup:
    """
    Finite abelian group ⊕ Z/d_i with d_1 | d_2 | ... | d_k, each d_i ≥ 2.

    Elements are tuples of residues, one per invariant factor.
    """
    invariant_factors: Tuple[int, ...] = ()

    def __post_init__(self):
        factors = tuple(int(d) for d in self.invariant_factors)
        for d in factors:
            if d < 2:
                raise LatticeError(f"invariant factor {d} must be at least 2")
        for a, b in zip(factors, factors[1:]):
            if b % a:
                raise LatticeError(f"invariant factors {factors} do not form a divisibility chain")
        object.__setattr__(self, "invariant_factors", factors)

    @classmethod
    def from_orders(cls, orders: Sequence[int]) -> "FiniteAbelianGroup":
        """Canonical form of ⊕ Z/m_i for arbitrary positive m_i."""
        return cokernel(IntMatrix.diagonal([int(m) for m in orders])).torsion

    @classmethod
    def cyclic(cls, d: int) -> "FiniteAbelianGroup":
        return cls(()) if d == 1 else cls((d,))

    @property
    def order(self) -> int:
        return reduce(lambda a, b: a * b, self.invariant_factors, 1)

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    @property
    def num_generators(self) -> int:
        return len(self.invariant_factors)

    def is_trivial(self) -> bool:
        return not self.invariant_factors

    def zero(self) -> Element:
        return (0,) * len(self.invariant_factors)

    def generators(self) -> List[Element]:
        k = len(self.invariant_factors)
        return [tuple(1 if i == j else 0 for j in range(k)) for i in range(k)]

    def normalize(self, elem: Sequence[int]) -> Element:
        if len(elem) != len(self.invariant_factors):
            raise DimensionMismatchError(f"element {tuple(elem)} has wrong length for {self}")
        return tuple(int(x) % d for x, d in zip(elem, self.invariant_factors))

    def add(self, x: Element, y: Element) -> Element:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.invariant_factors))

    def neg(self, x: Element) -> Element:
        return tuple((-a) % d for a, d in zip(x, self.invariant_factors))

    def scale(self, k: int, x: Element) -> Element:
        return tuple((k * a) % d for a, d in zip(x, self.invariant_factors))

    def element_order(self, x: Element) -> int:
        return lcm(*(d // gcd(a, d) for a, d in zip(x, self.invariant_factors)))

    def elements(self) -> Iterator[Element]:
        """All elements, lexicographic in the residue tuples."""
        return itertools.product(*(range(d) for d in self.invariant_factors))

    def __str__(self) -> str:
        if not self.invariant_factors:
            return "0"
        return " + ".join(f"Z/{d}" for d in self.invariant_factors)


@dataclass(frozen=True)
class GroupHom:
    """Homomorphism given by the images of the source generators."""
    source: FiniteAbelianGroup
    target: FiniteAbelianGroup
    images: Tuple[Element, ...]

    def __post_init__(self):
        if len(self.images) != self.source.num_generators:
            raise DimensionMismatchError(
                f"{len(self.images)} generator images for {self.source.num_generators} generators"
            )
        images = tuple(self.target.normalize(img) for img in self.images)
        for d, img in zip(self.source.invariant_factors, images):
            if self.target.scale(d, img) != self.target.zero():
                raise LatticeError(f"image {img} of a generator of order {d} is not killed by {d}")
        object.__setattr__(self, "images", images)

    def __call__(self, x: Sequence[int]) -> Element:
        x = self.source.normalize(x)
        out = self.target.zero()
        for k, img in zip(x, self.images):
            out = self.target.add(out, self.target.scale(k, img))
        return out

    def table(self) -> Dict[Element, Element]:
        return {x: self(x) for x in self.source.elements()}

    def is_injective(self) -> bool:
        return len(set(self.table().values())) == self.source.order

    def is_surjective(self) -> bool:
        return len(set(self.table().values())) == self.target.order

    def compose(self, other: "GroupHom") -> "GroupHom":
        """self ∘ other."""
        if other.target != self.source:
            raise DimensionMismatchError("homomorphisms do not compose")
        return GroupHom(other.source, self.target, tuple(self(img) for img in other.images))


@dataclass(frozen=True)
class CokernelResult:
    """coker(m) ≅ torsion ⊕ Z^free_rank, with coordinates from the SNF."""
    torsion: FiniteAbelianGroup
    free_rank: int
    form: SmithForm = field(repr=False, compare=False)

    def coordinates(self, y: Sequence[int]) -> Tuple[Element, Vector]:
        """Torsion residues and free part of the class of y ∈ Z^rows."""
        uy = self.form.u.apply(y)
        diag = self.form.diagonal
        rank = self.form.rank
        torsion = tuple(uy[i] % diag[i] for i in range(rank) if diag[i] > 1)
        free = tuple(uy[rank:])
        return torsion, free


def cokernel(m: IntMatrix) -> CokernelResult:
    """Cokernel of m: Z^cols → Z^rows as invariant factors > 1 plus free rank."""
    form = smith_form(m)
    factors = tuple(d for d in form.diagonal if d > 1)
    return CokernelResult(FiniteAbelianGroup(factors), m.rows - form.rank, form)


def ext1_to_Z(a: FiniteAbelianGroup, r: int = 1) -> FiniteAbelianGroup:
    """Ext^1(a, Z^r) ≅ a^r."""
    if r < 0:
        raise LatticeError("rank must be nonnegative")
    return FiniteAbelianGroup.from_orders(list(a.invariant_factors) * r)


# ==========================================
# CONGRUENCES
# ==========================================

def solve_congruences(m: IntMatrix, target: Sequence[int],
                      moduli: Sequence[int]) -> Optional[Vector]:
    """
    Find x ∈ Z^cols with (m·x)_i ≡ target_i mod moduli_i, or None.

    The system is lifted to the integer system [m | -diag(moduli)]·(x, y) =
    target and solved through its Smith form.
    """
    if len(target) != m.rows or len(moduli) != m.rows:
        raise DimensionMismatchError("target and moduli must have one entry per row")
    if any(int(q) <= 0 for q in moduli):
        raise LatticeError("moduli must be positive")
    rows = [list(m.row(i)) + [-int(moduli[i]) if k == i else 0 for k in range(m.rows)]
            for i in range(m.rows)]
    lifted = IntMatrix.from_rows(rows, cols=m.cols + m.rows)
    form = smith_form(lifted)
    ut = form.u.apply([int(t) for t in target])
    diag = form.diagonal
    w = [0] * lifted.cols
    for i, value in enumerate(ut):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if value != 0:
                return None
            continue
        if value % d:
            logger.debug("congruence system has no solution (row %d)", i)
            return None
        w[i] = value // d
    z = form.v.apply(w)
    return tuple(z[j] % lcm(*[int(q) for q in moduli]) for j in range(m.cols))


def rational_inverse(m: IntMatrix) -> List[List[Fraction]]:
    """Exact inverse of a nonsingular integer matrix."""
    if m.rows != m.cols:
        raise DimensionMismatchError("inverse of a non-square matrix")
    inv = sympy.Matrix(m.to_rows()).inv()
    return [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(m.cols)]
            for i in range(m.rows)]


def invariant_factors_sympy(m: IntMatrix) -> Tuple[int, ...]:
    """Nonzero invariant factors computed by sympy, as an independent check."""
    if m.rows == 0 or m.cols == 0:
        return ()
    factors = invariant_factors(sympy.Matrix(m.to_rows()), domain=ZZ)
    return tuple(abs(int(f)) for f in factors if int(f) != 0)


def lattice_rank(m: IntMatrix) -> int:
    return smith_form(m).rank


def vector_gcd(values: Sequence[int]) -> int:
    return reduce(gcd, (abs(int(v)) for v in values), 0)
