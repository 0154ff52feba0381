import itertools
from fractions import Fraction

import numpy as np
import pytest

from exact_lattice import (
    DimensionMismatchError,
    FiniteAbelianGroup,
    GroupHom,
    IntMatrix,
    LatticeError,
    cokernel,
    ext1_to_Z,
    format_rational,
    frac_part,
    hermite_normal_form,
    integer_kernel,
    invariant_factors_sympy,
    lcm,
    parse_rational,
    rational_inverse,
    same_row_lattice,
    smith_form,
    smith_normal_form,
    solve_congruences,
)

NONSINGULAR = IntMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
RANK_THREE = IntMatrix.from_rows([[12, 6, 4, 8], [3, 9, 6, 12], [2, 16, 14, 28], [20, 10, 10, 20]])


def test_parse_and_format_rationals():
    assert parse_rational("2/4") == Fraction(1, 2)
    assert parse_rational(" -3 ") == Fraction(-3)
    assert parse_rational(5) == Fraction(5)
    assert format_rational(Fraction(6, 3)) == "2"
    assert format_rational(Fraction(-1, 2)) == "-1/2"
    for bad in ("", "1/0", "a/b", 0.5):
        with pytest.raises(LatticeError):
            parse_rational(bad)


def test_fractional_part_and_lcm():
    assert frac_part(Fraction(5, 2)) == Fraction(1, 2)
    assert frac_part(Fraction(-1, 3)) == Fraction(2, 3)
    assert frac_part(Fraction(4)) == 0
    assert lcm(4, 6) == 12
    assert lcm() == 1


def test_matrix_basics():
    m = IntMatrix.from_rows([[1, 2], [3, 4]])
    assert m.transpose().to_rows() == [[1, 3], [2, 4]]
    assert (m @ IntMatrix.identity(2)) == m
    assert m.apply([1, 1]) == (3, 7)
    assert m.determinant() == -2
    assert NONSINGULAR.determinant() == -144
    assert str(m) == "[1 2]\n[3 4]"
    with pytest.raises(DimensionMismatchError):
        IntMatrix.from_rows([[1, 2], [3]])
    with pytest.raises(DimensionMismatchError):
        m @ IntMatrix.identity(3)


def test_smith_form_transforms():
    form = smith_form(RANK_THREE)
    assert form.diagonal == (1, 10, 30, 0)
    assert form.rank == 3
    assert form.u @ RANK_THREE @ form.v == form.d
    assert abs(form.u.determinant()) == 1
    assert form.v @ form.v_inverse == IntMatrix.identity(4)

    u, d, v = smith_normal_form(NONSINGULAR)
    assert [d[i, i] for i in range(3)] == [2, 6, 12]
    assert u @ NONSINGULAR @ v == d


def test_smith_diagonal_agrees_with_sympy():
    for m in (NONSINGULAR, IntMatrix.from_rows([[4, 0], [0, 6]]), IntMatrix.from_rows([[2, 3, 5]])):
        ours = tuple(x for x in smith_form(m).diagonal if x)
        assert invariant_factors_sympy(m) == ours


def test_hermite_normal_form():
    assert hermite_normal_form(IntMatrix.from_rows([[2, 0], [1, 1]])).to_rows() == [[1, 1], [0, 2]]
    # zero rows are dropped
    assert hermite_normal_form(IntMatrix.from_rows([[1, 2], [2, 4]])).to_rows() == [[1, 2]]
    assert same_row_lattice(IntMatrix.from_rows([[2, 0], [1, 1]]), IntMatrix.from_rows([[1, 1], [1, -1]]))
    assert not same_row_lattice(IntMatrix.from_rows([[2, 0], [1, 1]]), IntMatrix.identity(2))


def test_integer_kernel():
    m = IntMatrix.from_rows([[1, 1, 0], [0, 2, 2]])
    kernel = integer_kernel(m)
    assert kernel.rows == 1
    assert m.apply(kernel.row(0)) == (0, 0)
    assert same_row_lattice(kernel, IntMatrix.from_rows([[1, -1, 1]]))
    assert integer_kernel(IntMatrix.identity(2)).rows == 0


def test_rational_inverse():
    inverse = rational_inverse(IntMatrix.from_rows([[2, 1], [0, 2]]))
    assert inverse == [[Fraction(1, 2), Fraction(-1, 4)], [0, Fraction(1, 2)]]
    with pytest.raises(DimensionMismatchError):
        rational_inverse(IntMatrix.from_rows([[1, 2]]))


def test_cokernel():
    result = cokernel(IntMatrix.diagonal([2, 3]))
    assert result.torsion == FiniteAbelianGroup((6,))
    assert result.free_rank == 0
    result = cokernel(IntMatrix.from_rows([[2], [0]]))
    assert result.torsion == FiniteAbelianGroup((2,))
    assert result.free_rank == 1


def test_solve_congruences():
    m = IntMatrix.from_rows([[2]])
    assert solve_congruences(m, [1], [4]) is None
    x = solve_congruences(m, [2], [4])
    assert (2 * x[0] - 2) % 4 == 0
    m = IntMatrix.from_rows([[1, 1], [1, -1]])
    # x + y and x - y always have the same parity
    assert solve_congruences(m, [1, 0], [2, 2]) is None
    x = solve_congruences(m, [1, 1], [2, 2])
    assert (x[0] + x[1]) % 2 == 1 and (x[0] - x[1]) % 2 == 1


def test_finite_abelian_group_canonical_form():
    assert FiniteAbelianGroup.from_orders([2, 3]) == FiniteAbelianGroup((6,))
    assert FiniteAbelianGroup.from_orders([4, 2, 1]) == FiniteAbelianGroup((2, 4))
    assert FiniteAbelianGroup.from_orders([1]).is_trivial()
    with pytest.raises(LatticeError):
        FiniteAbelianGroup((2, 3))
    with pytest.raises(LatticeError):
        FiniteAbelianGroup((1,))

    g = FiniteAbelianGroup((2, 4))
    assert str(g) == "Z/2 + Z/4"
    assert str(FiniteAbelianGroup()) == "0"
    assert g.order == 8 and g.exponent == 4
    elements = list(g.elements())
    assert elements[:3] == [(0, 0), (0, 1), (0, 2)]
    assert len(elements) == 8
    assert g.element_order((1, 2)) == 2
    assert g.add((1, 3), (1, 2)) == (0, 1)
    assert g.neg((1, 1)) == (1, 3)


def test_ext1_to_Z():
    assert ext1_to_Z(FiniteAbelianGroup((2,)), 2) == FiniteAbelianGroup((2, 2))
    assert ext1_to_Z(FiniteAbelianGroup((4,)), 0).is_trivial()
    assert ext1_to_Z(FiniteAbelianGroup((2, 6)), 1).order == 12


def test_small_smith_forms():
    assert smith_form(IntMatrix.from_rows([[2, 4], [6, 8]])).diagonal == (2, 4)
    assert smith_form(IntMatrix.identity(2)).diagonal == (1, 1)
    assert cokernel(IntMatrix.identity(2)).torsion.is_trivial()
    assert cokernel(IntMatrix.identity(2)).free_rank == 0


def test_random_smith_forms():
    rng = np.random.default_rng(17)
    for _ in range(25):
        rows, cols = (int(x) for x in rng.integers(1, 5, size=2))
        m = IntMatrix.from_array(rng.integers(-6, 7, size=(rows, cols)))
        form = smith_form(m)
        assert form.u @ m @ form.v == form.d
        assert abs(form.u.determinant()) == 1 and abs(form.v.determinant()) == 1
        nonzero = [d for d in form.diagonal if d]
        assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))
        # unimodular changes of basis leave the cokernel alone
        shuffled = form.u @ m
        assert cokernel(shuffled).torsion == cokernel(m).torsion


def test_random_congruences_against_brute_force():
    rng = np.random.default_rng(23)
    for _ in range(30):
        m = IntMatrix.from_array(rng.integers(-4, 5, size=(3, 3)))
        moduli = [int(x) for x in rng.integers(1, 5, size=3)]
        target = [int(x) for x in rng.integers(0, 4, size=3)]
        box = itertools.product(*(range(lcm(*moduli)) for _ in range(3)))
        exists = any(all((v - t) % q == 0 for v, t, q in zip(m.apply(x), target, moduli)) for x in box)
        x = solve_congruences(m, target, moduli)
        assert (x is not None) == exists
        if x is not None:
            assert all((v - t) % q == 0 for v, t, q in zip(m.apply(x), target, moduli))


def test_cokernel_coordinates():
    result = cokernel(IntMatrix.diagonal([2, 3]))
    torsion, free = result.coordinates([2, 0])
    assert result.torsion.element_order(torsion) == 1
    torsion, free = result.coordinates([1, 1])
    assert result.torsion.element_order(torsion) == 6
    assert free == ()


def test_group_homomorphisms():
    Z2, Z4 = FiniteAbelianGroup((2,)), FiniteAbelianGroup((4,))
    double = GroupHom(Z2, Z4, ((2,),))
    assert double((1,)) == (2,)
    assert double.is_injective() and not double.is_surjective()
    halve = GroupHom(Z4, Z2, ((1,),))
    assert halve.is_surjective() and not halve.is_injective()
    assert halve.compose(double).table() == {(0,): (0,), (1,): (0,)}
    with pytest.raises(LatticeError):
        GroupHom(Z2, Z4, ((1,),))
    with pytest.raises(DimensionMismatchError):
        GroupHom(Z2, Z4, ())


def test_ext1_of_a_sum():
    assert ext1_to_Z(FiniteAbelianGroup((2, 4)), 2).order == 64
    assert ext1_to_Z(FiniteAbelianGroup((2, 4)), 2) == FiniteAbelianGroup((2, 2, 4, 4))
