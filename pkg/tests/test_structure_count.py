from fractions import Fraction

import pytest

import structure_count
from exact_lattice import FiniteAbelianGroup
from local_monoid import LocalMonoid, carry_of_character, characters, pushout_to_local, upper_pairs, validate
from structure_count import CountingError, GroupMismatchError, count_structures, cyclic_extension_class

Z2 = FiniteAbelianGroup((2,))
Z3 = FiniteAbelianGroup((3,))


def test_count_over_mu2():
    d = LocalMonoid.from_upper_values(Z2, [1])
    result = count_structures(Z2, 2, d)
    assert result.status == "verified"
    assert (result.predicted, result.enumerated) == (2, 2)
    assert (result.injective, result.distinct_groups, result.monoid_exact) == (2, 2, 2)


def test_count_over_mu3(mu3_cocycle):
    result = count_structures(Z3, 2, mu3_cocycle)
    assert result.status == "verified"
    assert (result.predicted, result.enumerated) == (3, 3)
    assert result.psi.is_zero()
    # (1/3, 2/3) and (2/3, 1/3) give the same group
    assert (result.injective, result.distinct_groups, result.monoid_exact) == (2, 1, 2)


def test_single_marking(mu2_cocycle):
    result = count_structures(Z2, 1, mu2_cocycle)
    assert result.predicted == 1
    assert result.enumerated == 1


def test_count_for_non_cyclic_quotient(product_monoid):
    d = pushout_to_local(product_monoid)
    result = count_structures(FiniteAbelianGroup((2, 2)), 2, d)
    assert result.predicted == 4
    assert result.status == "verified"
    assert result.monoid_exact >= 1


def test_large_searches_stay_unverified(mu2_cocycle):
    result = count_structures(Z2, 2, mu2_cocycle, max_enumeration=3)
    assert result.status == "unverified"
    assert result.enumerated is None
    assert result.predicted == 2


def test_counting_errors(mu2_cocycle):
    with pytest.raises(GroupMismatchError):
        count_structures(Z3, 2, mu2_cocycle)
    with pytest.raises(CountingError):
        count_structures(Z2, 0, mu2_cocycle)
    with pytest.raises(CountingError):
        count_structures(Z2, 2, LocalMonoid.from_upper_values(Z2, [0]))


def test_cyclic_extension_class():
    assert cyclic_extension_class(2, (Fraction(1, 2), Fraction(0))) == Fraction(1, 2)
    assert cyclic_extension_class(2, (Fraction(1, 2), Fraction(1, 2))) == 0
    assert cyclic_extension_class(3, (Fraction(2, 3), Fraction(2, 3))) == Fraction(1, 3)
    # images need not be injective
    assert cyclic_extension_class(4, (Fraction(1, 2), Fraction(0))) == Fraction(1, 2)
    assert cyclic_extension_class(4, (Fraction(0), Fraction(0))) == 0


def test_every_class_of_z4_has_the_predicted_fiber():
    Z4 = FiniteAbelianGroup((4,))
    for chi in characters(Z4, include_zero=True):
        d = LocalMonoid(Z4, carry_of_character(chi, Z4))
        if not validate(d).valid:
            continue
        result = count_structures(Z4, 2, d)
        assert result.psi == chi
        assert (result.predicted, result.enumerated, result.status) == (4, 4, "verified")


def test_wrong_cocycles_show_up_as_a_mismatch(monkeypatch, mu2_cocycle):
    monkeypatch.setattr(structure_count, "pullback_to_local",
                        lambda X, assignment: LocalMonoid.from_upper_values(X, [0] * len(upper_pairs(X))))
    result = count_structures(Z2, 2, mu2_cocycle)
    assert result.enumerated == 0
    assert result.status == "mismatch"
