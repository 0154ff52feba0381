from fractions import Fraction

import pytest

from admissible import AdmissibleMonoid
from exact_lattice import FiniteAbelianGroup
from local_monoid import (
    Character,
    InvalidCocycleError,
    LocalMonoid,
    LocalMonoidError,
    QuotientInfiniteError,
    SubmonoidPresentation,
    characters,
    decide_pushout,
    extension_character,
    isomorphic,
    local_monoid_from_submonoid,
    pullback_to_local,
    pushout_to_local,
    pushout_to_local_along,
    upper_pairs,
    validate,
)
from random_instances import make_rng, random_admissible_monoid, random_cyclic_local_monoid

Z2 = FiniteAbelianGroup((2,))
Z3 = FiniteAbelianGroup((3,))
Z4 = FiniteAbelianGroup((4,))


def test_upper_pairs_order():
    assert upper_pairs(Z4) == [((1,), (1,)), ((1,), (2,)), ((1,), (3,)),
                               ((2,), (2,)), ((2,), (3,)), ((3,), (3,))]
    assert upper_pairs(FiniteAbelianGroup()) == []


def test_carry_table_access(z4_cocycle):
    assert z4_cocycle.c((2,), (1,)) == 1
    assert z4_cocycle.c((0,), (3,)) == 0
    assert z4_cocycle.upper_values() == (0, 1, 1, 2, 1, 0)
    assert z4_cocycle.describe() == "X = Z/4, carry = (0, 1, 1, 2, 1, 0)"
    with pytest.raises(LocalMonoidError):
        LocalMonoid.from_upper_values(Z4, [1, 2])


def test_monoid_law(mu2_cocycle):
    assert mu2_cocycle.add((0, (1,)), (0, (1,))) == (3, (0,))
    assert mu2_cocycle.multiple(3, (1, (1,))) == (6, (1,))


def test_validate_accepts_valid_tables(z4_cocycle, mu2_cocycle, mu3_cocycle):
    for d in (z4_cocycle, mu2_cocycle, mu3_cocycle, LocalMonoid.trivial()):
        assert validate(d).valid


def test_validate_reports_first_broken_axiom():
    report = validate(LocalMonoid.from_upper_values(Z2, [0]))
    assert (report.valid, report.axiom, report.elements) == (False, "sharpness", ((1,),))

    report = validate(LocalMonoid.from_upper_values(Z3, [1, 1, 1]))
    assert report.axiom == "associativity"
    assert report.elements == ((1,), (1,), (2,))

    table = {((1,), (1,)): 1, ((1,), (2,)): 2, ((2,), (1,)): 1, ((2,), (2,)): 1}
    assert validate(LocalMonoid(Z3, table)).axiom == "commutativity"

    assert validate(LocalMonoid(Z2, {((1,), (1,)): -1})).axiom == "nonnegativity"
    assert validate(LocalMonoid(Z3, {((1,), (1,)): 1})).axiom == "missing"
    assert validate(LocalMonoid(Z2, {((1,), (1,)): 1, ((0,), (1,)): 1})).axiom == "identity"
    assert validate(LocalMonoid(Z2, {((1,), (5,)): 1})).axiom == "malformed"


def test_pushout_of_admissible_monoids():
    d = pushout_to_local(AdmissibleMonoid.generated_by(3, [["1/2", "1/2", "1/2"]]))
    assert d.X == Z2
    assert d.upper_values() == (3,)
    d = pushout_to_local(AdmissibleMonoid.generated_by(2, [["1/3", "2/3"]]))
    assert d.upper_values() == (1, 2, 1)
    assert pushout_to_local(AdmissibleMonoid.free(2)) == LocalMonoid.trivial()


def test_pushout_along_explicit_labeling():
    m = AdmissibleMonoid.generated_by(2, [["1/3", "1/3"]])
    forward = {(0,): (0, 0), (1,): (Fraction(1, 3), Fraction(1, 3)), (2,): (Fraction(2, 3), Fraction(2, 3))}
    backward = {(0,): (0, 0), (1,): (Fraction(2, 3), Fraction(2, 3)), (2,): (Fraction(1, 3), Fraction(1, 3))}
    assert pushout_to_local_along(m, Z3, forward).upper_values() == (0, 2, 2)
    assert pushout_to_local_along(m, Z3, backward).upper_values() == (2, 2, 0)
    broken = dict(forward)
    broken[(2,)] = (Fraction(1, 3), Fraction(1, 3))
    with pytest.raises(LocalMonoidError):
        pushout_to_local_along(m, Z3, broken)


def test_pullback_along_any_homomorphism():
    forward = {(0,): (0, 0), (1,): (Fraction(1, 3), Fraction(1, 3)), (2,): (Fraction(2, 3), Fraction(2, 3))}
    assert pullback_to_local(Z3, forward).upper_values() == (0, 2, 2)
    # θ ↦ (θ/2, 0) kills 2, so the table is a group cocycle but not sharp
    halves = {(k,): (Fraction(k, 2), Fraction(0)) for k in range(4)}
    d = pullback_to_local(Z4, halves)
    assert d.upper_values() == (1, 0, 1, 0, 0, 1)
    assert validate(d).axiom == "sharpness"
    assert extension_character(d) == Character((Fraction(1, 2),))


def test_isomorphic_up_to_relabeling():
    a = LocalMonoid.from_upper_values(Z3, [0, 2, 2])
    b = LocalMonoid.from_upper_values(Z3, [2, 2, 0])
    phi = isomorphic(a, b)
    assert phi == {(0,): (0,), (1,): (2,), (2,): (1,)}
    assert isomorphic(a, LocalMonoid.from_upper_values(Z3, [1, 2, 1])) is None
    assert isomorphic(a, LocalMonoid.from_upper_values(Z2, [1])) is None


def test_characters_and_extension_class(mu2_cocycle, mu3_cocycle, z4_cocycle):
    assert characters(Z2) == [Character((Fraction(1, 2),))]
    assert len(characters(FiniteAbelianGroup((2, 2)), include_zero=True)) == 4
    assert Character((Fraction(1, 4),))((3,)) == Fraction(3, 4)
    assert extension_character(mu2_cocycle) == Character((Fraction(1, 2),))
    assert extension_character(mu3_cocycle).is_zero()
    assert extension_character(z4_cocycle) == Character((Fraction(1, 2),))


def test_decide_finds_minimal_witness(mu2_cocycle):
    decision = decide_pushout(mu2_cocycle)
    assert decision.representable
    assert decision.multiplicities == ((Character((Fraction(1, 2),)), 3),)
    assert decision.witness == AdmissibleMonoid.generated_by(3, [["1/2", "1/2", "1/2"]])
    assert pushout_to_local_along(decision.witness, mu2_cocycle.X, decision.labeling) == mu2_cocycle


def test_decide_uses_two_characters(mu3_cocycle):
    decision = decide_pushout(mu3_cocycle)
    assert decision.representable
    assert [(chi.describe(), m) for chi, m in decision.multiplicities] == [("(1/3)", 1), ("(2/3)", 1)]
    assert decision.witness.n == 2
    assert pushout_to_local_along(decision.witness, Z3, decision.labeling) == mu3_cocycle


def test_decide_certifies_infeasibility(z4_cocycle):
    decision = decide_pushout(z4_cocycle)
    assert not decision.representable
    assert not decision.raw_feasible
    assert decision.witness is None
    certificate = decision.certificate
    assert certificate.pruned_total >= 1
    assert not certificate.truncated
    assert certificate.pruned[0].reason


def test_decide_truncates_certificate(z4_cocycle):
    certificate = decide_pushout(z4_cocycle, certificate_limit=0).certificate
    assert certificate.pruned == ()
    assert certificate.truncated


def test_decide_rejects_invalid_cocycle():
    with pytest.raises(InvalidCocycleError) as info:
        decide_pushout(LocalMonoid.from_upper_values(Z2, [0]))
    assert info.value.report.axiom == "sharpness"


def z4_submonoid(designated=(2, 1), images=((1,), (2,))):
    return SubmonoidPresentation((2,), ((1, 0), (1, 1)), tuple(designated), Z4, tuple(images))


def test_submonoid_carry_cocycle(z4_cocycle):
    assert local_monoid_from_submonoid(z4_submonoid()) == z4_cocycle


def test_submonoid_errors():
    with pytest.raises(LocalMonoidError):
        local_monoid_from_submonoid(z4_submonoid(designated=(2, 0)))
    with pytest.raises(QuotientInfiniteError):
        local_monoid_from_submonoid(z4_submonoid(designated=(0, 0)))
    unsharp = SubmonoidPresentation((2,), ((1, 0), (0, 1)), (1, 0), Z2, ((0,), (1,)))
    with pytest.raises(InvalidCocycleError):
        local_monoid_from_submonoid(unsharp)


def test_separation_never_fails_on_valid_cocycles():
    rng = make_rng(19)
    cocycles = [random_cyclic_local_monoid(rng, order) for order in (2, 3, 4) for _ in range(4)]
    monoids = [random_admissible_monoid(rng, max_rank=3, max_denominator=4, max_generators=2) for _ in range(8)]
    cocycles += [d for d in map(pushout_to_local, monoids) if d.X.order <= 12]
    for d in cocycles:
        decision = decide_pushout(d)
        assert decision.separation_failures == 0
        assert decision.representable == decision.raw_feasible
        if decision.representable:
            assert pushout_to_local_along(decision.witness, d.X, decision.labeling) == d
