"""
Counting Admissible Structures over a Local Monoid
==================================================

Fix a local monoid D with quotient A and n markings colliding at one
point. Admissible groups G ⊆ Q^n whose pushout along the sum map
Z^n → Z recovers D^gp as an extension of A by Z correspond to
homomorphisms φ: A → (Q/Z)^n with Σ φ = ψ, where ψ ∈ Hom(A, Q/Z) is the
extension class of D. The fiber is a torsor under
Ext^1(A, ker Σ), so it has |A|^{n-1} elements.

count_structures reports that prediction and, when the search space is
small enough, the enumerated count plus statistics over the
realizations.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from admissible import AdmissibleMonoid, RationalVector
from exact_lattice import Element, FiniteAbelianGroup, ext1_to_Z, frac_part
from local_monoid import (
    Character,
    LocalMonoid,
    extension_character,
    pullback_to_local,
    pushout_to_local_along,
    validate,
)

logger = logging.getLogger(__name__)


class CountingError(ValueError):
    """Base error for structure counting."""


class GroupMismatchError(CountingError):
    """The local monoid's quotient is not the given group."""


@dataclass(frozen=True)
class CountResult:
    """
    Args:
        predicted: |A|^{n-1}
        enumerated: homomorphisms whose pushout has extension class ψ, or None if skipped
        status: "verified", "mismatch" or "unverified"
        injective: realizations with φ injective, i.e. G/Z^n ≅ A
        distinct_groups: distinct admissible groups among injective ones
        monoid_exact: injective realizations whose pushout is exactly D
        psi: the extension class of D
    """
    group: FiniteAbelianGroup
    n: int
    predicted: int
    enumerated: Optional[int]
    status: str
    injective: Optional[int] = None
    distinct_groups: Optional[int] = None
    monoid_exact: Optional[int] = None
    psi: Optional[Character] = None


def cyclic_extension_class(order: int, image: RationalVector) -> Fraction:
    """
    Extension class ψ(1) of Z ⊕_{Z^n} G pulled back along Z/order → (Q/Z)^n,
    1 ↦ image, read off the carry cocycle of the pushout.
    """
    X = FiniteAbelianGroup((order,))
    assignment = {(j,): tuple(j * q for q in image) for j in range(order)}
    return extension_character(pullback_to_local(X, assignment)).values[0]


def _matching_images(order: int, n: int, target: Fraction) -> List[RationalVector]:
    """Images of a generator of order ``order`` whose extension class is target."""
    out = []
    for numerators in itertools.product(range(order), repeat=n):
        image = tuple(Fraction(k, order) for k in numerators)
        if cyclic_extension_class(order, image) == target:
            out.append(image)
    return out


def _images(A: FiniteAbelianGroup, generator_images: Tuple[RationalVector, ...], n: int) -> Dict[Element, RationalVector]:
    images = {}
    for theta in A.elements():
        vec = [Fraction(0)] * n
        for k, img in zip(theta, generator_images):
            for i in range(n):
                vec[i] += k * img[i]
        images[theta] = tuple(frac_part(q) for q in vec)
    return images


def count_structures(A: FiniteAbelianGroup, n: int, d: LocalMonoid,
                     max_enumeration: int = 1000000) -> CountResult:
    """
    Predicted and, for exp(A)^n·|A| ≤ max_enumeration, enumerated size of
    the fiber over d. Statistics over individual realizations are only
    gathered when |A|^{n-1} ≤ max_enumeration as well.
    """
    if n < 1:
        raise CountingError("at least one marking is required")
    if d.X != A:
        raise GroupMismatchError(f"local monoid has quotient {d.X}, expected {A}")
    report = validate(d)
    if not report.valid:
        raise CountingError(report.describe())

    predicted = ext1_to_Z(A, n - 1).order
    psi = extension_character(d)
    if A.exponent ** n * A.order > max_enumeration:
        logger.info("counting for %s, n=%d left unverified", A, n)
        return CountResult(A, n, predicted, None, "unverified", psi=psi)

    # Hom(A, (Q/Z)^n) is the product over generators, and so is the class
    fibers = [_matching_images(order, n, psi.values[k]) for k, order in enumerate(A.invariant_factors)]
    enumerated = 1
    for fiber in fibers:
        enumerated *= len(fiber)
    status = "verified" if enumerated == predicted else "mismatch"
    if status == "mismatch":
        logger.warning("counting mismatch for %s, n=%d: %d != %d", A, n, enumerated, predicted)
    if enumerated > max_enumeration:
        return CountResult(A, n, predicted, enumerated, status, psi=psi)

    injective = 0
    exact = 0
    groups = set()
    for choice in itertools.product(*fibers):
        images = _images(A, choice, n)
        if len(set(images.values())) != A.order:
            continue
        injective += 1
        monoid = AdmissibleMonoid.generated_by(n, list(choice))
        groups.add(monoid)
        if pushout_to_local_along(monoid, A, images) == d:
            exact += 1
    logger.info("counted %d realizations for %s, n=%d", enumerated, A, n)
    return CountResult(A, n, predicted, enumerated, status, injective, len(groups), exact, psi)
