"""Totally ramified extensions of Witt rings: pi-power coordinates.

The ring is W(k)[x]/E(x) for an Eisenstein polynomial E, one copy per
embedding tau.  Division by pi is exact arithmetic on coordinates, and the
unit u with p = u * pi^e is the pivot for all of it.
"""

import random
from fractions import Fraction

import pytest

from ramcrystals import (
    ABOVE_PRECISION,
    BaseField,
    InvalidDatum,
    LocalField,
    NotDivisible,
)


@pytest.fixture(scope="module")
def ram(base3):
    """Totally ramified of degree 3 over Q_3 (default Eisenstein x^3 - 3)."""
    return LocalField(base3, 1, 3)


@pytest.fixture(scope="module")
def mixed(base9):
    """f = 2, e = 2 over W(F_9)."""
    return LocalField(base9, 2, 2)


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------


def test_f_must_divide_n(base3):
    with pytest.raises(InvalidDatum):
        LocalField(base3, 2, 1)


def test_eisenstein_must_be_monic(base3):
    with pytest.raises(InvalidDatum):
        LocalField(base3, 1, 2, eisenstein=[-3, 0, 2])


def test_eisenstein_constant_needs_valuation_one(base3):
    with pytest.raises(InvalidDatum):
        LocalField(base3, 1, 2, eisenstein=[-9, 0, 1])
    with pytest.raises(InvalidDatum):
        LocalField(base3, 1, 2, eisenstein=[1, 0, 1])


def test_eisenstein_middle_coefficients_divisible_by_p(base3):
    with pytest.raises(InvalidDatum):
        LocalField(base3, 1, 2, eisenstein=[-3, 1, 1])


def test_eisenstein_coefficients_fixed_by_sigma_f(base9):
    # with f = 1 every coefficient must be a plain p-adic integer
    with pytest.raises(InvalidDatum):
        LocalField(base9, 1, 2, eisenstein=[[-3, 3], [3, 0], [1, 0]])
    # with f = 2 = n the same coefficients are legal
    F = LocalField(base9, 2, 2, eisenstein=[[-3, 3], [3, 0], [1, 0]])
    assert F.eisenstein_raw == ((-3, 3), 3, 1)


def test_eisenstein_raw_kept_exact_and_canonical(base3):
    F = LocalField(base3, 1, 2, eisenstein=[[-3], [3], [1]])
    # coordinate vectors supported on the first slot canonicalize to ints,
    # and the raw tuple is never reduced modulo p^N
    assert F.eisenstein_raw == (-3, 3, 1)
    assert F.with_precision(40).eisenstein_raw == (-3, 3, 1)


def test_default_eisenstein_has_unit_exactly_one(ram):
    assert ram.u(0) == 1


def test_same_ring_distinguishes_eisenstein(base3):
    F1 = LocalField(base3, 1, 2)
    F2 = LocalField(base3, 1, 2, eisenstein=[-3, 3, 1])
    assert F1.same_ring(F1.with_precision(20))
    assert not F1.same_ring(F2)


# ---------------------------------------------------------------------------
# the unit u with p = u * pi^e
# ---------------------------------------------------------------------------


def test_unit_relation_default(ram):
    p_elem = ram.from_int(3, 0)
    assert ram.u(0) * ram.pi(0) ** 3 == p_elem


def test_unit_relation_nontrivial_eisenstein(base3):
    F = LocalField(base3, 1, 2, eisenstein=[-3, 3, 1])
    assert F.u(0) * F.pi(0) ** 2 == F.from_int(3, 0)


def test_dividing_p_by_full_pi_power_gives_unit(base3):
    # frozen: p / pi^e is the unit u itself (p = u * pi^e)
    F = LocalField(base3, 1, 2, eisenstein=[-3, 3, 1])
    p_elem = F.from_int(3, 0)
    assert p_elem.div_pi(2) == F.u(0)


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------


def test_ring_identities(ram):
    rng = random.Random(11)
    x = ram.random_elem(rng, 0)
    y = ram.random_elem(rng, 0)
    z = ram.random_elem(rng, 0)
    assert (x + y) * z == x * z + y * z
    assert x * y == y * x
    assert (x - x).is_zero()


def test_pi_is_nilpotent_mod_p_to_the_N(ram):
    # pi^(e*N) = (p/u)^N = 0 at precision N
    prec = ram.base.N
    assert (ram.pi(0) ** (3 * prec)).is_zero()


def test_valuation_grading(ram):
    pi = ram.pi(0)
    assert pi.valuation() == Fraction(1, 3)
    assert (pi ** 2).valuation() == Fraction(2, 3)
    assert ram.from_int(3, 0).valuation() == 1
    assert ram.one(0).valuation() == 0
    assert ram.zero(0).valuation() is ABOVE_PRECISION


def test_div_pi_inverts_multiplication(ram):
    rng = random.Random(5)
    x = ram.random_elem(rng, 0)
    for j in (1, 2, 3, 5):
        y = x * ram.pi_pow(0, j)
        back = y.div_pi(j)
        # division costs ceil(j/e) digits; compare at the surviving precision
        assert back == x.at_prec(back.prec)


def test_div_pi_rejects_non_divisible(ram):
    with pytest.raises(NotDivisible):
        ram.one(0).div_pi(1)


def test_div_pi_negative_multiplies(ram):
    x = ram.one(0)
    assert x.div_pi(-2) == ram.pi_pow(0, 2)


def test_unit_part_factorization(ram):
    rng = random.Random(7)
    w = ram.random_unit(rng, 0)
    x = w * ram.pi_pow(0, 4)
    got = x.unit_part()
    assert got.is_unit()
    assert got == w.at_prec(got.prec)


def test_inverse_of_unit(mixed):
    rng = random.Random(3)
    for tau in range(2):
        x = mixed.random_unit(rng, tau)
        assert x * x.inverse() == mixed.one(tau)


def test_inverse_rejects_non_unit(ram):
    with pytest.raises(NotDivisible):
        ram.pi(0).inverse()


# ---------------------------------------------------------------------------
# Frobenius between embeddings
# ---------------------------------------------------------------------------


def test_sigma_moves_tau_and_fixes_pi(mixed):
    x = mixed.pi(0)
    y = x.sigma()
    assert y.tau == 1
    assert y == mixed.pi(1)


def test_sigma_order_f_on_elements(mixed):
    rng = random.Random(9)
    x = mixed.random_elem(rng, 0)
    assert x.sigma(2) == x


def test_sigma_is_ring_homomorphism(mixed):
    rng = random.Random(13)
    x = mixed.random_elem(rng, 0)
    y = mixed.random_elem(rng, 0)
    assert (x * y).sigma() == x.sigma() * y.sigma()
    assert (x + y).sigma() == x.sigma() + y.sigma()


def test_residue_map(mixed):
    x = mixed.elem([(1, 2), (0, 1)], 0)
    assert x.residue().coeffs == (1, 2)
    assert mixed.pi(0).residue().is_zero()


def test_coords_canonical_and_equality(ram):
    a = ram.elem([1 + 3 ** 12, 5, 7], 0)
    b = ram.elem([1, 5, 7], 0)
    assert a == b
    assert a.coords_int() == b.coords_int()


def test_precision_relift_same_ring(mixed):
    hi = mixed.with_precision(30)
    assert hi.same_ring(mixed)
    assert hi.base.N == 30
    # elements built at both precisions agree after truncation
    x_hi = hi.pi(0) * hi.from_int(7, 0)
    x_lo = mixed.pi(0) * mixed.from_int(7, 0)
    assert x_hi.at_prec(x_lo.prec).coords_int() == x_lo.coords_int()
