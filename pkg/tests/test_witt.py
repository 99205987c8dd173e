"""Exact Witt-vector arithmetic over unramified extensions.

Covers residue-field arithmetic, the Teichmueller modulus (including the
divisibility property that certifies the Frobenius lift), sigma as a ring
homomorphism of order n, and p-adic digit operations.
"""

import random

import pytest
from hypothesis import given, settings, strategies as st

from ramcrystals import ABOVE_PRECISION, BaseField, InvalidDatum, NotDivisible
from ramcrystals.witt import (
    _default_field_modulus,
    _field_artifacts,
    _pdivmod,
)


# ---------------------------------------------------------------------------
# residue field
# ---------------------------------------------------------------------------


def test_ff_basic_arithmetic(base9):
    one = base9.ff_one()
    zero = base9.ff_zero()
    w = base9.ff((0, 1))  # the generator of F_9 over F_3
    assert (w - w).is_zero()
    assert (w * w.inverse() - one).is_zero()
    assert (zero + one).coeffs == one.coeffs


def test_ff_frobenius_order_n():
    for n in (1, 2, 3):
        base = BaseField(5, n, 8)
        x = base.ff(tuple(range(1, n + 1)))
        y = x
        for _ in range(n):
            y = y.frobenius()
        assert y.coeffs == x.coeffs


def test_ff_frobenius_is_p_power(base9):
    x = base9.ff((1, 2))
    assert x.frobenius().coeffs == (x * x * x).coeffs


@settings(max_examples=40, deadline=None)
@given(a=st.tuples(st.integers(0, 2), st.integers(0, 2)),
       b=st.tuples(st.integers(0, 2), st.integers(0, 2)))
def test_ff_frobenius_ring_homomorphism(a, b):
    base = BaseField(3, 2, 6)
    x, y = base.ff(a), base.ff(b)
    assert (x + y).frobenius().coeffs == (x.frobenius() + y.frobenius()).coeffs
    assert (x * y).frobenius().coeffs == (x.frobenius() * y.frobenius()).coeffs


def test_ff_inverse_of_zero_rejected(base9):
    with pytest.raises(ZeroDivisionError):
        base9.ff_zero().inverse()


# ---------------------------------------------------------------------------
# Teichmueller modulus: the heart of the exact Frobenius lift
# ---------------------------------------------------------------------------


def _check_divides(p, n, N):
    """The lifted modulus must divide x^{p^n} - x exactly over Z/p^N."""
    modulus = _default_field_modulus(p, n)
    teich, _ = _field_artifacts(tuple(c % p for c in modulus), p, n, N)
    M = p ** N
    xq = [0] * (p ** n) + [1]
    xq[1] = (xq[1] - 1) % M
    _, rem = _pdivmod(xq, list(teich), M)
    assert not rem, f"non-exact division for (p,n,N)=({p},{n},{N})"


@pytest.mark.parametrize("p,n,N", [(3, 1, 20), (3, 2, 12), (5, 2, 10), (2, 2, 16)])
def test_teichmuller_modulus_divides_small(p, n, N):
    _check_divides(p, n, N)


@pytest.mark.parametrize("p,n,N", [(3, 4, 14), (2, 3, 40), (3, 3, 28), (2, 5, 24)])
def test_teichmuller_modulus_divides_deep(p, n, N):
    # regression: an earlier certificate update was only correct mod p, which
    # produced wrong moduli precisely in these deeper (n >= 3) cases
    _check_divides(p, n, N)


def test_teichmuller_modulus_monic_degree_n():
    base = BaseField(3, 4, 14)
    assert len(base.teich_modulus) == 5 and base.teich_modulus[-1] == 1


def test_artifact_cache_consistent_across_precisions():
    lo = BaseField(3, 3, 6).teich_modulus
    hi = BaseField(3, 3, 20).teich_modulus
    M = 3 ** 6
    assert tuple(c % M for c in hi) == lo


# ---------------------------------------------------------------------------
# Witt elements
# ---------------------------------------------------------------------------


def test_witt_ring_identities(base9):
    x = base9.witt((5, 17), 3)
    y = base9.witt((2, 11), 3)
    z = base9.witt((7, 4), 3)
    assert ((x + y) * z - (x * z + y * z)).is_zero()
    assert (x * y - y * x).is_zero()
    assert (x - x).is_zero()


def test_witt_sigma_is_ring_homomorphism(base9):
    x = base9.random_witt(random.Random(1), 4)
    y = base9.random_witt(random.Random(2), 4)
    assert ((x * y).sigma() - x.sigma() * y.sigma()).is_zero()
    assert ((x + y).sigma() - (x.sigma() + y.sigma())).is_zero()


def test_witt_sigma_order_n():
    base = BaseField(3, 3, 9)
    x = base.witt((5, 10, 2), 4)
    y = x.sigma().sigma().sigma()
    assert (y - x).is_zero()


def test_witt_sigma_reduces_to_frobenius_on_residue(base9):
    x = base9.witt((7, 5), 2)
    assert x.sigma().residue().coeffs == x.residue().frobenius().coeffs


def test_witt_unit_inverse(base9):
    x = base9.witt((4, 6), 3)
    assert x.is_unit()
    assert (x * x.inverse() - base9.one(3)).is_zero()


def test_witt_val_p_and_divide_p(base9):
    x = base9.witt((9 * 2, 9 * 5), 4)
    assert x.val_p() == 2
    quotient = x.divide_p(2)
    assert quotient.prec == 2  # exact division costs digits
    assert quotient.coords_int() == (2, 5)
    with pytest.raises(NotDivisible):
        base9.one(4).divide_p(1)


def test_witt_zero_valuation_is_above_precision(base9):
    assert base9.zero(5).val_p() is ABOVE_PRECISION


def test_witt_coords_canonical(base9):
    # construction reduces mod p^prec, so equal elements share coords
    a = base9.witt((1 + 9, 2 + 2 * 9), 2)
    b = base9.witt((1, 2), 2)
    assert a.coords_int() == b.coords_int()


def test_precision_propagation(base9):
    x = base9.witt((1, 0), 5)
    y = base9.witt((1, 1), 3)
    assert (x * y).prec == 3
    assert (x + y).prec == 3
    assert x.at_prec(2).prec == 2


def test_base_field_validation():
    with pytest.raises(InvalidDatum):
        BaseField(4, 1, 5)  # not prime
    with pytest.raises(InvalidDatum):
        BaseField(3, 0, 5)
    with pytest.raises(InvalidDatum):
        BaseField(3, 1, 0)


def test_custom_field_modulus_rejected_when_reducible():
    with pytest.raises(InvalidDatum):
        BaseField(3, 2, 8, field_modulus=[0, 0, 1])  # x^2, not irreducible


@settings(max_examples=30, deadline=None)
@given(st.tuples(st.integers(0, 3 ** 6 - 1), st.integers(0, 3 ** 6 - 1)))
def test_witt_multiplying_by_p_raises_valuation(coords):
    base = BaseField(3, 2, 8)
    x = base.witt(coords, 6)
    p_elem = base.witt(3, 6)
    v = x.val_p()
    if v is ABOVE_PRECISION:
        assert (p_elem * x).is_zero()
    else:
        assert (p_elem * x).val_p() == min(v + 1, 6) or (p_elem * x).val_p() is ABOVE_PRECISION
