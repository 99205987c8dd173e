"""Exact linear algebra over the ramified local rings.

Smith normal form with unimodular certificates, division-free
characteristic polynomials and adjugates, compound (exterior-power)
matrices, and lattice span tests.
"""

import random
from fractions import Fraction

import pytest

from ramcrystals import (
    BaseField,
    LocalField,
    NotDivisible,
    RamMatrix,
    smith_form,
    solve_right,
)
from ramcrystals.linalg import solve_tall, span_contains, span_equal, wedge_coords


@pytest.fixture(scope="module")
def F(base3):
    return LocalField(base3, 1, 2)


def rand_matrix(F, rng, n, m=None, tau=0):
    m = n if m is None else m
    return RamMatrix(
        F, tau, [[F.random_elem(rng, tau) for _ in range(m)] for _ in range(n)]
    )


def rand_unimodular(F, rng, n, tau=0):
    while True:
        a = rand_matrix(F, rng, n, tau=tau)
        if a.det().is_unit():
            return a


# ---------------------------------------------------------------------------
# characteristic polynomial / determinant / adjugate
# ---------------------------------------------------------------------------


def test_charpoly_of_diagonal(F):
    a = F.from_int(2, 0)
    b = F.pi(0)
    mat = RamMatrix.diagonal(F, 0, [a, b])
    cp = mat.charpoly()
    assert cp[0] == F.one(0)
    assert cp[1] == -(a + b)
    assert cp[2] == a * b


def test_charpoly_of_companion_matrix(F):
    # companion of x^3 - c2 x^2 - c1 x - c0
    c0, c1, c2 = F.from_int(2, 0), F.pi(0), F.from_int(5, 0)
    z, one = F.zero(0), F.one(0)
    comp = RamMatrix(F, 0, [[z, z, c0], [one, z, c1], [z, one, c2]])
    cp = comp.charpoly()
    assert cp[1] == -c2 and cp[2] == -c1 and cp[3] == -c0


def test_det_multiplicative(F):
    rng = random.Random(21)
    a, b = rand_matrix(F, rng, 3), rand_matrix(F, rng, 3)
    assert (a * b).det() == a.det() * b.det()


def test_adjugate_identity(F):
    rng = random.Random(22)
    a = rand_matrix(F, rng, 3)
    lhs = a * a.adjugate()
    expect = RamMatrix.identity(F, 0, 3) * a.det()
    assert lhs == expect


def test_inverse_of_unimodular(F):
    rng = random.Random(23)
    a = rand_unimodular(F, rng, 3)
    assert a * a.inverse() == RamMatrix.identity(F, 0, 3)


# ---------------------------------------------------------------------------
# compound matrices and wedge coordinates
# ---------------------------------------------------------------------------


def test_compound_multiplicative(F):
    rng = random.Random(31)
    a, b = rand_matrix(F, rng, 4), rand_matrix(F, rng, 4)
    for s in (1, 2, 3):
        assert (a * b).compound(s) == a.compound(s) * b.compound(s)


def test_top_compound_is_determinant(F):
    rng = random.Random(32)
    a = rand_matrix(F, rng, 3)
    top = a.compound(3)
    assert top.nrows == 1 and top.ncols == 1
    assert top.rows[0][0] == a.det()


def test_wedge_coords_match_compound_column(F):
    rng = random.Random(33)
    a = rand_matrix(F, rng, 4, 2)
    coords = wedge_coords(F, 0, [a.col(0), a.col(1)])
    comp_col = [a.compound(2).rows[i][0] for i in range(len(coords))]
    assert all(x == y for x, y in zip(coords, comp_col))


def test_wedge_coords_alternating(F):
    rng = random.Random(34)
    v = [F.random_elem(rng, 0) for _ in range(3)]
    assert all(x.is_zero() for x in wedge_coords(F, 0, [v, v]))


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


def test_smith_form_certificates(F):
    rng = random.Random(41)
    for trial in range(5):
        a = rand_matrix(F, rng, 3)
        sf = smith_form(a)
        assert sf.p * a * sf.q == sf.d
        assert sf.p * sf.pinv == RamMatrix.identity(F, 0, 3)
        assert sf.q * sf.qinv == RamMatrix.identity(F, 0, 3)
        if sf.certified():
            exps = sf.exps
            assert list(exps) == sorted(exps)
            for j, c in enumerate(exps):
                assert sf.d.rows[j][j] == F.pi_pow(0, c)


def test_smith_form_pinned_diagonal(F):
    pi = F.pi(0)
    a = RamMatrix(F, 0, [[pi * pi, F.zero(0)], [F.one(0), pi]])
    sf = smith_form(a)
    assert sf.certified()
    assert sf.exps == [0, 3]
    assert sf.valuations() == [Fraction(0), Fraction(3, 2)]


def test_smith_form_rectangular(F):
    rng = random.Random(42)
    a = rand_matrix(F, rng, 3, 2)
    sf = smith_form(a)
    assert sf.p * a * sf.q == sf.d
    assert len(sf.exps) == 2


def test_smith_valuations_sorted_with_zero_matrix(F):
    z = RamMatrix.zeros(F, 0, 2, 2)
    sf = smith_form(z)
    assert sf.exps == [None, None]
    assert not sf.certified()


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


def test_solve_right_exact(F):
    rng = random.Random(51)
    a = rand_unimodular(F, rng, 3)
    x = rand_matrix(F, rng, 3)
    b = a * x
    got = solve_right(a, b)
    assert a * got == b


def test_solve_right_divides_when_possible(F):
    pi = F.pi(0)
    a = RamMatrix.diagonal(F, 0, [pi, F.one(0)])
    b = RamMatrix.diagonal(F, 0, [pi * pi, F.from_int(7, 0)])
    x = solve_right(a, b)
    assert a * x == b


def test_solve_right_rejects_non_integral(F):
    pi = F.pi(0)
    a = RamMatrix.diagonal(F, 0, [pi, pi])
    b = RamMatrix.identity(F, 0, 2)
    with pytest.raises(NotDivisible):
        solve_right(a, b)


def test_solve_tall_and_span(F):
    rng = random.Random(52)
    a = rand_matrix(F, rng, 4, 2)
    coeff = rand_matrix(F, rng, 2, 1)
    b = a * coeff
    x = solve_tall(a, b)
    assert a * x == b


def test_solve_tall_rejects_outside_span(F):
    pi = F.pi(0)
    z, one = F.zero(0), F.one(0)
    a = RamMatrix(F, 0, [[one], [z], [z]])
    b = RamMatrix(F, 0, [[z], [one], [z]])
    with pytest.raises(NotDivisible):
        solve_tall(a, b)


def test_span_equal_invariant_under_unimodular(F):
    rng = random.Random(53)
    a = rand_matrix(F, rng, 3)
    g = rand_unimodular(F, rng, 3)
    assert span_equal(a, a * g)


# ---------------------------------------------------------------------------
# matrix plumbing
# ---------------------------------------------------------------------------


def test_sigma_componentwise(F2e2=None):
    base = BaseField(3, 2, 10)
    F2 = LocalField(base, 2, 2)
    rng = random.Random(61)
    a = rand_matrix(F2, rng, 2, tau=0)
    b = a.sigma()
    assert b.tau == 1
    assert b.rows[0][0] == a.rows[0][0].sigma()


def test_scale_and_div_pi_round_trip(F):
    rng = random.Random(62)
    a = rand_matrix(F, rng, 2)
    assert a.scale_pi(3).div_pi(3) == a.at_prec(a.scale_pi(3).div_pi(3).prec)


def test_min_valuation(F):
    pi = F.pi(0)
    a = RamMatrix(F, 0, [[pi * pi, pi], [pi, pi * pi * pi]])
    assert a.min_valuation() == Fraction(1, 2)
