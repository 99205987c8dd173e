"""Crystals with ramified endomorphism action: polygons and flags.

Newton via the convex hull of the twisted characteristic polynomial,
independently cross-checked by the growth-of-minimal-valuation oracle;
Hodge via elementary divisors; the datum polygon by direct combinatorics.
"""

import random
from fractions import Fraction

import pytest

from ramcrystals import (
    BaseField,
    Crystal,
    EmptyEtalePart,
    InvalidDatum,
    LocalField,
    OrderedDatumRequired,
    Polygon,
    PRDatum,
    RamMatrix,
    change_basis,
    default_precision,
    derive_seed,
    etale_part,
    exterior_datum,
    exterior_power,
    graded_datum,
    hodge_polygon,
    hodge_polygon_tau,
    newton_oracle,
    newton_polygon,
    pr_polygon,
    pr_polygon_tau,
    random_ordered_datum,
    random_pr_crystal,
    rank_one_crystal,
    validate_pr,
)


# ---------------------------------------------------------------------------
# datum combinatorics
# ---------------------------------------------------------------------------


def test_datum_validation():
    with pytest.raises(InvalidDatum):
        PRDatum(2, [[3, 0]], e=2)  # graded dimension above h
    with pytest.raises(InvalidDatum):
        PRDatum(2, [[1], [1, 1]])  # ragged rows
    mu = PRDatum(2, [[2, 1], [1, 0]])
    assert mu.f == 2 and mu.e == 2 and mu.h == 2
    assert mu.dim(0, 1) == 2 and mu.dim(1, 2) == 0


def test_datum_ordering_helpers():
    mu = PRDatum(2, [[0, 1, 2]], e=3)
    assert not mu.is_ordered()
    assert mu.sorted_desc().rows == ((2, 1, 0),)
    assert mu.sorted_desc().is_ordered()


def test_datum_cumulative():
    mu = PRDatum(3, [[2, 1, 0]], e=3)
    assert [mu.cumulative(0, i) for i in range(4)] == [0, 2, 3, 3]


def test_pr_polygon_golden():
    # e=3, h=2, graded dimensions (2,1,0): slopes {1/3, 2/3}
    mu = PRDatum(2, [[2, 1, 0]], e=3)
    assert pr_polygon(mu).slopes == (Fraction(1, 3), Fraction(2, 3))
    assert pr_polygon_tau(mu, 0).slopes == (Fraction(1, 3), Fraction(2, 3))


def test_pr_polygon_is_mean_over_embeddings():
    mu = PRDatum(2, [[2, 0], [1, 1]])
    vals_mean = [
        (pr_polygon_tau(mu, 0).eval(i) + pr_polygon_tau(mu, 1).eval(i)) / 2
        for i in range(3)
    ]
    assert pr_polygon(mu).values() == vals_mean


def test_exterior_datum_top_power_width_one():
    mu = PRDatum(2, [[2, 1], [1, 0]])
    top = exterior_datum(mu, 2)
    assert top.h == 1
    assert pr_polygon(top).eval(1) == pr_polygon(mu).eval(2)


# ---------------------------------------------------------------------------
# explicit crystals with known slopes
# ---------------------------------------------------------------------------


def test_rank_one_slopes():
    base = BaseField(3, 1, 12)
    F = LocalField(base, 1, 2)
    c = rank_one_crystal(F, [3])
    assert c.newton_polygon().slopes == (Fraction(3, 2),)


def test_rank_one_slopes_with_f():
    base = BaseField(3, 2, 14)
    F = LocalField(base, 2, 2)
    c = rank_one_crystal(F, [1, 2])
    # total pi-exponent 3 spread over e*f = 4
    assert c.newton_polygon().slopes == (Fraction(3, 4),)


def test_classical_ordinary_and_supersingular():
    base = BaseField(3, 1, 10)
    F = LocalField(base, 1, 1)
    one, z, p = F.one(0), F.zero(0), F.from_int(3, 0)
    ordinary = Crystal(F, [RamMatrix(F, 0, [[one, z], [z, p]])])
    assert ordinary.newton_polygon().slopes == (Fraction(0), Fraction(1))
    supersingular = Crystal(F, [RamMatrix(F, 0, [[z, p], [one, z]])])
    assert supersingular.newton_polygon().slopes == (
        Fraction(1, 2),
        Fraction(1, 2),
    )


def test_direct_sum_concatenates_slopes():
    base = BaseField(3, 1, 16)
    F = LocalField(base, 1, 2)
    z = F.zero(0)
    a = rank_one_crystal(F, [1]).Y[0].rows[0][0]
    b = rank_one_crystal(F, [3]).Y[0].rows[0][0]
    c = Crystal(F, [RamMatrix(F, 0, [[a, z], [z, b]])])
    assert c.newton_polygon() == Polygon([Fraction(1, 2), Fraction(3, 2)])


def test_hodge_polygon_from_elementary_divisors():
    base = BaseField(3, 1, 12)
    F = LocalField(base, 1, 2)
    pi = F.pi(0)
    c = Crystal(F, [RamMatrix.diagonal(F, 0, [F.one(0), pi, pi ** 3])])
    assert hodge_polygon_tau(c, 0).slopes == (
        Fraction(0),
        Fraction(1, 2),
        Fraction(3, 2),
    )
    assert hodge_polygon(c) == hodge_polygon_tau(c, 0)
    # methods agree with the free functions
    assert c.hodge_polygon() == hodge_polygon(c)
    assert c.hodge_polygon_tau(0) == hodge_polygon_tau(c, 0)


def test_hodge_polygon_mean_over_tau():
    base = BaseField(3, 2, 12)
    F = LocalField(base, 2, 1)
    pi0, pi1 = F.pi(0), F.pi(1)
    y0 = RamMatrix.diagonal(F, 0, [F.one(0), pi0 * pi0])
    y1 = RamMatrix.diagonal(F, 1, [pi1, pi1])
    c = Crystal(F, [y0, y1])
    assert hodge_polygon_tau(c, 0).slopes == (Fraction(0), Fraction(2))
    assert hodge_polygon_tau(c, 1).slopes == (Fraction(1), Fraction(1))
    assert hodge_polygon(c).values() == [0, Fraction(1, 2), 2]


# ---------------------------------------------------------------------------
# the two independent Newton routes agree
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("h,f,e,seed", [
    (1, 1, 1, 1), (2, 1, 2, 2), (2, 2, 1, 3), (3, 1, 2, 4), (2, 2, 2, 5),
])
def test_newton_oracle_agreement(make_instance, h, f, e, seed):
    c, _, _ = make_instance(h, f, e, seed)
    assert newton_polygon(c) == newton_oracle(c)


def test_newton_retries_recover_low_precision(golden_model):
    c, _, _ = golden_model
    low = c.with_precision(2)
    assert newton_polygon(low) == newton_polygon(c)


# ---------------------------------------------------------------------------
# Mazur chain, endpoints, validation on random instances
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(6))
def test_polygon_chain_small(make_instance, seed):
    c, fil, mu = make_instance(2, 1, 2, seed + 10)
    newt, hdg, pr = newton_polygon(c), hodge_polygon(c), pr_polygon(mu)
    assert newt.dominates(hdg)
    assert hdg.dominates(pr)
    assert newt.eval(2) == hdg.eval(2) == pr.eval(2)


def test_validate_pr_accepts_generated(make_instance):
    c, fil, mu = make_instance(2, 2, 2, 77)
    report = validate_pr(c, fil, mu)
    assert report.ok
    assert report.graded == [list(row) for row in mu.rows]


def test_validate_pr_rejects_wrong_datum(make_instance):
    c, fil, mu = make_instance(2, 1, 2, 78)
    wrong = PRDatum(mu.h, [[mu.h - d for d in row] for row in mu.rows], e=mu.e)
    if wrong.rows != mu.rows:
        report = validate_pr(c, fil, wrong)
        assert not report.ok
        assert report.failures


def test_validate_pr_rejects_scaled_flag(make_instance):
    c, fil, mu = make_instance(2, 1, 2, 79)
    # destroying the pi-step containment at the top level must be caught
    levels = [list(level) for level in fil.levels]
    levels[0][mu.e] = levels[0][mu.e].scale_pi(1)
    from ramcrystals import PRFiltration

    bad = PRFiltration(fil.field, levels)
    report = validate_pr(c, bad, mu)
    assert not report.ok


def test_graded_datum_reads_back(make_instance):
    c, fil, mu = make_instance(3, 1, 2, 80)
    assert graded_datum(c, fil).rows == mu.rows


# ---------------------------------------------------------------------------
# gauge invariance
# ---------------------------------------------------------------------------


def test_polygons_invariant_under_unimodular_gauge(make_instance):
    c, fil, mu = make_instance(2, 2, 2, 91)
    F = c.field
    rng = random.Random(derive_seed(91, "gauge"))
    mats = []
    for tau in range(F.f):
        while True:
            m = RamMatrix(
                F, tau,
                [[F.random_elem(rng, tau) for _ in range(c.h)] for _ in range(c.h)],
            )
            if m.det().is_unit():
                mats.append(m)
                break
    c2, fil2 = change_basis(c, mats, fil)
    assert newton_polygon(c2) == newton_polygon(c)
    assert hodge_polygon(c2) == hodge_polygon(c)
    for tau in range(F.f):
        assert hodge_polygon_tau(c2, tau) == hodge_polygon_tau(c, tau)
    report = validate_pr(c2, fil2, mu)
    assert report.ok


# ---------------------------------------------------------------------------
# exterior powers
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("seed", [101, 102])
def test_exterior_power_compatibility(make_instance, seed):
    c, fil, mu = make_instance(3, 1, 2, seed)
    for s in range(1, c.h + 1):
        cs, fils = exterior_power(c, fil, s)
        mus = exterior_datum(mu, s)
        assert newton_polygon(cs).eval(1) == newton_polygon(c).eval(s)
        for tau in range(c.field.f):
            assert hodge_polygon_tau(cs, tau).eval(1) == hodge_polygon_tau(
                c, tau
            ).eval(s)
        assert pr_polygon(mus).eval(1) == pr_polygon(mu).eval(s)
        assert validate_pr(cs, fils, mus).ok


# ---------------------------------------------------------------------------
# unit-root part
# ---------------------------------------------------------------------------


def test_etale_part_rank_counts_zero_slopes():
    base = BaseField(3, 1, 12)
    F = LocalField(base, 1, 1)
    one, z, p = F.one(0), F.zero(0), F.from_int(3, 0)
    c = Crystal(F, [RamMatrix(F, 0, [[one, z], [z, p]])])
    part = etale_part(c)
    assert part.rank == 1
    assert newton_polygon(part.Y if isinstance(part.Y, Crystal) else c).slopes[0] == 0


def test_etale_part_empty_when_all_slopes_positive():
    base = BaseField(3, 1, 12)
    F = LocalField(base, 1, 2)
    c = rank_one_crystal(F, [2])
    with pytest.raises(EmptyEtalePart):
        etale_part(c)


# ---------------------------------------------------------------------------
# randomness plumbing
# ---------------------------------------------------------------------------


def test_derive_seed_deterministic_and_sensitive():
    assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
    assert derive_seed(1, "a") != derive_seed(1, "b")
    assert derive_seed(1) != derive_seed(2)


def test_random_ordered_datum_is_ordered():
    rng = random.Random(5)
    for _ in range(20):
        mu = random_ordered_datum(3, 2, 3, rng)
        assert mu.is_ordered()
        assert mu.h == 3 and mu.f == 2 and mu.e == 3


def test_random_pr_crystal_reproducible():
    mu = PRDatum(2, [[2, 1]], e=2)
    c1, fil1 = random_pr_crystal(mu, 1234)
    c2, fil2 = random_pr_crystal(mu, 1234)
    assert c1.raw_data() == c2.raw_data()
    assert fil1.raw_data() == fil2.raw_data()
    c3, _ = random_pr_crystal(mu, 1235)
    assert c3.raw_data() != c1.raw_data()


def test_default_precision_grows_with_inputs():
    assert default_precision(1, 2, 3) == 1 * 2 + 3 + 4
    assert default_precision(2, 3, 1) == 2 * 3 + 1 + 4


def test_crystal_precision_relift(make_instance):
    c, _, _ = make_instance(2, 1, 2, 111)
    hi = c.with_precision(c.field.base.N + 6)
    assert newton_polygon(hi) == newton_polygon(c)


def test_ordered_datum_required_for_model_paths():
    # datum polygons themselves do not require ordering, but ordered-only
    # entry points must refuse unordered rows
    from ramcrystals import slope_break_data

    mu = PRDatum(2, [[0, 1, 2]], e=3)
    with pytest.raises(OrderedDatumRequired):
        slope_break_data(mu)
