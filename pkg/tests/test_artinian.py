"""Mod-p crystals with flags over artinian local coefficient rings.

Covers ring construction and validation, the flag-crystal checks over the
residue field and over rings with nilpotents, base-change functoriality,
agreement of the general Hasse chain with the perfect-field chain, and the
one-parameter deformations of the flag.
"""

import random

import pytest

from ramcrystals.artinian import (
    ArtinAlgebra,
    BT1Crystal,
    InvalidDatum,
    OrderedDatumRequired,
    RingMap,
    deformed_flag_instance,
    general_hasse,
    total_general_hasse,
    validate_bt1,
)
from ramcrystals.crystal import (
    PRDatum,
    derive_seed,
    random_ordered_datum,
    random_pr_crystal,
)
from ramcrystals.hasse import hasse_scalar, total_hasse
from ramcrystals.witt import BaseField


@pytest.fixture(scope="module")
def small_base():
    return BaseField(3, 1, 8)


@pytest.fixture(scope="module")
def golden_bt1(golden_model):
    c, fil, mu = golden_model
    ring = ArtinAlgebra.residue_field(c.field.base)
    return BT1Crystal.from_crystal(c, fil, mu, ring=ring)


def _all_elements(ring):
    """Every element of a 2-dimensional algebra over F_3."""
    base = ring.base
    return [
        ring.elem((base.ff([a]), base.ff([b])))
        for a in range(3)
        for b in range(3)
    ]


class TestArtinAlgebra:
    def test_residue_field_is_one_dimensional(self, small_base):
        ring = ArtinAlgebra.residue_field(small_base)
        assert ring.dim == 1
        assert ring.nilpotency == 0

    def test_dual_numbers_square_zero(self, small_base):
        ring = ArtinAlgebra.dual_numbers(small_base)
        assert ring.dim == 2
        assert ring.nilpotency == 1
        eps = ring.basis_elem(1)
        assert not eps.is_unit()
        assert (eps * eps).is_zero()

    def test_truncated_polynomials_nilpotency(self, small_base):
        ring = ArtinAlgebra.truncated_polynomials(small_base, 3)
        assert ring.dim == 3
        assert ring.nilpotency == 2
        t = ring.basis_elem(1)
        assert t * t == ring.basis_elem(2)
        assert not (t * t).is_zero()
        assert (t * t * t).is_zero()

    def test_basis_zero_must_be_unit(self, small_base):
        one, zero = small_base.ff([1]), small_base.ff([0])
        # two orthogonal idempotents: basis element 0 is not a unit
        table = (((one, zero), (zero, zero)), ((zero, zero), (zero, one)))
        with pytest.raises(InvalidDatum):
            ArtinAlgebra(small_base, table)

    def test_maximal_ideal_must_be_nilpotent(self, small_base):
        one, zero = small_base.ff([1]), small_base.ff([0])
        # basis element 1 is idempotent, so the ring splits
        table = (((one, zero), (zero, one)), ((zero, one), (zero, one)))
        with pytest.raises(InvalidDatum):
            ArtinAlgebra(small_base, table)

    def test_from_int_reduces_mod_p(self, small_base):
        ring = ArtinAlgebra.dual_numbers(small_base)
        assert ring.from_int(5) == ring.from_int(2)
        assert ring.from_int(5).residue() == small_base.ff([2])
        assert ring.from_int(3).is_zero()

    def test_unit_inverse(self, small_base):
        ring = ArtinAlgebra.dual_numbers(small_base)
        x = ring.elem((small_base.ff([2]), small_base.ff([1])))
        assert x.is_unit()
        assert x * x.inverse() == ring.one()

    def test_non_unit_inverse_raises(self, small_base):
        ring = ArtinAlgebra.dual_numbers(small_base)
        with pytest.raises(ZeroDivisionError):
            ring.basis_elem(1).inverse()

    def test_frobenius_is_the_p_power_map(self, small_base):
        ring = ArtinAlgebra.dual_numbers(small_base)
        for x in _all_elements(ring):
            assert x.phi() == x * x * x
            assert x.phi(2) == x.phi().phi()

    def test_frobenius_is_a_ring_homomorphism(self, small_base):
        ring = ArtinAlgebra.dual_numbers(small_base)
        elems = _all_elements(ring)
        for x in elems[:4]:
            for y in elems[4:]:
                assert (x + y).phi() == x.phi() + y.phi()
                assert (x * y).phi() == x.phi() * y.phi()

    def test_scale_by_residue_coefficient(self, small_base):
        ring = ArtinAlgebra.dual_numbers(small_base)
        x = ring.elem((small_base.ff([2]), small_base.ff([1])))
        assert x.scale(small_base.ff([2])) == x + x


class TestFlagCrystalValidation:
    def test_golden_validates_over_residue_field(self, golden_bt1):
        report = validate_bt1(golden_bt1)
        assert report.ok
        assert report.failures() == []
        assert all(flag for _, flag, _ in report.items)

    def test_items_are_named_checks(self, golden_bt1):
        report = validate_bt1(golden_bt1)
        names = [name for name, _, _ in report.items]
        assert "frobenius-after-verschiebung-zero[0]" in names
        assert "kernel-of-verschiebung-equals-image-of-frobenius[0]" in names
        assert "kernel-of-frobenius-equals-image-of-verschiebung[0]" in names
        assert "flag-top-is-verschiebung-image[0]" in names
        assert report.named("rank-bookkeeping[0]") is True

    def test_default_ring_is_residue_field(self, golden_model):
        c, fil, mu = golden_model
        b = BT1Crystal.from_crystal(c, fil, mu)
        assert b.ring.dim == 1
        assert validate_bt1(b).ok

    def test_datum_recorded(self, golden_bt1):
        assert golden_bt1.datum.rows == ((2, 1, 0),)

    def test_unordered_datum_rejected(self, golden_model):
        c, fil, mu = golden_model
        unordered = PRDatum(2, [[0, 1, 2]], e=3)
        ring = ArtinAlgebra.residue_field(c.field.base)
        with pytest.raises(InvalidDatum):
            BT1Crystal.from_crystal(c, fil, unordered, ring=ring)

    def test_golden_validates_over_dual_numbers(self, golden_bt1):
        ring = ArtinAlgebra.dual_numbers(golden_bt1.ring.base)
        lifted = golden_bt1.base_change(
            RingMap.from_residue_field(golden_bt1.ring, ring)
        )
        assert validate_bt1(lifted).ok

    def test_nilpotent_coefficients_keep_flag_summands(self, golden_bt1):
        # regression: the pullback of the top flag step under Verschiebung
        # must be computed as a module over the full ring, not merely as a
        # vector space over its residue field -- with nilpotents present the
        # span has to be closed under multiplication by every ring element
        base = golden_bt1.ring.base
        for ring in (
            ArtinAlgebra.dual_numbers(base),
            ArtinAlgebra.truncated_polynomials(base, 3),
        ):
            lifted = golden_bt1.base_change(
                RingMap.from_residue_field(golden_bt1.ring, ring)
            )
            report = validate_bt1(lifted)
            assert report.named("flag-top-is-verschiebung-image[0]") is True
            assert report.ok

    def test_base_change_round_trip(self, golden_bt1):
        ring = ArtinAlgebra.dual_numbers(golden_bt1.ring.base)
        up = RingMap.from_residue_field(golden_bt1.ring, ring)
        down = RingMap.to_residue_field(ring, golden_bt1.ring)
        back = golden_bt1.base_change(up).base_change(down)
        assert validate_bt1(back).ok
        assert (
            total_general_hasse(back).total
            == total_general_hasse(golden_bt1).total
        )


class TestGeneralHasse:
    def test_golden_levels_all_units_with_unit_total(self, golden_bt1):
        report = total_general_hasse(golden_bt1)
        assert report.total_unit
        assert report.total == golden_bt1.ring.one()
        for level in report.levels:
            assert level.unit
            assert level.value == golden_bt1.ring.one()

    def test_zero_dimensional_level_is_one(self, golden_bt1):
        report = total_general_hasse(golden_bt1)
        empty = [level for level in report.levels if level.dim == 0]
        assert empty
        for level in empty:
            assert level.value == golden_bt1.ring.one()
            assert level.unit

    def test_total_is_product_of_levels(self, golden_bt1):
        report = total_general_hasse(golden_bt1)
        product = report.levels[0].value
        for level in report.levels[1:]:
            product = product * level.value
        assert report.total == product

    def test_scalar_accessor_matches_levels(self, golden_bt1):
        report = total_general_hasse(golden_bt1)
        for level in report.levels:
            assert report.scalar(level.tau, level.i) == level.value
            assert general_hasse(golden_bt1, level.tau, level.i) == level.value

    def test_matches_perfect_field_chain(self):
        nonunit_seen = 0
        for seed in range(60, 70):
            rng = random.Random(derive_seed(seed, "art"))
            mu = random_ordered_datum(2, 1, 2, rng)
            c, fil = random_pr_crystal(mu, derive_seed(seed, "c"), p=3)
            ring = ArtinAlgebra.residue_field(c.field.base)
            b = BT1Crystal.from_crystal(c, fil, mu, ring=ring)
            report = total_general_hasse(b)
            perfect = total_hasse(c, fil, mu)
            for level in report.levels:
                scalar = hasse_scalar(c, fil, mu, level.tau, level.i)
                assert level.value.residue() == scalar
                assert level.unit == (scalar != c.field.base.ff([0]))
                nonunit_seen += not level.unit
            assert report.total.residue() == perfect.total
            assert report.total_unit == perfect.nonzero
        # the sample must exercise the vanishing case, not just units
        assert nonunit_seen > 0

    def test_functorial_under_base_change(self, golden_bt1):
        ring = ArtinAlgebra.dual_numbers(golden_bt1.ring.base)
        up = RingMap.from_residue_field(golden_bt1.ring, ring)
        lifted = golden_bt1.base_change(up)
        before = total_general_hasse(golden_bt1)
        after = total_general_hasse(lifted)
        assert after.total == up.apply(before.total)
        for level in before.levels:
            assert general_hasse(lifted, level.tau, level.i) == up.apply(
                level.value
            )

    def test_unordered_datum_rejected(self, golden_bt1):
        unordered = PRDatum(2, [[0, 1, 2]], e=3)
        with pytest.raises(OrderedDatumRequired):
            total_general_hasse(golden_bt1, unordered)


class TestDeformedFlag:
    def test_flat_deformation_validates_with_unit_total(self):
        b = deformed_flag_instance(0, 0)
        assert b.ring.dim == 2 and b.ring.nilpotency == 1
        assert b.datum.rows == ((2, 1, 0),)
        assert validate_bt1(b).ok
        report = total_general_hasse(b)
        assert report.total_unit

    def test_frobenius_deformation_validates(self):
        b = deformed_flag_instance(1, 0)
        assert validate_bt1(b).ok
        assert total_general_hasse(b).total_unit

    def test_flag_deformation_rejected(self):
        report = validate_bt1(deformed_flag_instance(0, 1))
        assert not report.ok
        names = [name for name, _ in report.failures()]
        assert names[0] == "flag-pi-step[0,1]"
        assert "flag-graded-rank[0,1]" in names

    @pytest.mark.parametrize("x", [0, 1])
    @pytest.mark.parametrize("y", [0, 1])
    def test_rejection_depends_only_on_flag_direction(self, x, y):
        report = validate_bt1(deformed_flag_instance(x, y))
        assert report.ok == (y == 0)
