"""Convex polygons with exact rational slopes.

A polygon is the multiset of its slopes, stored ascending; everything else
(ordinates, vertices, dominance, contact) is derived exactly in Fractions.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ramcrystals import InvalidDatum, OutOfRange, Polygon, WidthMismatch, mean_polygons


def test_slopes_sorted_ascending():
    g = Polygon([1, Fraction(1, 3), 0])
    assert g.slopes == (Fraction(0), Fraction(1, 3), Fraction(1))
    assert g.width == 3


def test_eval_is_piecewise_linear():
    g = Polygon([0, Fraction(1, 2), 2])
    assert g.eval(0) == 0
    assert g.eval(1) == 0
    assert g.eval(2) == Fraction(1, 2)
    assert g.eval(Fraction(5, 2)) == Fraction(3, 2)
    assert g.eval(3) == Fraction(5, 2)


def test_eval_rejects_out_of_range():
    g = Polygon([0, 1])
    with pytest.raises(OutOfRange):
        g.eval(-1)
    with pytest.raises(OutOfRange):
        g.eval(3)


def test_values_and_from_values_round_trip():
    g = Polygon([Fraction(1, 3), Fraction(1, 3), 1])
    vals = g.values()
    assert vals[0] == 0
    assert Polygon.from_values(vals).slopes == g.slopes


def test_from_values_rejects_concave():
    with pytest.raises(InvalidDatum):
        Polygon.from_values([0, 1, 1, 3])  # slope drops then rises


def test_vertices_are_breakpoints_only():
    g = Polygon([0, 0, 1, 1, 3])
    assert g.vertices() == [(0, 0), (2, 0), (4, 2), (5, 5)]
    assert g.breakpoints() == [0, 2, 4, 5]


def test_dominates_means_lies_on_or_above():
    # the supersingular polygon {1/2, 1/2} lies above the ordinary {0, 1}
    ordinary = Polygon([0, 1])
    supersingular = Polygon([Fraction(1, 2), Fraction(1, 2)])
    assert supersingular.dominates(ordinary)
    assert not ordinary.dominates(supersingular)
    assert ordinary.dominates(ordinary)
    assert supersingular.contact_abscissas(ordinary) == [0, 2]
    assert ordinary.contact_abscissas(Polygon([0, 1])) == [0, 1, 2]


def test_dominates_requires_equal_width():
    with pytest.raises(WidthMismatch):
        Polygon([0]).dominates(Polygon([0, 1]))


def test_contact_requires_equal_width():
    with pytest.raises(WidthMismatch):
        Polygon([0]).contact_abscissas(Polygon([0, 1]))


def test_isoclinic_and_slope_multiplicities():
    g = Polygon.isoclinic(Fraction(2, 3), 6)
    assert g.slope_multiplicities() == [(Fraction(2, 3), 6)]
    h = Polygon([0, 0, 1])
    assert h.slope_multiplicities() == [(Fraction(0), 2), (Fraction(1), 1)]


def test_concat_is_slope_multiset_union():
    a = Polygon([0, 1])
    b = Polygon([Fraction(1, 2)])
    c = a.concat(b)
    assert c.slopes == (Fraction(0), Fraction(1, 2), Fraction(1))
    assert c.width == 3


def test_width_zero_polygon():
    g = Polygon([])
    assert g.width == 0
    assert g.eval(0) == 0
    assert g.values() == [0]
    assert g.vertices() == [(0, 0)]
    assert g.breakpoints() == [0]
    assert g.dominates(Polygon([]))
    assert g.concat(Polygon([1])).slopes == (Fraction(1),)


def test_mean_polygons():
    a = Polygon([0, 1])
    b = Polygon([0, 0])
    m = mean_polygons([a, b])
    assert m.slopes == (Fraction(0), Fraction(1, 2))


def test_mean_polygons_width_mismatch():
    with pytest.raises(WidthMismatch):
        mean_polygons([Polygon([0]), Polygon([0, 1])])


# ---------------------------------------------------------------------------
# dominance is a partial order on fixed width
# ---------------------------------------------------------------------------

slope_lists = st.lists(
    st.fractions(min_value=-3, max_value=3, max_denominator=6),
    min_size=3,
    max_size=3,
)


@settings(max_examples=60, deadline=None)
@given(slope_lists)
def test_dominates_reflexive(slopes):
    g = Polygon(slopes)
    assert g.dominates(g)


@settings(max_examples=60, deadline=None)
@given(slope_lists, slope_lists)
def test_dominates_antisymmetric(a, b):
    g, h = Polygon(a), Polygon(b)
    if g.dominates(h) and h.dominates(g):
        assert g.slopes == h.slopes


@settings(max_examples=60, deadline=None)
@given(slope_lists, slope_lists, slope_lists)
def test_dominates_transitive(a, b, c):
    g, h, k = Polygon(a), Polygon(b), Polygon(c)
    if g.dominates(h) and h.dominates(k):
        assert g.dominates(k)


@settings(max_examples=60, deadline=None)
@given(slope_lists)
def test_values_convex(slopes):
    vals = Polygon(slopes).values()
    diffs = [b - a for a, b in zip(vals, vals[1:])]
    assert diffs == sorted(diffs)
