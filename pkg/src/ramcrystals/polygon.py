"""Convex slope polygons with exact rational arithmetic.

A polygon of width w is the graph of the piecewise-linear convex function on
[0, w] starting at (0, 0) whose successive slopes on [i-1, i] form a
non-decreasing sequence of rationals.  It is stored as that slope multiset,
sorted ascending, so two polygons are equal iff their slope multisets agree.
All ordinates are Fractions; nothing here is approximate.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import EmptyList, InvalidDatum, OutOfRange, WidthMismatch


class Polygon:
    __slots__ = ("slopes",)

    def __init__(self, slopes):
        self.slopes = tuple(sorted(Fraction(s) for s in slopes))

    @property
    def width(self):
        return len(self.slopes)

    @classmethod
    def from_values(cls, values):
        """Polygon through ordinates (0, values[0]=0, ..., values[w])."""
        if len(values) < 1:
            raise InvalidDatum("need at least the origin ordinate")
        if values[0] != 0:
            raise InvalidDatum("polygons start at the origin")
        slopes = [
            Fraction(values[i + 1]) - Fraction(values[i])
            for i in range(len(values) - 1)
        ]
        for a, b in zip(slopes, slopes[1:]):
            if a > b:
                raise InvalidDatum("ordinates are not convex")
        return cls(slopes)

    @classmethod
    def isoclinic(cls, slope, width):
        return cls([Fraction(slope)] * width)

    def eval(self, i):
        """Ordinate at abscissa i; rational abscissas interpolate exactly."""
        x = Fraction(i)
        if not 0 <= x <= self.width:
            raise OutOfRange(f"abscissa {i} outside [0, {self.width}]")
        k = int(x)
        out = sum(self.slopes[:k], Fraction(0))
        if x > k:
            out += (x - k) * self.slopes[k]
        return out

    __call__ = eval

    def values(self):
        out = [Fraction(0)]
        for s in self.slopes:
            out.append(out[-1] + s)
        return out

    def _check_width(self, other):
        if self.width != other.width:
            raise WidthMismatch(f"widths {self.width} != {other.width}")

    def dominates(self, other):
        """self lies on or above other at every integer abscissa.

        Both polygons have integral breakpoints, so this is equivalent to
        domination everywhere on [0, w].
        """
        self._check_width(other)
        mine, theirs = self.values(), other.values()
        return all(a >= b for a, b in zip(mine, theirs))

    def contact_abscissas(self, other):
        """Integer abscissas where the two graphs meet."""
        self._check_width(other)
        mine, theirs = self.values(), other.values()
        return [i for i, (a, b) in enumerate(zip(mine, theirs)) if a == b]

    def concat(self, other):
        """Multiset union of the slopes (re-sorted to convex position)."""
        return Polygon(self.slopes + other.slopes)

    __add__ = concat

    def breakpoints(self):
        """Abscissas where the slope changes, including both endpoints."""
        out = [0]
        for i in range(1, self.width):
            if self.slopes[i - 1] != self.slopes[i]:
                out.append(i)
        if self.width > 0:
            out.append(self.width)
        return out

    def vertices(self):
        vals = self.values()
        return [(i, vals[i]) for i in self.breakpoints()]

    def slope_multiplicities(self):
        """Ascending list of (slope, multiplicity) pairs."""
        out = []
        for s in self.slopes:
            if out and out[-1][0] == s:
                out[-1][1] += 1
            else:
                out.append([s, 1])
        return [(s, m) for s, m in out]

    def __eq__(self, other):
        if not isinstance(other, Polygon):
            return NotImplemented
        return self.slopes == other.slopes

    def __hash__(self):
        return hash(self.slopes)

    def __repr__(self):
        parts = ", ".join(
            f"{s}x{m}" if m > 1 else f"{s}" for s, m in self.slope_multiplicities()
        )
        return f"Polygon[{parts}]"


def mean_polygons(polys):
    """Pointwise average of equal-width polygons (again a polygon)."""
    polys = list(polys)
    if not polys:
        raise EmptyList("mean of no polygons")
    w = polys[0].width
    for q in polys:
        if q.width != w:
            raise WidthMismatch("averaging polygons of different widths")
    m = len(polys)
    vals = [sum(q.eval(i) for q in polys) / Fraction(m) for i in range(w + 1)]
    return Polygon.from_values(vals)
