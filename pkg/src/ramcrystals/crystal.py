"""F-crystals with ramified endomorphism structure over finite fields.

A crystal here is a free module M = prod_tau M_tau of rank h over the
tau-indexed family of ramified Witt rings, together with a sigma-semilinear
bijection-after-inverting-p

    F : M_{tau} -> M_{tau+1},    F(x) = Y_{tau+1} * sigma(x),

stored as the family of matrices Y_tau (columns = images of the basis of
M_{tau-1}).  The filtration datum mu assigns to each tau a sequence of
graded dimensions d_{tau,i}; a compatible pi-stepwise lattice flag between
span(Y_tau) and M_tau is a PRFiltration.

Three polygons live on a crystal:

* the Hodge polygon at tau: elementary divisor valuations of Y_tau,
* the Newton polygon: slopes of the linearized n-fold Frobenius, computed
  from the valuations of its characteristic polynomial,
* the filtration polygon of mu (the lower bound polygon of the stepwise
  condition).

An independent slope oracle estimates Newton slopes from the valuation
growth of twisted Frobenius powers and never looks at a characteristic
polynomial; the two routes are kept separate on purpose.
"""

from __future__ import annotations

import hashlib
import random
from fractions import Fraction
from itertools import combinations
from math import comb

from .errors import (
    FiltrationInvalid,
    InvalidDatum,
    NoConvergence,
    NotDivisible,
    PrecisionExhausted,
)
from .linalg import RamMatrix, lattice_reduce, smith_form, solve_right, span_equal
from .polygon import Polygon, mean_polygons
from .ramified import LocalField
from .witt import ABOVE_PRECISION, BaseField


def default_precision(n, h, e):
    return n * h + e + 4


def derive_seed(*parts):
    """Deterministic 64-bit child seed from integer/string parts."""
    key = repr(tuple(parts)).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


class PRDatum:
    """Graded filtration dimensions d_{tau,i}, tau in Z/f, i = 1..levels.

    `e` is the ramification of the underlying ring, which normalizes the
    filtration polygon; it defaults to the number of levels (the standard
    case) but exterior-power data have levels = e*s while keeping the ring's
    e.
    """

    __slots__ = ("h", "rows", "e")

    def __init__(self, h, rows, e=None):
        rows = tuple(tuple(int(d) for d in row) for row in rows)
        if not rows or not rows[0]:
            raise InvalidDatum("datum needs at least one embedding and one level")
        r = len(rows[0])
        if any(len(row) != r for row in rows):
            raise InvalidDatum("ragged datum")
        for row in rows:
            for d in row:
                if not 0 <= d <= h:
                    raise InvalidDatum(f"graded dimension {d} outside [0, {h}]")
        self.h = h
        self.rows = rows
        self.e = r if e is None else e

    @property
    def f(self):
        return len(self.rows)

    @property
    def levels(self):
        return len(self.rows[0])

    def dim(self, tau, i):
        """d_{tau,i} with i = 1..levels."""
        return self.rows[tau % self.f][i - 1]

    def cumulative(self, tau, i):
        """D_{tau}^{[i]} = sum_{j<=i} d_{tau,j}."""
        return sum(self.rows[tau % self.f][:i])

    def is_ordered(self):
        """Weakly decreasing in i at every tau."""
        return all(
            all(row[i] >= row[i + 1] for i in range(len(row) - 1))
            for row in self.rows
        )

    def sorted_desc(self):
        return PRDatum(
            self.h, [sorted(row, reverse=True) for row in self.rows], self.e
        )

    def __eq__(self, other):
        if not isinstance(other, PRDatum):
            return NotImplemented
        return (self.h, self.rows, self.e) == (other.h, other.rows, other.e)

    def __hash__(self):
        return hash((self.h, self.rows, self.e))

    def __repr__(self):
        return f"PRDatum(h={self.h}, rows={self.rows}, e={self.e})"


def pr_polygon_tau(mu, tau):
    """Filtration polygon at tau: slope (1/e)*#{i : d_{tau,i} >= h-j+1} on
    [j-1, j]."""
    h, e = mu.h, mu.e
    row = mu.rows[tau % mu.f]
    slopes = [
        Fraction(sum(1 for d in row if d >= h - j + 1), e) for j in range(1, h + 1)
    ]
    return Polygon(slopes)


def pr_polygon(mu):
    return mean_polygons([pr_polygon_tau(mu, t) for t in range(mu.f)])


class Crystal:
    """The matrix family Y_tau of a rank-h crystal over a LocalField."""

    __slots__ = ("field", "h", "Y", "_newton")

    def __init__(self, field: LocalField, Y):
        Y = tuple(Y)
        if len(Y) != field.f:
            raise InvalidDatum(f"need {field.f} matrices, got {len(Y)}")
        h = Y[0].nrows
        for t, m in enumerate(Y):
            if m.nrows != h or m.ncols != h:
                raise InvalidDatum("Frobenius matrices must be square of equal size")
            if m.tau != t % field.f:
                raise InvalidDatum(f"matrix {t} tagged with embedding {m.tau}")
            v = m.det().valuation()
            if v is ABOVE_PRECISION:
                raise PrecisionExhausted(
                    "det(Y) vanishes at working precision; raise it"
                )
        self.field = field
        self.h = h
        self.Y = Y
        self._newton = None

    # -- plumbing -------------------------------------------------------------

    def with_precision(self, precision, field=None):
        """The same crystal re-read at another precision.

        Element coordinates are canonical integer residues, so re-embedding
        them at higher precision is a legitimate lift of the same instance.
        Pass `field` to re-home onto an existing compatible ring object.
        """
        if field is None:
            field = self.field.with_precision(precision)
        return Crystal(field, [_relift_matrix(m, field) for m in self.Y])

    def raw_data(self):
        return tuple(
            tuple(tuple(x.coords_int() for x in row) for row in m.rows)
            for m in self.Y
        )

    # -- polygons ---------------------------------------------------------------

    def hodge_polygon_tau(self, tau):
        return Polygon(smith_form(self.Y[tau % self.field.f]).valuations())

    def hodge_polygon(self):
        return mean_polygons(
            [self.hodge_polygon_tau(t) for t in range(self.field.f)]
        )

    def frobenius_f_matrix(self, tau):
        """Matrix X_tau of the sigma^f-semilinear F^f on M_tau:
        X_tau = Y_tau * sigma(Y_{tau-1}) * ... * sigma^{f-1}(Y_{tau+1})."""
        f = self.field.f
        acc = self.Y[tau % f]
        for j in range(1, f):
            acc = acc * self.Y[(tau - j) % f].sigma(j)
        return acc

    def linear_total_matrix(self, tau):
        """Matrix of the linear F^n on M_tau (n = residue degree)."""
        n = self.field.base.n
        f = self.field.f
        x = self.frobenius_f_matrix(tau)
        acc = x
        for i in range(1, n // f):
            acc = acc * x.sigma(i * f)
        return acc

    def newton_polygon(self, retries=2):
        """Newton polygon of F, exact; retries at doubled precision if the
        characteristic polynomial hull cannot be certified."""
        if self._newton is not None:
            return self._newton
        c = self
        for attempt in range(retries + 1):
            try:
                poly = _newton_once(c)
                self._newton = poly
                return poly
            except PrecisionExhausted:
                if attempt == retries:
                    raise
                c = self.with_precision(2 * c.field.base.N)

    def __repr__(self):
        return f"Crystal(h={self.h}, {self.field!r})"


def _relift_matrix(m, field):
    tau = m.tau
    return RamMatrix(
        field,
        tau,
        [
            [field.elem(list(x.coords_int()), tau) for x in row]
            for row in m.rows
        ],
    )


def _newton_hull_slopes(coeff_vals, caps, h):
    """Ascending slopes of the lower hull of (k, v_k), k = 0..h.

    coeff_vals[k] is a Fraction or None (unknown above caps[k]); the hull of
    the known points must clear every cap, else the hull is uncertified.
    """
    pts = [(k, v) for k, v in enumerate(coeff_vals) if v is not None]
    if coeff_vals[0] != 0:
        raise PrecisionExhausted("characteristic polynomial is not monic-exact")
    if coeff_vals[h] is None:
        raise PrecisionExhausted("constant coefficient vanishes at precision")
    hull = [pts[0]]
    for pt in pts[1:]:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x2) >= (pt[1] - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    # hull ordinate at every abscissa, for the cap check and the slopes
    def hull_at(x):
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 <= x <= x2:
                return y1 + (y2 - y1) * Fraction(x - x1, x2 - x1)
        raise AssertionError("abscissa outside hull")

    for k, v in enumerate(coeff_vals):
        if v is None and hull_at(k) > caps[k]:
            raise PrecisionExhausted(
                "a vanished coefficient could dip below the certified hull"
            )
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(y2 - y1, x2 - x1)
        slopes.extend([s] * (x2 - x1))
    return slopes


def _newton_once(c):
    field = c.field
    n = field.base.n
    poly = None
    for tau in range(field.f):
        z = c.linear_total_matrix(tau)
        cp = z.charpoly()
        vals, caps = [], []
        for x in cp:
            v = x.valuation()
            if v is ABOVE_PRECISION:
                vals.append(None)
            else:
                vals.append(v)
            caps.append(Fraction(x.prec))
        slopes = _newton_hull_slopes(vals, caps, c.h)
        pg = Polygon([s / n for s in slopes])
        if poly is None:
            poly = pg
        else:
            assert poly == pg, "Newton polygon depends on tau; internal error"
    return poly


def newton_polygon(c, retries=2):
    return c.newton_polygon(retries)


def hodge_polygon(c):
    return c.hodge_polygon()


def hodge_polygon_tau(c, tau):
    return c.hodge_polygon_tau(tau)


# ---------------------------------------------------------------------------
# independent slope oracle
# ---------------------------------------------------------------------------

def _round_to_denominator(x, D):
    """Best rational approximation with denominator <= D; None on a tie."""
    r = x.limit_denominator(D)
    if r == x:
        return r
    mirror = 2 * x - r
    r2 = mirror.limit_denominator(D)
    if r2 != r and abs(x - r2) == abs(x - r):
        return None
    return r


def newton_oracle(c, m_max=256):
    """Newton slopes from minimal valuations of twisted Frobenius powers.

    For each wedge degree s, the minimal entry valuation a_m of
    (wedge^s F^f)^m grows like m * f * Newt(s); successive doubling
    differences (a_{2m} - a_m)/m converge to the exact partial sum, and are
    accepted once two rounded estimates agree.  Runs at its own precision
    sized to the iteration budget, growing both geometrically on
    non-convergence.  Raises NoConvergence if the top budget ends first.
    """
    budget = 16
    while True:
        try:
            return _oracle_attempt(c, min(budget, m_max))
        except NoConvergence:
            if budget >= m_max:
                raise
            budget *= 4


def _oracle_attempt(c, m_max):
    f, e, h = c.field.f, c.field.e, c.h
    n = c.field.base.n
    prec = m_max * f * h + c.field.base.N + 8
    ch = c.with_precision(prec)
    x1 = ch.frobenius_f_matrix(0)
    denom_bound = e * n * h
    partial = [Fraction(0)]
    for s in range(1, h + 1):
        w = x1.compound(s)
        history = []
        accepted = None
        m = 1
        a_prev = _oracle_minval(w)
        while 2 * m <= m_max:
            w = w * w.sigma((f * m) % n)
            m *= 2
            a = _oracle_minval(w)
            est = (a - a_prev) / (m // 2)
            a_prev = a
            rounded = _round_to_denominator(est, denom_bound)
            history.append(rounded)
            if (
                len(history) >= 2
                and rounded is not None
                and history[-2] == rounded
            ):
                accepted = rounded
                break
        if accepted is None:
            raise NoConvergence(
                f"slope estimate for wedge degree {s} did not stabilize "
                f"within {m_max} doublings"
            )
        partial.append(accepted / f)
    slopes = [partial[s] - partial[s - 1] for s in range(1, h + 1)]
    for a, b in zip(slopes, slopes[1:]):
        if a > b:
            raise NoConvergence("oracle slopes are not convex; unstable estimate")
    return Polygon(slopes)


def _oracle_minval(w):
    v = w.min_valuation()
    if v is ABOVE_PRECISION:
        raise NoConvergence("all entries vanished at oracle precision")
    return v


# ---------------------------------------------------------------------------
# filtrations
# ---------------------------------------------------------------------------

class PRFiltration:
    """Stepwise lattice flags: per tau, matrices G_{tau,0..r} with
    span G_0 = span Y_tau, G_r the full lattice, pi*G_i <= G_{i-1} <= G_i."""

    __slots__ = ("field", "h", "levels")

    def __init__(self, field, levels):
        levels = tuple(tuple(ls) for ls in levels)
        if len(levels) != field.f:
            raise InvalidDatum(f"need {field.f} flag families")
        r = len(levels[0]) - 1
        h = levels[0][0].nrows
        for t, ls in enumerate(levels):
            if len(ls) != r + 1:
                raise InvalidDatum("ragged filtration")
            for g in ls:
                if g.tau != t % field.f or g.nrows != h or g.ncols != h:
                    raise InvalidDatum("badly tagged or shaped flag matrix")
        self.field = field
        self.h = h
        self.levels = levels

    @property
    def r(self):
        return len(self.levels[0]) - 1

    def matrix(self, tau, i):
        return self.levels[tau % self.field.f][i]

    def with_precision(self, precision, field=None):
        if field is None:
            field = self.field.with_precision(precision)
        return PRFiltration(
            field,
            [[_relift_matrix(g, field) for g in ls] for ls in self.levels],
        )

    def raw_data(self):
        return tuple(
            tuple(tuple(tuple(x.coords_int() for x in row) for row in g.rows) for g in ls)
            for ls in self.levels
        )


class PRReport:
    __slots__ = ("ok", "failures", "graded")

    def __init__(self, ok, failures, graded):
        self.ok = ok
        self.failures = failures
        self.graded = graded

    def __repr__(self):
        status = "ok" if self.ok else f"INVALID ({len(self.failures)} failures)"
        return f"PRReport({status})"


def validate_pr(c, fil, mu):
    """Check the stepwise flag conditions of fil against the datum mu.

    Verifies span G_0 = span Y_tau, G_r = full lattice, each step
    G_{i-1} <= G_i with elementary divisors in {1, pi} and exactly
    d_{tau,i} of them equal to pi.  Returns a PRReport; never raises for a
    merely-invalid filtration.
    """
    failures = []
    graded = []
    if mu.h != c.h or mu.f != c.field.f or fil.r != mu.levels:
        return PRReport(
            False,
            [
                f"shape mismatch: datum {mu.f}x{mu.levels} width {mu.h}, "
                f"crystal h={c.h}, filtration r={fil.r}"
            ],
            None,
        )
    for tau in range(c.field.f):
        dims = []
        if not span_equal(fil.matrix(tau, 0), c.Y[tau]):
            failures.append(f"tau={tau}: level 0 does not span the image of F")
        full = RamMatrix.identity(c.field, tau, c.h)
        if not span_equal(fil.matrix(tau, fil.r), full):
            failures.append(f"tau={tau}: top level is not the full lattice")
        for i in range(1, fil.r + 1):
            gi, gprev = fil.matrix(tau, i), fil.matrix(tau, i - 1)
            try:
                step = solve_right(gi, gprev)
            except NotDivisible:
                failures.append(f"tau={tau}, i={i}: level {i-1} not inside level {i}")
                dims.append(None)
                continue
            sf = smith_form(step)
            if not sf.certified():
                failures.append(f"tau={tau}, i={i}: step degenerate at precision")
                dims.append(None)
                continue
            if any(x not in (0, 1) for x in sf.exps):
                failures.append(
                    f"tau={tau}, i={i}: pi*G_{i} is not inside G_{i-1} "
                    f"(divisor exponents {sf.exps})"
                )
                dims.append(None)
                continue
            d = sum(1 for x in sf.exps if x == 1)
            dims.append(d)
            if d != mu.dim(tau, i):
                failures.append(
                    f"tau={tau}, i={i}: graded dimension {d} != datum "
                    f"{mu.dim(tau, i)}"
                )
        graded.append(dims)
    return PRReport(not failures, failures, graded)


def graded_datum(c, fil):
    """The datum realized by a (valid) filtration, from its Smith steps."""
    rows = []
    for tau in range(c.field.f):
        dims = []
        for i in range(1, fil.r + 1):
            step = solve_right(fil.matrix(tau, i), fil.matrix(tau, i - 1))
            sf = smith_form(step)
            if not sf.certified() or any(x not in (0, 1) for x in sf.exps):
                raise FiltrationInvalid(f"invalid step at tau={tau}, i={i}")
            dims.append(sum(1 for x in sf.exps if x == 1))
        rows.append(dims)
    return PRDatum(c.h, rows, c.field.e)


# ---------------------------------------------------------------------------
# exterior powers
# ---------------------------------------------------------------------------

def exterior_datum(mu, s):
    """The datum of the s-th exterior power: width C(h,s), levels*s levels.

    d^{(s)}_{tau, i*s-k} = sum_{j=0}^{k} C(d_{tau,i}, s-j) * C(h-d_{tau,i}, j).
    """
    h, r = mu.h, mu.levels
    rows = []
    for row in mu.rows:
        new = [0] * (r * s)
        for i in range(1, r + 1):
            d = row[i - 1]
            for k in range(s):
                val = sum(comb(d, s - j) * comb(h - d, j) for j in range(k + 1))
                new[i * s - k - 1] = val
        rows.append(new)
    return PRDatum(comb(h, s), rows, mu.e)


def exterior_power(c, fil, s, extra_precision=None):
    """The s-th exterior crystal with its interleaved filtration.

    Level i*s + j (0 <= j < s) of the new flag is spanned by wedges of s-j
    columns of level i with j columns of level i+1.  Inputs are relifted by
    a headroom budget first: compound minors multiply valuations, so the
    wedge needs more digits than its source for downstream Smith forms.
    """
    if extra_precision is None:
        extra_precision = c.h * comb(c.h - 1, s - 1) + c.h + 4
    if extra_precision:
        needed = c.field.base.N + extra_precision
        lifted = c.field.with_precision(needed)
        c = c.with_precision(needed, field=lifted)
        fil = fil.with_precision(needed, field=lifted)
    field = c.field
    h, e = c.h, fil.r
    hs = comb(h, s)
    Ys = tuple(c.Y[t].compound(s) for t in range(field.f))
    cs = Crystal(field, Ys)
    levels = []
    for tau in range(field.f):
        flags = []
        for L in range(e * s + 1):
            i, j = divmod(L, s)
            if j == 0:
                g = fil.matrix(tau, i).compound(s)
                flags.append(g)
                continue
            gi = fil.matrix(tau, i).cols()
            gi1 = fil.matrix(tau, i + 1).cols()
            gens = []
            for s1 in combinations(range(h), s - j):
                vs1 = [gi[x] for x in s1]
                for s2 in combinations(range(h), j):
                    vecs = vs1 + [gi1[x] for x in s2]
                    gens.append(_wedge(field, tau, vecs))
            flags.append(lattice_reduce(field, tau, gens, hs))
        levels.append(flags)
    return cs, PRFiltration(field, levels)


def _wedge(field, tau, vecs):
    from .linalg import wedge_coords

    return wedge_coords(field, tau, vecs)


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------

def _field_for(mu, *, p=3, n=None, eisenstein=None, precision=None):
    """The working ring for instances of the datum mu."""
    if n is None:
        n = mu.f
    if precision is None:
        precision = default_precision(n, mu.h, mu.levels)
    base = BaseField(p, n, precision)
    return LocalField(base, mu.f, mu.levels, eisenstein)


def random_pr_crystal(mu, seed, *, p=3, n=None, eisenstein=None, precision=None):
    """A pseudorandom crystal-with-filtration realizing the datum mu.

    Deterministic in (mu, seed, p, n, eisenstein, precision): every random
    draw uses child generators seeded by hashing the arguments, so instances
    are reproducible across runs and platforms.
    """
    field = _field_for(mu, p=p, n=n, eisenstein=eisenstein, precision=precision)
    return _random_on_field(field, mu, seed)


def _random_on_field(field, mu, seed):
    e, h = mu.levels, mu.h
    root = derive_seed("pr-crystal", seed, mu.h, mu.rows, field.base.p,
                       field.base.n, field.e, field.f)
    Ys = []
    levels = []
    for tau in range(field.f):
        rng = random.Random(derive_seed(root, "tau", tau))
        flags = [RamMatrix.identity(field, tau, h)]
        g = flags[0]
        for i in range(e, 0, -1):
            d = mu.dim(tau, i)
            unit = _random_unit_matrix(field, tau, h, rng)
            scaled_cols = rng.sample(range(h), d)
            pi = field.pi(tau)
            cols = unit.cols()
            for jcol in scaled_cols:
                cols[jcol] = [x * pi for x in cols[jcol]]
            step = RamMatrix.from_cols(field, tau, cols)
            g = g * step
            flags.append(g)
        flags.reverse()  # now flags[i] spans level i, flags[e] = identity
        u = _random_unit_matrix(field, tau, h, rng)
        y = flags[0] * u
        flags[0] = y
        Ys.append(y)
        levels.append(flags)
    return Crystal(field, Ys), PRFiltration(field, levels)


def _random_unit_matrix(field, tau, h, rng):
    while True:
        m = RamMatrix(
            field,
            tau,
            [[field.random_elem(rng, tau) for _ in range(h)] for _ in range(h)],
        )
        v = m.det().valuation()
        if v == 0:
            return m


def random_ordered_datum(h, f, e, rng):
    """A uniformly drawn weakly-decreasing datum."""
    rows = []
    for _ in range(f):
        row = sorted((rng.randint(0, h) for _ in range(e)), reverse=True)
        rows.append(row)
    return PRDatum(h, rows)
