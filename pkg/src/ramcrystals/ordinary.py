"""The explicit mu-ordinary crystal and Hodge-Newton decompositions.

For a weakly decreasing datum the model is a direct sum of rank-one pieces:
writing alpha_tau(D) = #{i : d_{tau,i} >= D} for D = 1..h, the piece at D is
the rank-one crystal with Frobenius pi^{alpha_tau(D)}, and its canonical flag
is pi^{max(alpha_tau(D)-i, 0)} at level i.  Grouping the D with equal
exponent vector (alpha_tau(D))_tau gives the isoclinic blocks; the Newton,
Hodge and filtration polygons of the sum all coincide.

Splitting goes the other way: at a Newton breakpoint lying on the Hodge
polygon, the slope-<= part is cut out as the stable image of a pi-normalized
wedge Frobenius (its Pluecker line is the unit eigendirection), the
slope-> part as the stable image of the analogous wedge Verschiebung, and
the two are certified to be complementary Frobenius-stable summands.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    EmptyEtalePart,
    InvalidDatum,
    NotABreakContact,
    NotDecomposable,
    NotMuOrdinary,
    OrderedDatumRequired,
    PrecisionExhausted,
)
from .crystal import Crystal, PRDatum, PRFiltration, pr_polygon
from .linalg import RamMatrix, smith_form, solve_right, solve_tall, wedge_coords
from .polygon import Polygon


# ---------------------------------------------------------------------------
# the explicit model
# ---------------------------------------------------------------------------


def slope_break_data(mu):
    """Isoclinic blocks of the model for an ordered datum, ascending slope.

    Returns a list of (rank, alpha) with alpha = (alpha_tau)_tau the common
    pi-exponent vector of the block; sum(rank) = h.  Block j occupies the
    Newton slopes with abscissas (sum of earlier ranks, +rank].
    """
    if not mu.is_ordered():
        raise OrderedDatumRequired("slope blocks need a weakly decreasing datum")
    blocks = []
    for D in range(mu.h, 0, -1):  # ascending slope order
        alpha = tuple(
            sum(1 for d in row if d >= D) for row in mu.rows
        )
        if blocks and blocks[-1][1] == alpha:
            blocks[-1][0] += 1
        else:
            blocks.append([1, alpha])
    return [(r, a) for r, a in blocks]


def rank_one_crystal(field, exponents):
    """The crystal of rank one with Frobenius pi^{exponents[tau]} at tau."""
    if len(exponents) != field.f:
        raise InvalidDatum("need one exponent per embedding")
    return Crystal(
        field,
        [
            RamMatrix(field, t, [[field.pi_pow(t, a)]])
            for t, a in enumerate(exponents)
        ],
    )


def mu_ordinary_model(mu, *, p=3, n=None, eisenstein=None, precision=None,
                      field=None):
    """The split mu-ordinary instance realizing mu.sorted_desc().

    Returns (crystal, filtration, ordered_datum).  Basis slots are ordered by
    ascending slope (D = h down to 1); the flag at level i scales slot D by
    pi^{max(alpha_tau(D)-i, 0)}.
    """
    from .crystal import _field_for  # shared field construction

    mu = mu.sorted_desc()
    if mu.levels != mu.e:
        raise InvalidDatum("the model needs one level per pi-step")
    if field is None:
        field = _field_for(mu, p=p, n=n, eisenstein=eisenstein,
                           precision=precision)
    h, e, f = mu.h, mu.e, mu.f
    alphas = [
        [sum(1 for d in mu.rows[t] if d >= D) for D in range(h, 0, -1)]
        for t in range(f)
    ]
    Y = [
        RamMatrix.diagonal(field, t, [field.pi_pow(t, a) for a in alphas[t]])
        for t in range(f)
    ]
    levels = []
    for t in range(f):
        flags = [
            RamMatrix.diagonal(
                field, t,
                [field.pi_pow(t, max(a - i, 0)) for a in alphas[t]],
            )
            for i in range(e + 1)
        ]
        levels.append(flags)
    return Crystal(field, Y), PRFiltration(field, levels), mu


def change_basis(c, mats, fil=None):
    """Gauge transform by unimodular P_tau: Y'_tau = P_tau^{-1} Y_tau
    sigma(P_{tau-1}), flags G'_{tau,i} = P_tau^{-1} G_{tau,i}."""
    f = c.field.f
    inv = [m.inverse() for m in mats]
    Y = [inv[t] * c.Y[t] * mats[(t - 1) % f].sigma(1) for t in range(f)]
    c2 = Crystal(c.field, Y)
    if fil is None:
        return c2
    levels = [
        [inv[t] * fil.matrix(t, i) for i in range(fil.r + 1)]
        for t in range(f)
    ]
    return c2, PRFiltration(c.field, levels)


# ---------------------------------------------------------------------------
# stable images and the etale part
# ---------------------------------------------------------------------------


def _composite_forward(mats, tau, steps):
    """acc = M_tau * sigma(M_{tau-1}) * ... (steps factors), the matrix of
    the composed semilinear maps into slot tau."""
    f = mats[0].ring.f
    acc = mats[tau % f]
    for k in range(1, steps):
        acc = acc * mats[(tau - k) % f].sigma(k)
    return acc


def _composite_backward(mats, tau, steps):
    """acc for maps that step tau -> tau-1 (Verschiebung direction):
    acc = M_{tau-steps+1}-last ... built so acc * sigma^{-steps}(x) composes
    them starting at slot tau."""
    acc = None
    f = mats[0].ring.f
    for k in range(steps):
        m = mats[(tau - k) % f]
        acc = m if acc is None else m * acc.sigma(-1)
        # note: after k+1 factors acc maps slot tau to slot tau-k-1
    return acc


def _stable_unit_image(b, max_doublings=24):
    """Stable image of the linear endomorphism b: squares b until every
    non-unit elementary divisor has sunk below the working precision, then
    returns (generators of the unit part, their count)."""
    m = b
    for _ in range(max_doublings):
        sf = smith_form(m)
        units = [j for j, x in enumerate(sf.exps) if x == 0]
        others = [x for x in sf.exps if x != 0]
        if all(x is None for x in others):
            if not units:
                return None, 0
            cols = sf.pinv.cols()
            return RamMatrix.from_cols(m.ring, m.tau, [cols[j] for j in units]), len(units)
        m = m * m
    raise PrecisionExhausted("stable image did not separate at this precision")


class EtalePart:
    """A maximal unit-root summand: generators per embedding and the
    restricted (unit) Frobenius matrices."""

    __slots__ = ("generators", "Y", "rank")

    def __init__(self, generators, Y):
        self.generators = generators
        self.Y = Y
        self.rank = generators[0].ncols


def etale_part(c):
    """The unit-root part of the crystal, as stable images of the linear
    total Frobenius; EmptyEtalePart when the smallest Newton slope is
    positive."""
    if c.newton_polygon().slopes[0] != 0:
        raise EmptyEtalePart("smallest Newton slope is positive")
    f, n = c.field.f, c.field.base.n
    gens = []
    rank = None
    for t in range(f):
        g, r = _stable_unit_image(_composite_forward(c.Y, t, n))
        if rank is None:
            rank = r
        if r != rank or g is None:
            raise PrecisionExhausted("etale rank disagrees across embeddings")
        gens.append(g)
    restricted = [
        solve_tall(gens[t], c.Y[t] * gens[(t - 1) % f].sigma(1))
        for t in range(f)
    ]
    for m in restricted:
        if any(x != 0 for x in smith_form(m).exps):
            raise PrecisionExhausted("restricted Frobenius not a unit")
    return EtalePart(gens, restricted)


# ---------------------------------------------------------------------------
# Hodge-Newton splitting
# ---------------------------------------------------------------------------


def _hodge_exps(c, tau):
    """Sorted integer pi-exponents of the elementary divisors of Y_tau."""
    sf = smith_form(c.Y[tau % c.field.f])
    if not sf.certified():
        raise PrecisionExhausted("uncertified Hodge exponents")
    return sorted(sf.exps)


class SplitResult:
    """A certified direct-sum decomposition M = N + C with N the
    slope-<= part (columns sub_cols) and C the slope-> part."""

    __slots__ = ("sub", "complement", "sub_cols", "comp_cols")

    def __init__(self, sub, complement, sub_cols, comp_cols):
        self.sub = sub
        self.complement = complement
        self.sub_cols = sub_cols
        self.comp_cols = comp_cols


def hodge_newton_split(c, at, extra_precision=None):
    """Split off the first `at` Newton slopes at a break contact.

    `at` must be an interior vertex of the Newton polygon lying on the
    averaged Hodge polygon (NotABreakContact otherwise).  Returns a
    SplitResult whose parts are Frobenius-stable summands with the two
    halves of the Newton polygon; NotDecomposable if the canonical
    slope lattices fail to be complementary.
    """
    h = c.h
    s = at
    if not 0 < s < h:
        raise NotABreakContact(f"abscissa {s} is not interior to [0, {h}]")
    newt = c.newton_polygon()
    if newt.slopes[s - 1] == newt.slopes[s]:
        raise NotABreakContact(f"Newton polygon has no vertex at {s}")
    if newt.eval(s) != c.hodge_polygon().eval(s):
        raise NotABreakContact(
            f"Newton vertex at {s} does not touch the Hodge polygon"
        )

    if extra_precision is None:
        extra_precision = (c.field.f + 2) * h + c.field.e + 8
    cw = c.with_precision(c.field.base.N + extra_precision)
    field = cw.field
    f, e, n = field.f, field.e, field.base.n
    r = h - s

    exps_all = [_hodge_exps(cw, t) for t in range(f)]
    hodge_lo = [sum(exps_all[t][:s]) for t in range(f)]
    # the companion is normalized by the largest elementary divisor (not by
    # p = pi^e) so crystals with Hodge exponents above e still split
    tops = [max(exps_all[t]) for t in range(f)]
    hodge_hi = [
        r * tops[t] - (sum(exps_all[t]) - hodge_lo[t]) for t in range(f)
    ]

    # slope-<= part: unit eigendirection of the normalized wedge Frobenius
    xw = [cw.Y[t].compound(s).div_pi(hodge_lo[t]) for t in range(f)]
    # slope-> part: same on the Verschiebung side
    vm = []
    for t in range(f):
        pid = RamMatrix.identity(field, t, h).scale_pi(tops[t])
        vm.append(solve_right(cw.Y[t], pid).sigma(-1))
    zw = [vm[t].compound(r).div_pi(hodge_hi[t]) for t in range(f)]

    sub_cols, comp_cols = [], []
    for t in range(f):
        line_f, r0 = _stable_unit_image(_composite_forward(xw, t, n))
        if r0 != 1:
            raise NotDecomposable(
                f"wedge Frobenius unit part has rank {r0} at embedding {t}"
            )
        line_v, r1 = _stable_unit_image(_composite_backward(zw, t, n))
        if r1 != 1:
            raise NotDecomposable(
                f"wedge Verschiebung unit part has rank {r1} at embedding {t}"
            )
        sub_cols.append(_lattice_from_line(field, t, line_f.col(0), s, h))
        comp_cols.append(_lattice_from_line(field, t, line_v.col(0), r, h))

    basis = [sub_cols[t].hstack(comp_cols[t]) for t in range(f)]
    for t in range(f):
        if any(x != 0 for x in smith_form(basis[t]).exps):
            raise NotDecomposable(
                "slope lattices are not complementary summands"
            )
    sub_Y, comp_Y = [], []
    for t in range(f):
        full = solve_right(basis[t], cw.Y[t] * basis[(t - 1) % f].sigma(1))
        for i in range(s, h):
            for j in range(s):
                if not full.rows[i][j].is_zero():
                    raise NotDecomposable("slope-<= part is not stable")
        for i in range(s):
            for j in range(s, h):
                if not full.rows[i][j].is_zero():
                    raise NotDecomposable("decomposition is not block diagonal")
        sub_Y.append(full.block(0, s, 0, s))
        comp_Y.append(full.block(s, h, s, h))
    sub = Crystal(field, sub_Y)
    comp = Crystal(field, comp_Y)
    assert list(sub.newton_polygon().slopes) == list(newt.slopes[:s])
    assert list(comp.newton_polygon().slopes) == list(newt.slopes[s:])
    return SplitResult(sub, comp, sub_cols, comp_cols)


def _lattice_from_line(field, tau, line, rank, h):
    """Saturated rank-`rank` sublattice whose Pluecker line is `line`:
    the kernel of x -> x wedge line, certified decomposable."""
    from itertools import combinations

    subs = list(combinations(range(h), rank))
    bigger = list(combinations(range(h), rank + 1))
    pos = {sset: k for k, sset in enumerate(subs)}
    rows = []
    for bset in bigger:
        row = []
        for j in range(h):
            if j not in bset:
                row.append(field.zero(tau))
                continue
            rest = tuple(x for x in bset if x != j)
            sign = (-1) ** bset.index(j)
            coeff = line[pos[rest]]
            row.append(coeff if sign > 0 else -coeff)
        rows.append(row)
    w = RamMatrix(field, tau, rows)
    kcols = smith_form(w).kernel_cols()
    if len(kcols) != rank:
        raise NotDecomposable("Pluecker line is not decomposable")
    kernel = RamMatrix.from_cols(field, tau, kcols)
    got = wedge_coords(field, tau, kcols)
    if not _same_line(got, list(line)):
        raise NotDecomposable("kernel wedge does not recover the line")
    return kernel


def _same_line(v, w):
    """Both primitive vectors and proportional (all cross products agree)."""
    for vec in (v, w):
        if not any(x.is_unit() for x in vec):
            return False
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            if v[i] * w[j] != v[j] * w[i]:
                return False
    return True


# ---------------------------------------------------------------------------
# full decomposition of a mu-ordinary instance
# ---------------------------------------------------------------------------


def mu_ordinary_decomposition(c, mu):
    """Split a mu-ordinary instance into its isoclinic summands and certify
    each is a twist of a unit-root crystal.

    Returns the list of (rank, alpha) matching slope_break_data(mu);
    NotMuOrdinary when Newton differs from the filtration polygon.
    """
    from .hasse import is_mu_ordinary

    if not is_mu_ordinary(c, mu):
        raise NotMuOrdinary("Newton polygon differs from the filtration polygon")
    blocks = slope_break_data(mu.sorted_desc())
    remaining = c
    out = []
    for rank, alpha in blocks:
        if remaining.h > rank:
            split = hodge_newton_split(remaining, rank)
            piece, remaining = split.sub, split.complement
        else:
            piece, remaining = remaining, None
        twisted = Crystal(
            piece.field,
            [piece.Y[t].div_pi(alpha[t]) for t in range(piece.field.f)],
        )
        ep = etale_part(twisted)
        if ep.rank != rank:
            raise NotDecomposable(
                f"isoclinic factor of rank {rank} is not a unit-root twist"
            )
        out.append((rank, alpha))
    return out
