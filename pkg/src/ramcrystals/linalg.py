"""Exact linear algebra over the ramified Witt rings.

Matrices are immutable row-major tuples of RamElem sharing one (ring, tau).
Everything here is division-free or divides only by certified units /
pi-powers, so results stay exact at the tracked precision:

* characteristic polynomials and adjugates use the Berkowitz algorithm,
* Smith normal forms pivot on minimal pi-valuation (ties to the lowest
  (row, col)) and record the four transform matrices,
* compound (exterior-power) matrices are minor determinants in the lex
  order of index subsets,
* lattice spans are compared by integral solvability both ways.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .errors import (
    InvalidDatum,
    NotDivisible,
    PrecisionExhausted,
)
from .witt import ABOVE_PRECISION


class RamMatrix:
    __slots__ = ("ring", "tau", "rows")

    def __init__(self, ring, tau, rows):
        rows = tuple(tuple(r) for r in rows)
        if rows:
            w = len(rows[0])
            assert all(len(r) == w for r in rows), "ragged matrix"
            for r in rows:
                for x in r:
                    assert x.ring is ring and x.tau == tau % ring.f, (
                        "matrix entries from mixed rings/embeddings"
                    )
        self.ring = ring
        self.tau = tau % ring.f
        self.rows = rows

    # -- construction -------------------------------------------------------

    @classmethod
    def identity(cls, ring, tau, n, prec=None):
        one, zero = ring.one(tau, prec), ring.zero(tau, prec)
        return cls(
            ring, tau, [[one if i == j else zero for j in range(n)] for i in range(n)]
        )

    @classmethod
    def zeros(cls, ring, tau, r, c, prec=None):
        zero = ring.zero(tau, prec)
        return cls(ring, tau, [[zero] * c for _ in range(r)])

    @classmethod
    def diagonal(cls, ring, tau, entries):
        zero = ring.zero(tau)
        n = len(entries)
        return cls(
            ring,
            tau,
            [[entries[i] if i == j else zero for j in range(n)] for i in range(n)],
        )

    @classmethod
    def from_cols(cls, ring, tau, cols):
        if not cols:
            raise InvalidDatum("no columns")
        h = len(cols[0])
        return cls(ring, tau, [[col[i] for col in cols] for i in range(h)])

    # -- shape --------------------------------------------------------------

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    def col(self, j):
        return [r[j] for r in self.rows]

    def cols(self):
        return [self.col(j) for j in range(self.ncols)]

    def transpose(self):
        return RamMatrix(self.ring, self.tau, zip(*self.rows))

    def block(self, r0, r1, c0, c1):
        return RamMatrix(self.ring, self.tau, [r[c0:c1] for r in self.rows[r0:r1]])

    def hstack(self, other):
        assert self.nrows == other.nrows
        return RamMatrix(
            self.ring, self.tau, [a + b for a, b in zip(self.rows, other.rows)]
        )

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        return RamMatrix(
            self.ring,
            self.tau,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
        )

    def __sub__(self, other):
        return RamMatrix(
            self.ring,
            self.tau,
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
        )

    def __neg__(self):
        return RamMatrix(self.ring, self.tau, [[-a for a in r] for r in self.rows])

    def __mul__(self, other):
        if isinstance(other, RamMatrix):
            assert other.ring is self.ring and other.tau == self.tau, (
                "composing matrices over different embeddings; apply sigma first"
            )
            assert self.ncols == other.nrows, "shape mismatch"
            bt = other.transpose().rows
            return RamMatrix(
                self.ring,
                self.tau,
                [
                    [_dot(row, col) for col in bt]
                    for row in self.rows
                ],
            )
        return RamMatrix(
            self.ring, self.tau, [[a * other for a in r] for r in self.rows]
        )

    def __rmul__(self, other):
        return self.__mul__(other)

    def apply_col(self, vec):
        """Matrix times a column vector (list of RamElem)."""
        assert len(vec) == self.ncols
        return [_dot(row, vec) for row in self.rows]

    def sigma(self, m=1):
        return RamMatrix(
            self.ring,
            (self.tau + m) % self.ring.f,
            [[a.sigma(m) for a in r] for r in self.rows],
        )

    def scale_pi(self, j):
        if j == 0:
            return self
        pw = self.ring.pi_pow(self.tau, j)
        return RamMatrix(self.ring, self.tau, [[a * pw for a in r] for r in self.rows])

    def div_pi(self, j):
        if j == 0:
            return self
        return RamMatrix(
            self.ring, self.tau, [[a.div_pi(j) for a in r] for r in self.rows]
        )

    def at_prec(self, prec):
        return RamMatrix(
            self.ring, self.tau, [[a.at_prec(prec) for a in r] for r in self.rows]
        )

    @property
    def prec(self):
        return min(a.prec for r in self.rows for a in r)

    def is_zero(self):
        return all(a.is_zero() for r in self.rows for a in r)

    def min_valuation(self):
        """Minimal pi-normalized valuation over all entries."""
        best = None
        for r in self.rows:
            for a in r:
                v = a.valuation()
                if v is ABOVE_PRECISION:
                    continue
                if best is None or v < best:
                    best = v
        return ABOVE_PRECISION if best is None else best

    def __eq__(self, other):
        if not isinstance(other, RamMatrix):
            return NotImplemented
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            return False
        return all(
            a == b for r1, r2 in zip(self.rows, other.rows) for a, b in zip(r1, r2)
        )

    __hash__ = None

    def __repr__(self):
        return f"RamMatrix(tau={self.tau}, {self.nrows}x{self.ncols})"

    # -- polynomial invariants ----------------------------------------------

    def charpoly(self):
        """Monic characteristic polynomial by the Berkowitz algorithm.

        Returns [1, c_1, ..., c_n] with det(lambda*I - A) =
        lambda^n + c_1 lambda^{n-1} + ... + c_n.  Division-free.
        """
        n = self.nrows
        assert n == self.ncols, "characteristic polynomial of a non-square matrix"
        ring, tau = self.ring, self.tau
        one = ring.one(tau, self.prec)
        if n == 0:
            return [one]
        rows = self.rows

        def vector(k):
            # charpoly coefficient vector of the lower-right k x k block,
            # built up by Berkowitz' Toeplitz recurrence
            i0 = n - k
            a = rows[i0][i0]
            if k == 1:
                return [one, -a]
            r = rows[i0][i0 + 1 :]
            c = [rows[i][i0] for i in range(i0 + 1, n)]
            sub = [row[i0 + 1 :] for row in rows[i0 + 1 :]]
            items = [one, -a]
            vec = c
            for _ in range(k - 1):
                items.append(-_dot(r, vec))
                vec = [_dot(row, vec) for row in sub]
            prev = vector(k - 1)
            out = []
            for i in range(k + 1):
                acc = None
                for j in range(min(i, k - 1) + 1):
                    if i - j <= k:
                        term = items[i - j] * prev[j]
                        acc = term if acc is None else acc + term
                out.append(acc)
            return out

        return vector(n)

    def det(self):
        n = self.nrows
        if n == 0:
            return self.ring.one(self.tau)
        cn = self.charpoly()[-1]
        return cn if n % 2 == 0 else -cn

    def adjugate(self):
        """adj(A) with A*adj(A) = det(A)*I, division-free via Cayley-Hamilton."""
        n = self.nrows
        ring, tau = self.ring, self.tau
        if n == 0:
            return self
        cp = self.charpoly()
        acc = RamMatrix.identity(ring, tau, n, self.prec) * cp[0]
        for k in range(1, n):
            acc = self * acc + RamMatrix.identity(ring, tau, n, self.prec) * cp[k]
        return acc if n % 2 == 1 else -acc

    def inverse(self):
        return solve_right(self, RamMatrix.identity(self.ring, self.tau, self.nrows))

    def compound(self, s):
        """The s-th compound: minors indexed by lex-ordered s-subsets."""
        n, m = self.nrows, self.ncols
        if s == 0:
            return RamMatrix.identity(self.ring, self.tau, 1, self.prec)
        rsets = list(combinations(range(n), s))
        csets = list(combinations(range(m), s))
        out = []
        for I in rsets:
            row = []
            for J in csets:
                sub = RamMatrix(
                    self.ring, self.tau, [[self.rows[i][j] for j in J] for i in I]
                )
                row.append(sub.det())
            out.append(row)
        return RamMatrix(self.ring, self.tau, out)


def _dot(xs, ys):
    acc = None
    for x, y in zip(xs, ys):
        t = x * y
        acc = t if acc is None else acc + t
    assert acc is not None
    return acc


def wedge_coords(ring, tau, vectors):
    """Pluecker coordinates of v_1 ^ ... ^ v_s in the lex subset basis."""
    s = len(vectors)
    h = len(vectors[0])
    mat = RamMatrix(ring, tau, [[vectors[j][i] for j in range(s)] for i in range(h)])
    out = []
    for I in combinations(range(h), s):
        sub = RamMatrix(ring, tau, [[mat.rows[i][j] for j in range(s)] for i in I])
        out.append(sub.det())
    return out


def solve_right(a, b):
    """The X with a*X = b over the local ring, via adjugate and exact division.

    Raises NotDivisible when no integral solution exists and
    PrecisionExhausted when det(a) cannot be certified nonzero.
    """
    det = a.det()
    v = det.valuation()
    if v is ABOVE_PRECISION:
        raise PrecisionExhausted("determinant vanishes at working precision")
    c = int(v * a.ring.e)
    w = det.div_pi(c)
    winv = w.inverse()
    raw = a.adjugate() * b
    return RamMatrix(
        a.ring,
        a.tau,
        [[(x * winv).div_pi(c) for x in row] for row in raw.rows],
    )


def solve_tall(a, b):
    """The X with a*X = b for a tall full-column-rank a, via Smith form.

    Raises NotDivisible when b is outside the span of a's columns and
    PrecisionExhausted when the column rank cannot be certified.
    """
    sf = smith_form(a)
    if not sf.certified():
        raise PrecisionExhausted("tall solve: rank-deficient at precision")
    top = sf.p * b
    for i in range(a.ncols, a.nrows):
        for x in top.rows[i]:
            if not x.is_zero():
                raise NotDivisible("right side outside the column span")
    y = RamMatrix(
        a.ring,
        a.tau,
        [
            [x.div_pi(sf.exps[j]) for x in top.rows[j]]
            for j in range(a.ncols)
        ],
    )
    return sf.q * y


def span_contains(a, b):
    """Is every column of b in the lattice spanned by the columns of a?"""
    try:
        solve_right(a, b)
        return True
    except NotDivisible:
        return False


def span_equal(a, b):
    return span_contains(a, b) and span_contains(b, a)


class SmithResult:
    """P*A*Q = D with D = diag(pi^c) up to zero-at-precision trailing part.

    `exps` holds the pi-exponents c_j in non-decreasing order; a None entry
    means the corresponding divisor was indistinguishable from zero at the
    working precision.  Pinv and Qinv invert P and Q exactly.
    """

    __slots__ = ("p", "pinv", "q", "qinv", "d", "exps")

    def __init__(self, p, pinv, q, qinv, d, exps):
        self.p = p
        self.pinv = pinv
        self.q = q
        self.qinv = qinv
        self.d = d
        self.exps = exps

    def certified(self):
        return all(c is not None for c in self.exps)

    def valuations(self):
        if not self.certified():
            raise PrecisionExhausted("uncertified elementary divisors")
        e = self.d.ring.e
        return [Fraction(c, e) for c in self.exps]

    def kernel_cols(self):
        """Columns of Q at uncertified divisors, plus the columns beyond the
        diagonal band of a wide matrix: a saturated kernel basis."""
        cols = [self.q.col(j) for j, c in enumerate(self.exps) if c is None]
        cols += [self.q.col(j) for j in range(len(self.exps), self.q.ncols)]
        return cols


def smith_form(a):
    """Smith normal form over the DVR, pivoting on minimal valuation.

    Pivots take the smallest pi-valuation in the remaining block, ties
    resolved to the lowest (row, col).  Pivot rows are scaled so the
    diagonal becomes an exact pi power.
    """
    ring, tau = a.ring, a.tau
    r, c = a.nrows, a.ncols
    m = [list(row) for row in a.rows]
    p = [list(row) for row in RamMatrix.identity(ring, tau, r).rows]
    pinv = [list(row) for row in RamMatrix.identity(ring, tau, r).rows]
    q = [list(row) for row in RamMatrix.identity(ring, tau, c).rows]
    qinv = [list(row) for row in RamMatrix.identity(ring, tau, c).rows]
    exps = []

    def swap_rows(i1, i2):
        m[i1], m[i2] = m[i2], m[i1]
        p[i1], p[i2] = p[i2], p[i1]
        for row in pinv:
            row[i1], row[i2] = row[i2], row[i1]

    def swap_cols(j1, j2):
        for row in m:
            row[j1], row[j2] = row[j2], row[j1]
        for row in q:
            row[j1], row[j2] = row[j2], row[j1]
        qinv[j1], qinv[j2] = qinv[j2], qinv[j1]

    for k in range(min(r, c)):
        best = None
        for i in range(k, r):
            for j in range(k, c):
                v = m[i][j].valuation()
                if v is ABOVE_PRECISION:
                    continue
                if best is None or v < best[0]:
                    best = (v, i, j)
        if best is None:
            exps.extend([None] * (min(r, c) - k))
            break
        v, i, j = best
        swap_rows(k, i)
        swap_cols(k, j)
        ck = int(v * ring.e)
        w = m[k][k].div_pi(ck)
        winv = w.inverse()
        # scale row k by winv so the pivot becomes exactly pi^ck
        m[k] = [x * winv for x in m[k]]
        p[k] = [x * winv for x in p[k]]
        for row in pinv:
            row[k] = row[k] * w
        for i2 in range(r):
            if i2 == k or m[i2][k].is_zero():
                continue
            factor = m[i2][k].div_pi(ck)
            m[i2] = [x - factor * y for x, y in zip(m[i2], m[k])]
            p[i2] = [x - factor * y for x, y in zip(p[i2], p[k])]
            for row in pinv:
                row[k] = row[k] + factor * row[i2]
        for j2 in range(c):
            if j2 == k or m[k][j2].is_zero():
                continue
            factor = m[k][j2].div_pi(ck)
            for row in m:
                row[j2] = row[j2] - factor * row[k]
            for row in q:
                row[j2] = row[j2] - factor * row[k]
            qinv[k] = [x + factor * y for x, y in zip(qinv[k], qinv[j2])]
        exps.append(ck)

    mk = lambda rows: RamMatrix(ring, tau, rows)
    return SmithResult(mk(p), mk(pinv), mk(q), mk(qinv), mk(m), exps)


def smith_valuations(a):
    """Elementary divisor valuations (Fractions), or PrecisionExhausted."""
    return smith_form(a).valuations()


def lattice_reduce(ring, tau, cols, h):
    """Square generator matrix of the lattice spanned by `cols` in rank h.

    Column-only elimination: for each row in turn, pick the remaining column
    with minimal valuation in that row (ties to the lowest column index) and
    clear the row in all other columns.  Raises PrecisionExhausted if the
    span is not full rank at the working precision.
    """
    work = [list(col) for col in cols]
    out = []
    for r in range(h):
        best = None
        for j, col in enumerate(work):
            v = col[r].valuation()
            if v is ABOVE_PRECISION:
                continue
            if best is None or v < best[0]:
                best = (v, j)
        if best is None:
            raise PrecisionExhausted(
                f"lattice generators have rank < {h} at working precision"
            )
        v, j = best
        pivot = work.pop(j)
        cv = int(v * ring.e)
        w = pivot[r].div_pi(cv)
        winv = w.inverse()
        for j2, col in enumerate(work):
            if col[r].is_zero():
                continue
            factor = col[r].div_pi(cv) * winv
            work[j2] = [x - factor * y for x, y in zip(col, pivot)]
        out.append(pivot)
    return RamMatrix.from_cols(ring, tau, out)


def min_valuation_of_cols(cols):
    best = None
    for col in cols:
        for x in col:
            v = x.valuation()
            if v is ABOVE_PRECISION:
                continue
            if best is None or v < best:
                best = v
    return ABOVE_PRECISION if best is None else best
