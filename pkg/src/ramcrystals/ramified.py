"""Ramified extensions of truncated Witt rings.

For an Eisenstein polynomial E over W(F_{p^f}) (coefficients fixed by
sigma^f), the ring at embedding tau in Z/f is

    W_tau(k) = W(k)[x] / (sigma^tau E)(x),      k = F_{p^n},  f | n,

a complete DVR with uniformizer pi = x, residue field k, and normalized
valuation v(pi) = 1/e, v(p) = 1.  Elements are stored as e-tuples of
WittElem coordinates in the pi-power basis.  The Frobenius lift sigma maps
the ring at tau isomorphically onto the ring at tau+1 (pi is fixed, the
coordinates move by the Witt Frobenius), so a single LocalField instance
carries the whole tau-indexed family.

Valuations in (1/e)Z are exact: the e coordinate contributions
(e*v_p(x_j) + j)/e have pairwise distinct residues mod 1, so no cancellation
can hide the minimum.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InvalidDatum, NotDivisible, PrecisionExhausted
from .witt import ABOVE_PRECISION, BaseField, WittElem


class LocalField:
    """The tau-indexed family of ramified Witt rings for one Eisenstein E.

    `eisenstein` is a list of e+1 coefficient descriptors (int, or a list of
    n ints giving W(k)-coordinates); the default is x^e - p.  The unit u with
    p = u * pi^e is computed once per tau.
    """

    def __init__(self, base: BaseField, f, e, eisenstein=None):
        if f < 1 or e < 1:
            raise InvalidDatum("need f >= 1 and e >= 1")
        if base.n % f != 0:
            raise InvalidDatum(f"f = {f} must divide n = {base.n}")
        self.base = base
        self.f = f
        self.e = e
        if eisenstein is None:
            eisenstein = [-base.p] + [0] * (e - 1) + [1]
        if len(eisenstein) != e + 1:
            raise InvalidDatum(f"Eisenstein polynomial needs {e + 1} coefficients")
        # raw coefficients are kept exact (never reduced mod p^N): they
        # define the ring itself, so re-reading at a higher precision must
        # reproduce the same extension.  A coordinate vector supported on
        # the first slot is canonicalized to the plain integer.
        def canon(c):
            if isinstance(c, int):
                return c
            t = tuple(c)
            return t[0] if all(x == 0 for x in t[1:]) else t

        self.eisenstein_raw = tuple(canon(c) for c in eisenstein)
        coeffs = [base.witt(c) for c in self.eisenstein_raw]
        if not (coeffs[e] - base.one()).is_zero():
            raise InvalidDatum("Eisenstein polynomial must be monic")
        if coeffs[0].val_p() != 1:
            raise InvalidDatum("constant coefficient must have v_p exactly 1")
        for j in range(1, e):
            vj = coeffs[j].val_p()
            if vj is not ABOVE_PRECISION and vj < 1:
                raise InvalidDatum(f"coefficient {j} must be divisible by p")
        for c in coeffs:
            if not c.sigma(f) == c:
                raise InvalidDatum("Eisenstein coefficients must be sigma^f-fixed")
        # per-tau embedded coefficients: (sigma^tau E)
        self._E = [[c.sigma(t) for c in coeffs] for t in range(f)]
        self._u = [self._compute_unit(t) for t in range(f)]

    def _compute_unit(self, tau):
        """Solve p = u * pi^e: u = -(c0/p)^{-1} * (1 + delta)^{-1}."""
        default = (-self.base.p,) + (0,) * (self.e - 1) + (1,)
        if self.eisenstein_raw == default:
            return self.one(tau)
        E = self._E[tau]
        w0 = E[0].divide_p(1)
        w0inv = w0.inverse()
        delta = [self.base.zero(w0inv.prec)] * self.e
        for j in range(1, self.e):
            delta[j] = E[j].divide_p(1) * w0inv
        one_plus = RamElem(self, tau, tuple(delta)) + 1
        u = -w0inv * one_plus.inverse()
        assert u * self.pi(tau) ** self.e == self.from_int(self.base.p, tau), (
            "unit u fails p = u * pi^e"
        )
        return u

    # -- constructors -------------------------------------------------------

    def elem(self, coeffs, tau, prec=None):
        """Build an element from e coordinate descriptors (ints, n-lists, or
        WittElems)."""
        out = []
        for c in coeffs:
            if isinstance(c, WittElem):
                out.append(c if prec is None else c.at_prec(min(prec, c.prec)))
            else:
                out.append(self.base.witt(c, prec))
        return RamElem(self, tau, tuple(out))

    def zero(self, tau, prec=None):
        return self.elem([0] * self.e, tau, prec)

    def one(self, tau, prec=None):
        return self.elem([1] + [0] * (self.e - 1), tau, prec)

    def pi(self, tau, prec=None):
        if self.e == 1:
            # pi = -c0 when E = x - c0; in general e = 1 means pi-adic = p-adic
            return RamElem(self, tau, (-self._E[tau][0],))
        return self.elem([0, 1] + [0] * (self.e - 2), tau, prec)

    def pi_pow(self, tau, j, prec=None):
        return self.pi(tau, prec) ** j

    def u(self, tau):
        return self._u[tau]

    def from_witt(self, w, tau, pos=0):
        coeffs = [self.base.zero(w.prec)] * self.e
        coeffs[pos] = w
        return RamElem(self, tau, tuple(coeffs))

    def from_int(self, m, tau, prec=None):
        return self.elem([m] + [0] * (self.e - 1), tau, prec)

    def random_elem(self, rng, tau, prec=None):
        return RamElem(
            self,
            tau,
            tuple(self.base.random_witt(rng, prec) for _ in range(self.e)),
        )

    def random_unit(self, rng, tau, prec=None):
        while True:
            x = self.random_elem(rng, tau, prec)
            if x.is_unit():
                return x

    def with_precision(self, precision):
        if precision == self.base.N:
            return self
        return LocalField(
            self.base.with_precision(precision),
            self.f,
            self.e,
            list(self.eisenstein_raw),
        )

    def same_ring(self, other):
        return (
            self.base.same_field(other.base)
            and self.f == other.f
            and self.e == other.e
            and self.eisenstein_raw == other.eisenstein_raw
        )

    def __repr__(self):
        return (
            f"LocalField(p={self.base.p}, n={self.base.n}, f={self.f}, "
            f"e={self.e}, N={self.base.N})"
        )


class RamElem:
    """An element of W_tau(k), coordinates in the pi-power basis."""

    __slots__ = ("ring", "tau", "coeffs")

    def __init__(self, ring, tau, coeffs):
        assert len(coeffs) == ring.e
        prec = min(c.prec for c in coeffs)
        self.ring = ring
        self.tau = tau % ring.f
        self.coeffs = tuple(c.at_prec(prec) for c in coeffs)

    @property
    def prec(self):
        return self.coeffs[0].prec

    def _sync(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other, self.tau, self.prec)
        elif isinstance(other, WittElem):
            other = self.ring.from_witt(other, self.tau)
        assert other.ring is self.ring and other.tau == self.tau, (
            "mixed rings or embeddings"
        )
        return other

    def __add__(self, other):
        other = self._sync(other)
        return RamElem(
            self.ring,
            self.tau,
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = self._sync(other)
        return RamElem(
            self.ring,
            self.tau,
            tuple(a - b for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return RamElem(self.ring, self.tau, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, WittElem)):
            w = other if isinstance(other, WittElem) else None
            if w is None:
                return RamElem(
                    self.ring, self.tau, tuple(c * other for c in self.coeffs)
                )
            return RamElem(self.ring, self.tau, tuple(c * w for c in self.coeffs))
        other = self._sync(other)
        e = self.ring.e
        prec = min(self.prec, other.prec)
        a = [c.at_prec(prec) for c in self.coeffs]
        b = [c.at_prec(prec) for c in other.coeffs]
        zero = self.ring.base.zero(prec)
        conv = [zero] * (2 * e - 1)
        for i, x in enumerate(a):
            if x.is_zero():
                continue
            for j, y in enumerate(b):
                conv[i + j] = conv[i + j] + x * y
        # reduce by the monic (sigma^tau E): x^e = -sum_{j<e} c_j x^j
        E = self.ring._E[self.tau]
        for d in range(2 * e - 2, e - 1, -1):
            t = conv[d]
            if t.is_zero():
                continue
            for j in range(e):
                conv[d - e + j] = conv[d - e + j] - t * E[j].at_prec(prec)
        return RamElem(self.ring, self.tau, tuple(conv[:e]))

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.ring.one(self.tau, self.prec)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sigma(self, m=1):
        """The Frobenius lift: ring at tau -> ring at tau+m; pi is fixed."""
        if m % self.ring.base.n == 0 and m % self.ring.f == 0:
            return self
        return RamElem(
            self.ring,
            (self.tau + m) % self.ring.f,
            tuple(c.sigma(m) for c in self.coeffs),
        )

    def valuation(self):
        """pi-normalized valuation in (1/e)Z, or ABOVE_PRECISION."""
        e = self.ring.e
        best = None
        for j, c in enumerate(self.coeffs):
            v = c.val_p()
            if v is ABOVE_PRECISION:
                continue
            cand = Fraction(e * v + j, e)
            if best is None or cand < best:
                best = cand
        return ABOVE_PRECISION if best is None else best

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def is_unit(self):
        return self.coeffs[0].is_unit()

    def residue(self):
        """Image in k = W_tau(k)/(pi)."""
        return self.coeffs[0].residue()

    def divide_coords_p(self, m):
        if m == 0:
            return self
        return RamElem(
            self.ring, self.tau, tuple(c.divide_p(m) for c in self.coeffs)
        )

    def div_pi(self, j):
        """Exact division by pi^j; costs ceil(j/e) digits of p-adic precision.

        Uses 1/pi^e = u/p: for j = q*e + r with r > 0,
        x/pi^j = x * pi^{e-r} * u^{q+1} / p^{q+1}.
        Raises NotDivisible when pi^j does not divide x.
        """
        if j == 0:
            return self
        if j < 0:
            return self * self.ring.pi_pow(self.tau, -j, self.prec)
        q, r = divmod(j, self.ring.e)
        u = self.ring.u(self.tau)
        if r == 0:
            y = self * u**q if q else self
            return y.divide_coords_p(q)
        y = self * self.ring.pi_pow(self.tau, self.ring.e - r) * u ** (q + 1)
        return y.divide_coords_p(q + 1)

    def inverse(self):
        """Inverse of a unit by Newton iteration from the residue inverse."""
        if not self.is_unit():
            raise NotDivisible("inverting a non-unit")
        ring, tau = self.ring, self.tau
        y = ring.from_witt(self.residue().inverse().lift(self.prec), tau)
        one = ring.one(tau, self.prec)
        two = one + one
        steps = max(1, (self.ring.e * self.prec - 1).bit_length() + 1)
        for _ in range(steps):
            y = y * (two - self * y)
        assert (self * y - one).is_zero(), "Newton inversion failed"
        return y

    def unit_part(self, val_num=None):
        """Write x = pi^j * w with w a unit and return w (j = e*valuation)."""
        if val_num is None:
            v = self.valuation()
            if v is ABOVE_PRECISION:
                raise PrecisionExhausted("no unit part at this precision")
            val_num = int(v * self.ring.e)
        return self.div_pi(val_num)

    def coords_int(self):
        """Canonical e x n integer coordinate matrix."""
        return tuple(c.coords_int() for c in self.coeffs)

    def at_prec(self, prec):
        return RamElem(self.ring, self.tau, tuple(c.at_prec(prec) for c in self.coeffs))

    def __eq__(self, other):
        if isinstance(other, (int, WittElem)):
            other = self._sync(other)
        if not isinstance(other, RamElem) or other.ring is not self.ring:
            return NotImplemented
        if other.tau != self.tau:
            return False
        return all(a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self):
        return f"Ram(tau={self.tau}, {[list(c.coeffs) for c in self.coeffs]} mod p^{self.prec})"
