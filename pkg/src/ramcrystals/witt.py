"""Truncated Witt vectors of finite fields with an exact Frobenius lift.

W(F_{p^n}) truncated at precision N is modeled as (Z/p^N)[x]/(T) where T is
the *Teichmuller modulus*: the unique monic lift of a chosen irreducible
degree-n polynomial over F_p that divides x^{p^n} - x modulo p^N.  Because
the class omega of x then satisfies omega^{p^n} = omega exactly, the map
omega -> omega^p is a ring endomorphism lifting the p-power Frobenius of the
residue field, and it acts *exactly* -- applying sigma never loses precision.

Elements carry their own absolute precision (an exponent of p); binary
operations meet at the minimum of the two precisions.  All arithmetic is
exact modular arithmetic: a quantity that is zero in W(k) computes to the
zero residue at whatever precision survives.
"""

from __future__ import annotations

from .errors import InvalidDatum, NotDivisible, PrecisionExhausted


class AbovePrecision:
    """Valuation verdict for an element indistinguishable from zero.

    Returned (never raised) by valuation routines when every digit of the
    element vanishes at its working precision, so the true valuation is only
    known to be >= the precision cap.  A singleton; test with ``is``.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "AbovePrecision"


ABOVE_PRECISION = AbovePrecision()


# ---------------------------------------------------------------------------
# polynomial helpers over Z/M, coefficient lists low -> high
# ---------------------------------------------------------------------------

def _ptrim(c):
    while c and c[-1] == 0:
        c.pop()
    return c


def _padd(a, b, M):
    n = max(len(a), len(b))
    out = [0] * n
    for i, x in enumerate(a):
        out[i] = x
    for i, x in enumerate(b):
        out[i] = (out[i] + x) % M
    return _ptrim(out)


def _psub(a, b, M):
    n = max(len(a), len(b))
    out = [0] * n
    for i, x in enumerate(a):
        out[i] = x % M
    for i, x in enumerate(b):
        out[i] = (out[i] - x) % M
    return _ptrim(out)


def _pmul(a, b, M):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % M
    return _ptrim(out)


def _pdivmod(a, b, M):
    """Euclidean division by a *monic* b over Z/M."""
    assert b and b[-1] == 1, "divisor must be monic"
    a = [x % M for x in a]
    _ptrim(a)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        shift = len(a) - len(b)
        c = a[-1]
        q[shift] = c
        for i, y in enumerate(b):
            a[shift + i] = (a[shift + i] - c * y) % M
        _ptrim(a)
    return _ptrim(q), a


def _ppowmod(base, exp, mod, M):
    result = [1]
    base = _pdivmod(base, mod, M)[1]
    while exp:
        if exp & 1:
            result = _pdivmod(_pmul(result, base, M), mod, M)[1]
        base = _pdivmod(_pmul(base, base, M), mod, M)[1]
        exp >>= 1
    return result


def _pgcd_fp(a, b, p):
    a = [x % p for x in a]
    b = [x % p for x in b]
    _ptrim(a), _ptrim(b)
    while b:
        inv = pow(b[-1], p - 2, p)
        bm = [(x * inv) % p for x in b]
        _, r = _pdivmod(a, bm, p)
        a, b = b, r
    return a


def _pxgcd_fp(a, b, p):
    """Extended gcd over F_p[x]: returns (g, s, t) with s*a + t*b = g."""
    r0, r1 = [x % p for x in a], [x % p for x in b]
    _ptrim(r0), _ptrim(r1)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        inv = pow(r1[-1], p - 2, p)
        r1m = [(x * inv) % p for x in r1]
        q, r = _pdivmod(r0, r1m, p)
        q = [(x * inv) % p for x in q]
        r0, r1 = r1, r
        s0, s1 = s1, _psub(s0, _pmul(q, s1, p), p)
        t0, t1 = t1, _psub(t0, _pmul(q, t1, p), p)
    return r0, s0, t0


def _is_prime(m):
    if m < 2:
        return False
    d = 2
    while d * d <= m:
        if m % d == 0:
            return False
        d += 1
    return True


def _prime_factors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _is_irreducible(m, p):
    """Irreducibility of a monic m over F_p (Rabin's test)."""
    n = len(m) - 1
    if n < 1:
        return False
    x = [0, 1]
    if _ppowmod(x, p ** n, m, p) != _pdivmod(x, m, p)[1]:
        return False
    for q in _prime_factors(n):
        h = _psub(_ppowmod(x, p ** (n // q), m, p), x, p)
        g = _pgcd_fp(h, m, p)
        if len(g) != 1:
            return False
    return True


def _default_field_modulus(p, n):
    """First monic irreducible of degree n over F_p in lex coefficient order.

    Degree 1 always yields plain x, so W(F_p) has coordinates in Z/p^N with
    the identity Frobenius.
    """
    if n == 1:
        return (0, 1)
    from itertools import product

    for tail in product(range(p), repeat=n):
        cand = list(tail) + [1]
        if _is_irreducible(cand, p):
            return tuple(cand)
    raise InvalidDatum(f"no irreducible polynomial of degree {n} over F_{p}")


def _teichmuller_modulus(field_modulus, p, n, N):
    """Hensel-lift field_modulus to the monic factor T of x^{p^n}-x mod p^N.

    Quadratic lifting of the coprime factorization x^{p^n} - x = T*G together
    with its Bezout certificate A*T + B*G = 1.
    """
    f = [0] * (p ** n + 1)
    f[1] = -1
    f[-1] = 1
    t = [x % p for x in field_modulus]
    g, _ = _pdivmod(f, t, p)
    gd, a, b = _pxgcd_fp(t, g, p)
    assert len(gd) == 1, "field modulus does not split off x^{p^n} - x"
    inv = pow(gd[0], p - 2, p)
    a = [(x * inv) % p for x in a]
    b = [(x * inv) % p for x in b]
    m = 1
    while m < N:
        m = min(2 * m, N)
        M = p ** m
        err = _psub(f, _pmul(t, g, M), M)
        q, r = _pdivmod(_pmul(b, err, M), t, M)
        t = _padd(t, r, M)
        g = _padd(g, _padd(_pmul(a, err, M), _pmul(q, g, M), M), M)
        bez = _psub(_padd(_pmul(a, t, M), _pmul(b, g, M), M), [1], M)
        c, d = _pdivmod(_pmul(a, bez, M), g, M)
        a = _psub(a, d, M)
        b = _psub(_psub(b, _pmul(b, bez, M), M), _pmul(c, t, M), M)
        # keep the certificate reduced so operand degrees stay bounded:
        # replacing b by b mod t leaves 1 - b*g divisible by the monic t,
        # and the exact quotient is the matching a
        b = _pdivmod(b, t, M)[1]
        a, rem = _pdivmod(_psub([1], _pmul(b, g, M), M), t, M)
        assert not rem, "Bezout renormalization failed"
    T = t + [0] * (n + 1 - len(t))
    T[n] = 1  # monic by construction; pad in case of trimmed zeros
    return tuple(x % (p ** N) for x in T[: n + 1])


_FIELD_ARTIFACTS = {}


def _field_artifacts(field_modulus, p, n, N):
    """The lifted modulus and Frobenius matrices, cached per field.

    The Hensel lift is unique, so the result at precision N reduces mod p^N'
    to the result at any smaller precision N'; the cache keeps the largest
    precision computed so far and serves smaller requests by reduction.
    """
    key = (p, n, field_modulus)
    hit = _FIELD_ARTIFACTS.get(key)
    if hit is None or hit[0] < N:
        teich = _teichmuller_modulus(field_modulus, p, n, N)
        M = p ** N
        tm = list(teich)
        frob_mats = []
        for m in range(n):
            pm = _ppowmod([0, 1], p ** m, tm, M)
            col = [1]
            mat = [[0] * n for _ in range(n)]
            for j in range(n):
                for i, c in enumerate(col):
                    mat[i][j] = c
                if j < n - 1:
                    col = _pdivmod(_pmul(col, pm, M), tm, M)[1]
            frob_mats.append(mat)
        hit = (N, teich, frob_mats)
        _FIELD_ARTIFACTS[key] = hit
    cached_n, teich, frob_mats = hit
    if cached_n != N:
        M = p ** N
        teich = tuple(x % M for x in teich)
        frob_mats = [[[x % M for x in row] for row in mat] for mat in frob_mats]
    return teich, frob_mats


class BaseField:
    """The base datum: k = F_{p^n} together with W(k) truncated at p^N.

    Frobenius powers sigma^m are stored as n x n integer matrices acting on
    coordinate vectors in the omega-power basis, valid at every precision
    <= N simultaneously.
    """

    def __init__(self, p, n, precision, field_modulus=None):
        if not _is_prime(p):
            raise InvalidDatum(f"p = {p} is not prime")
        if n < 1 or precision < 1:
            raise InvalidDatum("need n >= 1 and precision >= 1")
        self.p = p
        self.n = n
        self.N = precision
        if field_modulus is None:
            field_modulus = _default_field_modulus(p, n)
        field_modulus = tuple(x % p for x in field_modulus)
        if len(field_modulus) != n + 1 or field_modulus[-1] != 1:
            raise InvalidDatum("field modulus must be monic of degree n")
        if not _is_irreducible(list(field_modulus), p):
            raise InvalidDatum("field modulus is not irreducible over F_p")
        self.field_modulus = field_modulus
        # sigma^m sends sum a_j omega^j to sum a_j (omega^{p^m})^j
        self.teich_modulus, self._frob_mats = _field_artifacts(
            field_modulus, p, n, precision
        )

    # -- constructors -----------------------------------------------------

    def witt(self, coeffs, prec=None):
        if isinstance(coeffs, int):
            coeffs = (coeffs,) + (0,) * (self.n - 1)
        return WittElem(self, tuple(coeffs), self.N if prec is None else prec)

    def zero(self, prec=None):
        return self.witt(0, prec)

    def one(self, prec=None):
        return self.witt(1, prec)

    def ff(self, coeffs):
        if isinstance(coeffs, int):
            coeffs = (coeffs,) + (0,) * (self.n - 1)
        return FFElem(self, tuple(coeffs))

    def ff_zero(self):
        return self.ff(0)

    def ff_one(self):
        return self.ff(1)

    def random_witt(self, rng, prec=None):
        prec = self.N if prec is None else prec
        M = self.p ** prec
        return self.witt(tuple(rng.randrange(M) for _ in range(self.n)), prec)

    def random_ff(self, rng):
        return self.ff(tuple(rng.randrange(self.p) for _ in range(self.n)))

    def with_precision(self, precision):
        if precision == self.N:
            return self
        return BaseField(self.p, self.n, precision, self.field_modulus)

    def same_field(self, other):
        return (self.p, self.n, self.field_modulus) == (
            other.p,
            other.n,
            other.field_modulus,
        )

    def __repr__(self):
        return f"BaseField(p={self.p}, n={self.n}, N={self.N})"

    # -- internal ---------------------------------------------------------

    def _apply_frob(self, coeffs, m, M):
        mat = self._frob_mats[m % self.n]
        return tuple(
            sum(mat[i][j] * coeffs[j] for j in range(self.n)) % M
            for i in range(self.n)
        )


class WittElem:
    """An element of W(k) known modulo p^prec, in the omega-power basis."""

    __slots__ = ("ctx", "coeffs", "prec")

    def __init__(self, ctx, coeffs, prec):
        if prec < 1:
            raise PrecisionExhausted("no p-adic digits left")
        if len(coeffs) != ctx.n:
            raise InvalidDatum(f"expected {ctx.n} coordinates, got {len(coeffs)}")
        M = ctx.p ** prec
        self.ctx = ctx
        self.coeffs = tuple(c % M for c in coeffs)
        self.prec = prec

    def _sync(self, other):
        if isinstance(other, int):
            other = self.ctx.witt(other, self.prec)
        assert other.ctx is self.ctx, "mixed Witt contexts"
        prec = min(self.prec, other.prec)
        return other, prec

    @staticmethod
    def _operand_ok(other):
        return isinstance(other, (int, WittElem))

    def at_prec(self, prec):
        if prec > self.prec:
            raise PrecisionExhausted(
                f"cannot raise precision of a Witt element ({self.prec} -> {prec})"
            )
        return WittElem(self.ctx, self.coeffs, prec)

    def __add__(self, other):
        if not self._operand_ok(other):
            return NotImplemented
        other, prec = self._sync(other)
        return WittElem(
            self.ctx,
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
            prec,
        )

    __radd__ = __add__

    def __sub__(self, other):
        if not self._operand_ok(other):
            return NotImplemented
        other, prec = self._sync(other)
        return WittElem(
            self.ctx,
            tuple(a - b for a, b in zip(self.coeffs, other.coeffs)),
            prec,
        )

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return WittElem(self.ctx, tuple(-a for a in self.coeffs), self.prec)

    def __mul__(self, other):
        if not self._operand_ok(other):
            return NotImplemented
        other, prec = self._sync(other)
        ctx = self.ctx
        M = ctx.p ** prec
        prod = _pmul(list(self.coeffs), list(other.coeffs), M)
        tm = [c % M for c in ctx.teich_modulus]
        _, r = _pdivmod(prod, tm, M)
        r = tuple(r) + (0,) * (ctx.n - len(r))
        return WittElem(ctx, r, prec)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.ctx.one(self.prec)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sigma(self, m=1):
        """Apply the Frobenius lift sigma^m; exact, no precision loss."""
        m %= self.ctx.n
        if m == 0:
            return self
        M = self.ctx.p ** self.prec
        return WittElem(self.ctx, self.ctx._apply_frob(self.coeffs, m, M), self.prec)

    def val_p(self):
        """p-adic valuation, or ABOVE_PRECISION if zero at this precision."""
        p = self.ctx.p
        best = None
        for c in self.coeffs:
            if c == 0:
                continue
            v = 0
            while c % p == 0:
                c //= p
                v += 1
            best = v if best is None else min(best, v)
            if best == 0:
                return 0
        return ABOVE_PRECISION if best is None else best

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def is_unit(self):
        return any(c % self.ctx.p for c in self.coeffs)

    def divide_p(self, m):
        """Exact division by p^m; costs m digits of precision."""
        if m == 0:
            return self
        pm = self.ctx.p ** m
        if any(c % pm for c in self.coeffs):
            raise NotDivisible(f"element not divisible by p^{m}")
        if self.prec - m < 1:
            raise PrecisionExhausted(f"division by p^{m} leaves no digits")
        return WittElem(self.ctx, tuple(c // pm for c in self.coeffs), self.prec - m)

    def inverse(self):
        """Inverse of a unit by Newton iteration from the residue inverse."""
        if not self.is_unit():
            raise NotDivisible("inverting a non-unit Witt element")
        ctx = self.ctx
        y = self.residue().inverse().lift(self.prec)
        one = ctx.one(self.prec)
        steps = max(1, (self.prec - 1).bit_length() + 1)
        for _ in range(steps):
            y = y * (2 * one - self * y)
        assert (self * y - one).is_zero()
        return y

    def residue(self):
        return FFElem(self.ctx, self.coeffs)

    def coords_int(self):
        return self.coeffs

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ctx.witt(other, self.prec)
        if not isinstance(other, WittElem) or other.ctx is not self.ctx:
            return NotImplemented
        prec = min(self.prec, other.prec)
        M = self.ctx.p ** prec
        return all((a - b) % M == 0 for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self):
        return f"W({list(self.coeffs)} mod p^{self.prec})"


class FFElem:
    """An element of the residue field k = F_{p^n}."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx, coeffs):
        if len(coeffs) != ctx.n:
            raise InvalidDatum(f"expected {ctx.n} coordinates, got {len(coeffs)}")
        self.ctx = ctx
        self.coeffs = tuple(c % ctx.p for c in coeffs)

    def _coerce(self, other):
        if isinstance(other, int):
            return self.ctx.ff(other)
        assert other.ctx is self.ctx, "mixed residue fields"
        return other

    def __add__(self, other):
        other = self._coerce(other)
        return FFElem(self.ctx, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return FFElem(self.ctx, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return FFElem(self.ctx, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        other = self._coerce(other)
        p = self.ctx.p
        prod = _pmul(list(self.coeffs), list(other.coeffs), p)
        fm = list(self.ctx.field_modulus)
        _, r = _pdivmod(prod, fm, p)
        r = tuple(r) + (0,) * (self.ctx.n - len(r))
        return FFElem(self.ctx, r)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.ctx.ff_one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverting 0 in the residue field")
        p = self.ctx.p
        g, s, _ = _pxgcd_fp(list(self.coeffs), list(self.ctx.field_modulus), p)
        assert len(g) == 1
        inv = pow(g[0], p - 2, p)
        _, r = _pdivmod([(x * inv) % p for x in s], list(self.ctx.field_modulus), p)
        r = tuple(r) + (0,) * (self.ctx.n - len(r))
        return FFElem(self.ctx, r)

    def frobenius(self, m=1):
        """x -> x^{p^m}."""
        m %= self.ctx.n
        if m == 0:
            return self
        return FFElem(self.ctx, self.ctx._apply_frob(self.coeffs, m, self.ctx.p))

    def lift(self, prec=None):
        """The obvious coordinate lift to W(k) (not the Teichmuller lift)."""
        return self.ctx.witt(self.coeffs, prec)

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ctx.ff(other)
        if not isinstance(other, FFElem) or other.ctx is not self.ctx:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("FFElem", self.ctx.p, self.ctx.n, self.coeffs))

    def __repr__(self):
        return f"FF({list(self.coeffs)})"
