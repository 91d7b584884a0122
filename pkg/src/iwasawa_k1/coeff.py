"""Truncated arithmetic in the ring of integers of an unramified extension of Q_p.

Elements are stored in the polynomial basis 1, x, ..., x^(f-1) where x is a
root of a fixed monic lift of an irreducible polynomial over F_p.  Every
element carries the exponent c of its certified precision: the stored
coordinates are trusted modulo p^c.
"""

from __future__ import annotations

from functools import cached_property

from .errors import InvalidInput, NotDivisible, PrecisionExhausted


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def vp(x: int, p: int, cap: int = 10**9) -> int:
    """p-adic valuation of an integer; ``cap`` is returned for zero."""
    if x == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


# polynomial helpers over Z/m, coefficient lists low -> high

def _trim(a):
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def _polymulmod(a, b, poly, m):
    """Product of a and b reduced modulo the monic ``poly`` and modulo m."""
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    f = len(poly) - 1
    for d in range(len(out) - 1, f - 1, -1):
        c = out[d] % m
        if c:
            for i in range(f + 1):
                out[d - f + i] -= c * poly[i]
    out = [c % m for c in out[:f]] + [0] * max(0, f - len(out))
    return out


def _polymod_p(a, b, p):
    """Remainder of a by b over F_p (b nonzero)."""
    a = [c % p for c in a]
    b = _trim([c % p for c in b])
    inv = pow(b[-1], -1, p)
    a = _trim(a)
    while len(a) >= len(b) and any(a):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        _trim(a)
        if len(a) == 1:
            break
    return a


def _gcd_is_one(a, b, p) -> bool:
    a, b = _trim([c % p for c in a]), _trim([c % p for c in b])
    while any(b):
        a, b = b, _polymod_p(a, b, p)
    return len(a) == 1 and a[0] != 0


def _xpow_mod(e, poly, p):
    """x^e modulo (poly, p) as a coefficient list of length deg(poly)."""
    f = len(poly) - 1
    result = [1] + [0] * (f - 1)
    base = [0, 1] + [0] * (f - 2) if f >= 2 else _polymulmod([0, 1], [1], poly, p)
    while e:
        if e & 1:
            result = _polymulmod(result, base, poly, p)
        base = _polymulmod(base, base, poly, p)
        e >>= 1
    return result


def is_irreducible_mod_p(poly, p) -> bool:
    """Rabin's test for a monic polynomial over F_p."""
    f = len(poly) - 1
    if f == 1:
        return True
    x = [0, 1] + [0] * (f - 2)
    if _xpow_mod(p**f, poly, p) != x:
        return False
    for r in range(2, f + 1):
        if f % r == 0 and is_prime(r):
            h = _xpow_mod(p ** (f // r), poly, p)
            h = [(h[i] - x[i]) % p for i in range(f)]
            if not _gcd_is_one(poly, h, p):
                return False
    return True


def default_modulus(p: int, f: int):
    """Lexicographically first monic irreducible polynomial of degree f over F_p."""
    if f == 1:
        return [0, 1]
    for code in range(p**f):
        low = [(code // p**i) % p for i in range(f)]
        if low[0] == 0:
            continue
        poly = low + [1]
        if is_irreducible_mod_p(poly, p):
            return poly
    raise InvalidInput(f"no irreducible polynomial of degree {f} mod {p}")


class CoefficientRing:
    """O/p^k for O unramified of residue degree f over Z_p."""

    def __init__(self, p: int, k: int, f: int = 1, modulus=None):
        if not is_prime(p) or p == 2:
            raise InvalidInput(f"p must be an odd prime (H4), got {p}")
        if k < 1 or f < 1:
            raise InvalidInput("need k >= 1 and f >= 1")
        self.p, self.k, self.f = p, k, f
        self.q = p**f
        self.mod = p**k
        poly = list(modulus) if modulus is not None else default_modulus(p, f)
        if len(poly) != f + 1 or poly[-1] != 1:
            raise InvalidInput("modulus must be monic of degree f")
        if not is_irreducible_mod_p(poly, p):
            raise InvalidInput("modulus is not irreducible mod p")
        self.modulus = poly

    def __repr__(self):
        return f"CoefficientRing(p={self.p}, k={self.k}, f={self.f})"

    def __eq__(self, other):
        return (isinstance(other, CoefficientRing) and self.p == other.p
                and self.k == other.k and self.modulus == other.modulus)

    def __hash__(self):
        return hash((self.p, self.k, tuple(self.modulus)))

    def element(self, coords, prec=None) -> CoefficientElement:
        if isinstance(coords, int):
            coords = [coords] + [0] * (self.f - 1)
        coords = tuple(int(c) % self.mod for c in coords)
        if len(coords) != self.f:
            raise InvalidInput("wrong number of coordinates")
        return CoefficientElement(self, coords, self.k if prec is None else prec)

    def zero(self):
        return self.element(0)

    def one(self):
        return self.element(1)

    def generator(self):
        """The root x of the defining polynomial (equals 0 when f = 1)."""
        if self.f == 1:
            return self.element(-self.modulus[0])
        return self.element([0, 1] + [0] * (self.f - 2))

    def _mul(self, a, b):
        if self.f == 1:
            return ((a[0] * b[0]) % self.mod,)
        return tuple(_polymulmod(list(a), list(b), self.modulus, self.mod))

    def _eval_poly(self, coeffs, y):
        acc = (0,) * self.f
        for c in reversed(coeffs):
            acc = self._mul(acc, y.coords)
            acc = ((acc[0] + c) % self.mod,) + acc[1:]
        return self.element(acc)

    @cached_property
    def frobenius_image(self) -> CoefficientElement:
        """phi(x), the Hensel lift of x^p that is again a root of the modulus."""
        x = self.generator()
        if self.f == 1:
            return x
        y = x ** self.p
        dpoly = [i * c for i, c in enumerate(self.modulus)][1:]
        for _ in range(self.k.bit_length() + 2):
            val = self._eval_poly(self.modulus, y)
            der = self._eval_poly(dpoly, y)
            y = y - val * der.inverse()
        if any(self._eval_poly(self.modulus, y).coords):
            raise PrecisionExhausted("Hensel lifting of Frobenius did not converge")
        return y

    @cached_property
    def _frobenius_powers(self):
        img = self.frobenius_image
        pw = [self.one()]
        for _ in range(1, self.f):
            pw.append(pw[-1] * img)
        return pw


class CoefficientElement:
    __slots__ = ("ring", "coords", "prec")

    def __init__(self, ring: CoefficientRing, coords, prec: int):
        self.ring = ring
        self.coords = tuple(coords)
        self.prec = min(prec, ring.k)

    @property
    def certified_precision(self) -> int:
        return self.prec

    def __repr__(self):
        c = self.coords[0] if self.ring.f == 1 else list(self.coords)
        return f"CoefficientElement({c}, prec={self.prec})"

    def _new(self, coords, prec):
        return CoefficientElement(self.ring, tuple(c % self.ring.mod for c in coords), prec)

    def _coerce(self, other):
        if isinstance(other, int):
            return self.ring.element(other)
        if other.ring != self.ring:
            raise InvalidInput("coefficient rings differ")
        return other

    def __add__(self, other):
        other = self._coerce(other)
        return self._new([a + b for a, b in zip(self.coords, other.coords)],
                         min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return self._new([-a for a in self.coords], self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return CoefficientElement(self.ring, self.ring._mul(self.coords, other.coords),
                                  min(self.prec, other.prec))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result, base = self.ring.one(), self
        result = CoefficientElement(self.ring, result.coords, self.prec)
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.element(other)
        if not isinstance(other, CoefficientElement):
            return NotImplemented
        m = self.ring.p ** min(self.prec, other.prec)
        return all((a - b) % m == 0 for a, b in zip(self.coords, other.coords))

    def __hash__(self):
        return hash(self.coords)

    def valuation(self) -> int:
        """min v_p of the coordinates, capped at the certified precision."""
        return min(min(vp(c, self.ring.p, self.prec) for c in self.coords), self.prec)

    def is_unit(self) -> bool:
        return self.valuation() == 0

    def residue(self):
        p = self.ring.p
        return tuple(c % p for c in self.coords)

    def inverse(self) -> CoefficientElement:
        from .errors import NotAUnit
        if not self.is_unit():
            raise NotAUnit(f"{self!r} is not a unit")
        ring = self.ring
        if ring.f == 1:
            return CoefficientElement(ring, (pow(self.coords[0], -1, ring.mod),), self.prec)
        # inverse mod p through a^(q-2), then Newton y <- y(2 - a y)
        y = CoefficientElement(ring, self.coords, self.prec)
        r = self.residue()
        base = ring.element(r)
        y = base ** (ring.q - 2)
        y = ring.element([c % ring.p for c in y.coords])
        for _ in range(ring.k.bit_length() + 1):
            y = y * (2 - self * y)
        return CoefficientElement(ring, y.coords, self.prec)


def frobenius(a: CoefficientElement) -> CoefficientElement:
    """Ring automorphism of O lifting x -> x^p on the residue field."""
    ring = a.ring
    if ring.f == 1:
        return a
    acc = ring.zero()
    for c, pw in zip(a.coords, ring._frobenius_powers):
        acc = acc + pw * c
    return CoefficientElement(ring, acc.coords, a.prec)


def teichmuller(ring: CoefficientRing, r) -> CoefficientElement:
    """Unique lift with zeta^q = zeta of the residue class r."""
    if isinstance(r, int):
        r = [r] + [0] * (ring.f - 1)
    x = ring.element([c % ring.p for c in r])
    for _ in range(ring.k + 1):
        x = x ** ring.q
    return x


def divide_by_p_power(a: CoefficientElement, m: int) -> CoefficientElement:
    """Exact quotient a / p^m; the certified precision drops by m."""
    if m < 0:
        raise InvalidInput("m must be nonnegative")
    if m == 0:
        return a
    if a.prec < m:
        raise PrecisionExhausted(f"cannot certify divisibility by p^{m} at precision {a.prec}")
    pm = a.ring.p**m
    if any(c % pm for c in a.coords):
        raise NotDivisible(f"{a!r} is not divisible by p^{m}")
    return CoefficientElement(a.ring, tuple(c // pm for c in a.coords), a.prec - m)
