"""Arrays of elements of Lambda(Z) truncations and of B(Z) truncations.

Every group ring in this package is a free module over a "Z-ring": either
Lambda(Z)_n = (Z/p^K)[z]/(z^(p^n) - 1) (class ``FiniteZ``) or a truncation of
B(Z), the ring of Laurent series in t = z - 1 with coefficients tending to 0
as the degree tends to -infinity (class ``LaurentZ``).

A ``ZArr`` is a numpy-style array whose entries are elements of such a ring.
The last axis of ``data`` holds the coefficients of one ring element.  Values
are ``data / p^scale``; ``prec`` is the number of p-adic digits of ``data``
that are trusted.  Laurent arrays additionally carry ``lo`` (degree of the
first stored coefficient) and ``M``: the data is only known modulo the set of
series whose weighted valuation W(sum c_i t^i) = min(D v_p(c_i) + i) is >= M.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.fft import irfft, next_fast_len, rfft

from .errors import IntegralityViolation, InvalidInput, NotAUnit, PrecisionExhausted

INF = math.inf
_LIMB_LIMIT = 2**62


def _letters(spec):
    ins, out = spec.split("->")
    return ins.split(","), out


def _contraction_size(spec, sa, sb):
    """Number of terms summed per output entry (ellipsis dims are never summed)."""
    (la, lb), lo = _letters(spec)
    sizes = {}
    for letters, shape in ((la, sa), (lb, sb)):
        letters = letters.replace("...", "")
        for c, s in zip(letters, shape[len(shape) - len(letters):]):
            sizes[c] = max(sizes.get(c, 1), s)
    summed = (set(la) | set(lb)) - set(lo) - {"."}
    return int(np.prod([sizes[c] for c in summed])) if summed else 1


def _split_limbs(x, bits, mod):
    n = max(1, math.ceil(math.log2(mod) / bits))
    base = 1 << bits
    out = []
    for _ in range(n):
        out.append(x % base)
        x = x // base
    return out


def _mulmod(x, c, mod):
    """x * c mod mod for int64 arrays x in [0, mod) and an integer c, mod < 2^31."""
    return (x * (c % mod)) % mod


class ZRing:
    p: int
    K: int
    mod: int

    def _check_mod(self):
        if self.mod >= 2**31:
            raise PrecisionExhausted(f"p^{self.K} exceeds the supported modulus range")


class FiniteZ(ZRing):
    """Lambda(Z) at level n with coefficients mod p^K."""

    kind = "finite"

    def __init__(self, p: int, n: int, K: int):
        self.p, self.n, self.K = p, n, K
        self.pn = p**n
        self.zdim = self.pn
        self.mod = p**K
        self._check_mod()
        u = np.arange(self.pn)
        self._circ = (u[None, :] - u[:, None]) % self.pn

    def __repr__(self):
        return f"FiniteZ(p={self.p}, n={self.n}, K={self.K})"

    def __eq__(self, other):
        return isinstance(other, FiniteZ) and (self.p, self.n, self.K) == (other.p, other.n, other.K)

    def __hash__(self):
        return hash(("F", self.p, self.n, self.K))

    def with_precision(self, K):
        return FiniteZ(self.p, self.n, K)

    def wrap(self, data, scale=0, prec=None):
        return ZArr(self, np.asarray(data, dtype=np.int64) % self.mod, scale,
                    self.K if prec is None else prec)

    def zeros(self, shape=()):
        return self.wrap(np.zeros(tuple(shape) + (self.pn,), dtype=np.int64))

    def const(self, values):
        values = np.asarray(values, dtype=np.int64)
        data = np.zeros(values.shape + (self.pn,), dtype=np.int64)
        data[..., 0] = values
        return self.wrap(data)

    def ones(self, shape=()):
        return self.const(np.ones(shape, dtype=np.int64))

    def zpow(self, m):
        m = np.asarray(m, dtype=np.int64)
        data = np.zeros(m.shape + (self.pn,), dtype=np.int64)
        np.put_along_axis(data, (m % self.pn)[..., None], 1, axis=-1)
        return self.wrap(data)

    def einsum(self, spec, a: ZArr, b: ZArr) -> ZArr:
        ins, out = _letters(spec)
        bc = b.data[..., self._circ]  # bc[..., u, w] = b[..., w - u]
        full = f"{ins[0]}U,{ins[1]}UW->{out}W"
        count = _contraction_size(spec, a.data.shape[:-1], b.data.shape[:-1]) * self.pn
        mod = self.mod
        if count * mod * mod < _LIMB_LIMIT:
            data = np.einsum(full, a.data, bc) % mod
        else:
            bits = max(1, int(math.log2(_LIMB_LIMIT / (count * mod))))
            data = None
            for i, limb in enumerate(_split_limbs(a.data, bits, mod)):
                part = _mulmod(np.einsum(full, limb, bc) % mod, 1 << (bits * i), mod)
                data = part if data is None else (data + part) % mod
        return ZArr(self, data, a.scale + b.scale, min(a.prec, b.prec))

    def mul(self, a, b):
        return self.einsum(_broadcast_spec(a.shape, b.shape), a, b)

    def zshift(self, a: ZArr, m) -> ZArr:
        m = np.broadcast_to(np.asarray(m, dtype=np.int64), a.shape)
        idx = (np.arange(self.pn) - m[..., None]) % self.pn
        return a._with(np.take_along_axis(a.data, idx, axis=-1))

    def frobenius_z(self, a: ZArr, d: int = None) -> ZArr:
        """The ring map z -> z^d (default d = p)."""
        d = self.p if d is None else d
        out = np.zeros_like(a.data)
        target = (d * np.arange(self.pn)) % self.pn
        for j in range(self.pn):
            out[..., target[j]] += a.data[..., j]
        return a._with(out % self.mod)

    def augmentation(self, a: ZArr):
        return a.data.sum(axis=-1) % self.mod

    def inverse(self, a: ZArr) -> ZArr:
        aug = self.augmentation(a)
        if np.any(aug % self.p == 0):
            raise NotAUnit("element of Lambda(Z) is not a unit")
        inv = np.vectorize(lambda v: pow(int(v), -1, self.mod))(aug) if aug.ndim else \
            np.array(pow(int(aug), -1, self.mod))
        y = self.const(inv)
        y.prec = a.prec
        one = self.ones(a.shape)
        for _ in range(64):
            r = one - self.mul(a, y)
            if r.is_zero():
                return ZArr(self, y.data, -a.scale, a.prec)
            y = y + self.mul(y, r)
        raise PrecisionExhausted("Newton inversion in Lambda(Z) did not converge")


class LaurentZ(ZRing):
    """Truncated B(Z): Laurent series in t = z - 1 over Z/p^K, weight D."""

    kind = "laurent"

    def __init__(self, p: int, K: int, M: int, D: int = None):
        self.p, self.K = p, K
        self.mod = p**K
        self._check_mod()
        self.D = p if D is None else D
        self.M = M  # default t-adic target for series expansions

    def __repr__(self):
        return f"LaurentZ(p={self.p}, K={self.K}, M={self.M}, D={self.D})"

    def __eq__(self, other):
        return isinstance(other, LaurentZ) and (self.p, self.K, self.D) == (other.p, other.K, other.D)

    def __hash__(self):
        return hash(("L", self.p, self.K, self.D))

    def with_precision(self, K, M=None):
        return LaurentZ(self.p, K, self.M if M is None else M, self.D)

    def wrap(self, data, lo=0, scale=0, prec=None, M=INF):
        data = np.asarray(data, dtype=np.int64) % self.mod
        return ZArr(self, data, scale, self.K if prec is None else prec, lo, M)

    def zeros(self, shape=()):
        return self.wrap(np.zeros(tuple(shape) + (1,), dtype=np.int64))

    def const(self, values):
        values = np.asarray(values, dtype=np.int64)
        return self.wrap(values[..., None])

    def ones(self, shape=()):
        return self.const(np.ones(shape, dtype=np.int64))

    def monomial(self, degree, coeff=1, shape=()):
        data = np.full(tuple(shape) + (1,), coeff, dtype=np.int64)
        return self.wrap(data, lo=degree)

    def binomial_series(self, m: int, M) -> np.ndarray:
        """Coefficients of (1+t)^m, truncated below degree M when m < 0."""
        if m >= 0:
            return np.array([math.comb(m, j) % self.mod for j in range(m + 1)], dtype=np.int64)
        top = int(max(M, 1))
        out = [1]
        c = 1
        for j in range(1, top):
            c = c * (m - j + 1) // j
            out.append(c % self.mod)
        return np.array(out, dtype=np.int64)

    def zpow(self, m, M=None):
        m = np.asarray(m, dtype=np.int64)
        M = self.M if M is None else M
        vals = np.unique(m)
        polys = {int(v): self.binomial_series(int(v), M) for v in vals.tolist()}
        L = max(len(s) for s in polys.values())
        data = np.zeros(m.shape + (L,), dtype=np.int64)
        for v, s in polys.items():
            data[m == v, : len(s)] = s
        Mout = INF if np.all(m >= 0) else M
        return self.wrap(data, lo=0, M=Mout)

    def einsum(self, spec, a: ZArr, b: ZArr) -> ZArr:
        ins, out = _letters(spec)
        La, Lb = a.data.shape[-1], b.data.shape[-1]
        Lout = La + Lb - 1
        count = _contraction_size(spec, a.data.shape[:-1], b.data.shape[:-1])
        mod = self.mod
        full = f"{ins[0]}F,{ins[1]}F->{out}F"
        if min(La, Lb) == 1:
            # one factor is a constant in t: plain integer contraction
            if Lb == 1:
                bb = b.data[..., 0]
                spec2 = f"{ins[0]}F,{ins[1]}->{out}F"
                data = _int_einsum(spec2, a.data, bb, count, mod, first_is_left=True)
            else:
                aa = a.data[..., 0]
                spec2 = f"{ins[0]},{ins[1]}F->{out}F"
                data = _int_einsum(spec2, aa, b.data, count, mod, first_is_left=False)
        else:
            F = next_fast_len(Lout, real=True)
            mag = count * min(La, Lb)
            bits = max(1, int((44 - math.log2(mag)) // 2))
            la = np.stack(_split_limbs(a.data, bits, mod)).astype(np.float64)
            lb = np.stack(_split_limbs(b.data, bits, mod)).astype(np.float64)
            fa = rfft(la, F, axis=-1)
            fb = rfft(lb, F, axis=-1)
            # all limb pairs at once: axes (i, j, ...)
            prod = np.einsum(f"X{ins[0]}F,Y{ins[1]}F->XY{out}F", fa, fb)
            c = irfft(prod, F, axis=-1)[..., :Lout]
            ci = np.rint(c)
            if ci.size and np.max(np.abs(c - ci)) > 0.2:
                raise PrecisionExhausted("floating point convolution lost exactness")
            ci = ci.astype(np.int64) % mod
            data = None
            for i in range(ci.shape[0]):
                for j in range(ci.shape[1]):
                    part = _mulmod(ci[i, j], 1 << (bits * (i + j)), mod)
                    data = part if data is None else (data + part) % mod
        Wa, Wb = a.W(), b.W()
        M = min(a.M + Wb, b.M + Wa)
        res = ZArr(self, data, a.scale + b.scale, min(a.prec, b.prec), a.lo + b.lo, M)
        return res.trim()

    def mul(self, a, b):
        return self.einsum(_broadcast_spec(a.shape, b.shape), a, b)

    def zshift(self, a: ZArr, m) -> ZArr:
        m = np.broadcast_to(np.asarray(m, dtype=np.int64), a.shape)
        if np.all(m == 0):
            return a
        if m.min() >= 0 and m.max() <= 16:
            # multiplication by the polynomial (1+t)^m, no truncation involved
            top = int(m.max())
            L = a.data.shape[-1]
            data = np.zeros(a.shape + (L + top,), dtype=np.int64)
            for j in range(top + 1):
                c = np.array([math.comb(int(v), j) for v in range(top + 1)], dtype=np.int64)[m]
                data[..., j: j + L] += (a.data * (c[..., None] % self.mod)) % self.mod
            return a._with(data % self.mod).trim()
        target = a.M if a.M < INF else self.M
        zp = self.zpow(m, M=target - a.W() if a.W() < INF else target)
        return self.einsum(_broadcast_spec(a.shape, a.shape), a, zp)

    def _phi_images(self, lo, hi, d, M):
        """Rows: coefficients of ((1+t)^d - 1)^i for lo <= i < hi, plus their offset.

        d must be a power of p when lo < 0.
        """
        mod = self.mod
        base = np.array([math.comb(d, j) % mod for j in range(d + 1)], dtype=np.int64)
        base[0] = 0  # (1+t)^d - 1
        rows = {}
        if hi > 0:
            cur = np.array([1], dtype=np.int64)
            for i in range(0, hi):
                if i >= lo:
                    rows[i] = (0, cur)
                cur = np.convolve(cur, base) % mod
        if lo < 0:
            # (1+t)^d - 1 = t^d (1 + e(s)) with s = 1/t and e(s) = sum_{0<k<d} C(d,k) s^k,
            # all coefficients divisible by p, so 1/(1 + e) is a polynomial mod p^K
            es = np.array([math.comb(d, k) % mod if 0 < k < d else 0 for k in range(d)],
                          dtype=np.int64)
            if np.any(es % self.p):
                raise PrecisionExhausted("negative powers need a p-power substitution")
            inv = np.array([1], dtype=np.int64)
            term = np.array([1], dtype=np.int64)
            for _ in range(self.K + 1):
                term = _trim_poly((-np.convolve(term, es)) % mod)
                if not np.any(term):
                    break
                inv = _padd(inv, term, mod)
            inv = _trim_poly(inv)
            cur = np.array([1], dtype=np.int64)
            for i in range(-1, lo - 1, -1):
                cur = _trim_poly(np.convolve(cur, inv) % mod)
                # t^(d i) * sum_k cur[k] t^(-k)
                if i < hi:
                    rows[i] = (d * i - (len(cur) - 1), cur[::-1].copy())
        return rows

    def lift_level(self, a: ZArr) -> ZArr:
        """Finite-level data (coefficients of z^m, m < p^n) as an exact polynomial in t = z - 1."""
        pn = a.data.shape[-1]
        Q = np.array([[math.comb(m, d) % self.mod for d in range(pn)] for m in range(pn)],
                     dtype=np.int64)
        return ZArr(self, _matmul_mod(a.data % self.mod, Q, self.mod), a.scale,
                    min(a.prec, self.K), 0, INF)

    def reduce_level(self, a: ZArr, ring) -> ZArr:
        """Power series in t -> Lambda(Z)_n via t -> z - 1 (raises on negative powers).

        (z - 1)^(p^n) lies in p*Lambda(Z)_n, so a dropped term c t^d with
        D v_p(c) + d >= M maps into p^(v + d // p^n); the output precision is
        the minimum of that bound.
        """
        a = a.trim()
        pn = ring.pn
        if a.data.shape[-1] and a.lo < 0 and np.any(a.data[..., : min(-a.lo, a.data.shape[-1])]):
            raise InvalidInput("element has negative powers of t")
        hi = a.lo + a.data.shape[-1]
        rows = np.zeros((max(hi, 1), pn), dtype=np.int64)
        cur = np.zeros(pn, dtype=np.int64)
        cur[0] = 1
        for d in range(max(hi, 1)):
            rows[d] = cur
            cur = (np.roll(cur, 1) - cur) % ring.mod
        data = np.zeros(a.shape + (pn,), dtype=np.int64)
        if a.data.shape[-1]:
            start = max(a.lo, 0)
            sub = a.data[..., start - a.lo:]
            data = _matmul_mod(sub, rows[start:hi], ring.mod)
        prec = min(a.prec, ring.K)
        if a.M < INF:
            bound = min(v + max(0, (a.M - self.D * v)) // pn
                        for v in range(0, max(0, a.M) // self.D + 2))
            prec = min(prec, bound)
        return ring.wrap(data, a.scale, prec)

    def substitute(self, a: ZArr, d: int) -> ZArr:
        """The ring map t -> (1+t)^d - 1 (z -> z^d) for d a power of p."""
        if a.data.shape[-1] == 0:
            return a
        lo, hi = a.lo, a.lo + a.data.shape[-1]
        rows = self._phi_images(lo, hi, d, a.M)
        new_lo = min(off for off, _ in rows.values())
        new_hi = max(off + len(r) for off, r in rows.values())
        mat = np.zeros((hi - lo, new_hi - new_lo), dtype=np.int64)
        for i, (off, r) in rows.items():
            mat[i - lo, off - new_lo: off - new_lo + len(r)] = r
        data = _matmul_mod(a.data, mat, self.mod)
        M = a.M
        if M < INF:
            lowest = M - self.D * max(a.prec - 1, 0)
            if lowest < 0:
                M = M + (d - 1) * lowest
        return ZArr(self, data, a.scale, a.prec, new_lo, M).trim()

    def frobenius_z(self, a: ZArr, d: int = None) -> ZArr:
        return self.substitute(a, self.p if d is None else d)

    def inverse(self, a: ZArr, M_target=None) -> ZArr:
        """Inverse of every entry (each entry must be a unit of B(Z)).

        Newton iteration from the inverse of the lowest term with a unit
        coefficient.  For an exactly known input the result is certified up
        to weighted valuation ``M_target`` (default: the ring's M).
        """
        if a.shape != ():
            flat = a.reshape(-1)
            parts = [self.inverse(flat[i], M_target) for i in range(flat.shape[0])]
            return stack(parts).reshape(*a.shape)
        a = a.trim()
        mod, p = self.mod, self.p
        data = a.data % (p**a.prec)
        units = np.nonzero(data % p)[0]
        if len(units) == 0:
            raise NotAUnit("Laurent series has no unit coefficient")
        i0 = int(units[0])
        deg0 = a.lo + i0
        if deg0 >= a.M:
            raise PrecisionExhausted("leading unit term is not certified")
        wy = -deg0
        if a.M < INF:
            goal = a.M + 2 * wy
            if M_target is not None:
                goal = min(goal, M_target)
        else:
            # exact input: relative precision M below the leading weight of the inverse
            goal = (self.M if M_target is None else M_target) + wy
        x = ZArr(self, data, 0, a.prec, a.lo, INF)
        y = ZArr(self, np.array([pow(int(data[i0]), -1, mod)], dtype=np.int64), 0, a.prec, -deg0, INF)
        one = self.ones()
        one.prec = a.prec
        for _ in range(80):
            r = (one - self.mul(x, y)).cut(goal - wy)
            if r.is_zero():
                out = ZArr(self, y.data, -a.scale, a.prec, y.lo, goal).trim()
                return out
            r = ZArr(self, r.data, 0, a.prec, r.lo, INF)
            y = (y + self.mul(y, r)).cut(goal)
            y = ZArr(self, y.data, 0, a.prec, y.lo, INF)
        raise PrecisionExhausted("Newton inversion in B(Z) did not converge")

    def stack(self, parts, axis=0):
        return stack(parts, axis)


def _padd(a, b, mod):
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=np.int64)
    out[: len(a)] += a
    out[: len(b)] += b
    return out % mod


def _trim_poly(a):
    nz = np.nonzero(a)[0]
    if len(nz) == 0:
        return a[:1]
    return a[: nz[-1] + 1]


def _matmul_mod(x, mat, mod):
    inner = mat.shape[0]
    if inner * mod * mod < _LIMB_LIMIT:
        return (x @ mat) % mod
    bits = max(1, int(math.log2(_LIMB_LIMIT / (inner * mod))))
    out = None
    for i, limb in enumerate(_split_limbs(x, bits, mod)):
        part = _mulmod((limb @ mat) % mod, 1 << (bits * i), mod)
        out = part if out is None else (out + part) % mod
    return out


def _int_einsum(spec, a, b, count, mod, first_is_left):
    if count * mod * mod < _LIMB_LIMIT:
        return np.einsum(spec, a, b) % mod
    bits = max(1, int(math.log2(_LIMB_LIMIT / (count * mod))))
    out = None
    for i, limb in enumerate(_split_limbs(a, bits, mod)):
        part = _mulmod(np.einsum(spec, limb, b) % mod, 1 << (bits * i), mod)
        out = part if out is None else (out + part) % mod
    return out


_AX = "abcdefghijklmnopqrstuvwxy"


def _broadcast_spec(sa, sb):
    """Elementwise product spec for two batch shapes (numpy broadcasting)."""
    n = max(len(sa), len(sb))
    letters = _AX[:n]
    la = "".join(letters[n - len(sa):])
    lb = "".join(letters[n - len(sb):])
    return f"{la},{lb}->{letters}"


class ZArr:
    """Array of Z-ring elements; see the module docstring."""

    __slots__ = ("ring", "data", "scale", "prec", "lo", "M", "_w")

    def __init__(self, ring, data, scale=0, prec=None, lo=0, M=INF):
        self._w = None
        self.ring = ring
        self.data = data
        self.scale = int(scale)
        self.prec = ring.K if prec is None else int(prec)
        self.lo = int(lo)
        self.M = M

    @property
    def laurent(self):
        return self.ring.kind == "laurent"

    @property
    def shape(self):
        return self.data.shape[:-1]

    @property
    def ndim(self):
        return self.data.ndim - 1

    def _with(self, data, **kw):
        args = dict(scale=self.scale, prec=self.prec, lo=self.lo, M=self.M)
        args.update(kw)
        return ZArr(self.ring, data, **args)

    def copy(self):
        return self._with(self.data.copy())

    def __repr__(self):
        extra = f", lo={self.lo}, M={self.M}" if self.laurent else ""
        return f"ZArr(shape={self.shape}, scale={self.scale}, prec={self.prec}{extra})"

    # -- indexing -------------------------------------------------------
    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return self._with(self.data[key + (slice(None),)] if Ellipsis not in key
                          else self.data[key])

    def __setitem__(self, key, value: ZArr):
        if not isinstance(key, tuple):
            key = (key,)
        a, b = align(self, value, broadcast=False)
        a.data = np.array(a.data)
        a.data[key + (slice(None),)] = np.broadcast_to(b.data, a.data[key + (slice(None),)].shape)
        self.data, self.scale, self.prec, self.lo, self.M = a.data, a.scale, a.prec, a.lo, a.M
        self._w = None

    def reshape(self, *shape):
        return self._with(self.data.reshape(tuple(shape) + (self.data.shape[-1],)))

    def transpose(self, *axes):
        return self._with(self.data.transpose(tuple(axes) + (self.ndim,)))

    def broadcast_to(self, shape):
        return self._with(np.broadcast_to(self.data, tuple(shape) + (self.data.shape[-1],)).copy())

    def expand(self, axis):
        return self._with(np.expand_dims(self.data, axis))

    def sum(self, axis=0):
        if axis < 0:
            axis += self.ndim
        return self._with(self.data.sum(axis=axis) % self.ring.mod)

    def take(self, idx, axis=0):
        if axis < 0:
            axis += self.ndim
        return self._with(np.take(self.data, idx, axis=axis))

    def moveaxis(self, src, dst):
        n = self.ndim
        return self._with(np.moveaxis(self.data, src % n, dst % n))

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.ring.const(np.full(self.shape, other))
        a, b = align(self, other)
        out = a._with((a.data + b.data) % self.ring.mod, prec=min(a.prec, b.prec), M=min(a.M, b.M))
        return out.trim() if self.laurent else out

    def __radd__(self, other):
        return self + other

    def __neg__(self):
        return self._with((-self.data) % self.ring.mod)

    def __sub__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.ring.const(np.full(self.shape, other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ZArr):
            return self.ring.mul(self, other)
        other = np.asarray(other, dtype=np.int64)
        if other.ndim == 0:
            return self._with((self.data * (int(other) % self.ring.mod)) % self.ring.mod)
        return self._with(_mulmod_arr(self.data, other[..., None], self.ring.mod))

    def __rmul__(self, other):
        return self * other

    def einsum(self, spec, other):
        return self.ring.einsum(spec, self, other)

    def zshift(self, m):
        return self.ring.zshift(self, m)

    def frobenius_z(self, d=None):
        return self.ring.frobenius_z(self, d)

    def div_p(self, m: int):
        return self._with(self.data, scale=self.scale + m)

    # -- precision ------------------------------------------------------
    def W(self):
        """Weighted valuation of the stored data (INF for zero)."""
        if not self.laurent:
            return 0
        if self._w is None:
            self._w = self._weighted_valuation()
        return self._w

    def _weighted_valuation(self):
        p, D = self.ring.p, self.ring.D
        data = self.data.reshape(-1, self.data.shape[-1]) % (p**self.prec)
        live = np.nonzero(np.any(data != 0, axis=0))[0]
        if not len(live):
            return INF
        data = data[:, live]
        deg = self.lo + live
        # column valuation = v_p of the column gcd
        g = np.gcd.reduce(data, axis=0)
        v = _vp_array(g, p, self.prec)
        return int((D * v + deg).min())

    def cut(self, M):
        """Laurent: forget everything at weighted valuation >= M."""
        if not self.laurent:
            return self
        return self._with(self.data, M=min(self.M, M)).trim()

    def trim(self):
        if not self.laurent:
            return self
        mod = self.ring.p**self.prec
        data = self.data % mod
        if self.M < INF:
            # an entry of degree d is dropped when p^need(d) divides it
            deg = self.lo + np.arange(data.shape[-1])
            need = np.clip(-((deg - self.M) // self.ring.D), 0, self.prec)
            powers = _p_powers(self.ring.p, self.prec)[need]
            data = np.where(data % powers == 0, 0, data)
        cols = np.nonzero(np.any(data.reshape(-1, data.shape[-1]) != 0, axis=0))[0]
        if len(cols) == 0:
            return ZArr(self.ring, np.zeros(self.shape + (1,), dtype=np.int64),
                        self.scale, self.prec, 0, self.M)
        first, last = int(cols[0]), int(cols[-1])
        return ZArr(self.ring, data[..., first: last + 1].copy(), self.scale, self.prec,
                    self.lo + first, self.M)

    def reduce(self):
        """Reduce data modulo p^prec (canonical representatives)."""
        return self._with(self.data % (self.ring.p**self.prec))

    def is_zero(self) -> bool:
        x = self.trim() if self.laurent else self
        return not np.any(x.data % (self.ring.p**self.prec))

    def valuation(self) -> int:
        """min v_p of the data entries (capped at prec)."""
        return int(_vp_array(self.data % (self.ring.p**self.prec), self.ring.p, self.prec).min())

    def normalize(self):
        """Cancel common powers of p between data and scale."""
        if self.scale <= 0:
            return self
        v = min(self.valuation(), self.scale)
        if v <= 0:
            return self
        pv = self.ring.p**v
        M = self.M - self.ring.D * v if self.laurent else self.M
        return self._with((self.data % (self.ring.p**self.prec)) // pv, scale=self.scale - v,
                          prec=self.prec - v, M=M)

    def integral(self, what="value"):
        """Return the value as an integral array (scale 0) or raise."""
        x = self.normalize()
        if x.scale > 0:
            if x.prec < x.scale:
                raise PrecisionExhausted(f"{what}: precision exhausted before integrality")
            raise IntegralityViolation(f"{what} is not integral (scale {x.scale})")
        if x.scale < 0:
            s = -x.scale
            return x._with(_mulmod_arr(x.data, self.ring.p**s, self.ring.mod),
                           scale=0, prec=min(self.ring.K, x.prec + s),
                           M=(x.M + self.ring.D * s) if self.laurent else x.M)
        return x

    def certified_digits_at(self, degree) -> int:
        """Laurent: p-adic digits of the value known for the coefficient of t^degree."""
        if not self.laurent or self.M == INF:
            return self.prec - self.scale
        return min(self.prec, int((self.M - degree) // self.ring.D)) - self.scale

    @property
    def certified(self) -> int:
        """Certified absolute p-adic precision of the value (ignoring t-truncation)."""
        return self.prec - self.scale


def _mulmod_arr(x, c, mod):
    c = np.asarray(c, dtype=np.int64) % mod
    return (x * c) % mod


def _vp_array(data, p, cap):
    """Entrywise p-adic valuation, capped at ``cap`` (zero maps to cap)."""
    pc = _p_powers(p, cap)
    g = np.gcd(np.asarray(data, dtype=np.int64), pc[-1])
    return np.searchsorted(pc, g)


_POWERS = {}


def _p_powers(p, cap):
    key = (p, cap)
    if key not in _POWERS:
        _POWERS[key] = np.array([p**i for i in range(cap + 1)], dtype=np.int64)
    return _POWERS[key]


def align(a: ZArr, b: ZArr, broadcast=True):
    """Bring two arrays to a common scale (and common degree range for Laurent)."""
    ring = a.ring
    s = max(a.scale, b.scale)
    out = []
    for x in (a, b):
        if x.scale < s:
            d = s - x.scale
            M = x.M + ring.D * d if x.laurent else x.M
            x = x._with(_mulmod_arr(x.data, ring.p**d, ring.mod), scale=s,
                        prec=min(ring.K, x.prec + d), M=M)
        out.append(x)
    a, b = out
    if a.laurent:
        lo = min(a.lo, b.lo)
        hi = max(a.lo + a.data.shape[-1], b.lo + b.data.shape[-1])
        a, b = _pad(a, lo, hi), _pad(b, lo, hi)
    if not broadcast:
        return a, b
    shape = np.broadcast_shapes(a.shape, b.shape)
    if a.shape != shape:
        a = a.broadcast_to(shape)
    if b.shape != shape:
        b = b.broadcast_to(shape)
    return a, b


def _pad(x, lo, hi):
    L = x.data.shape[-1]
    if x.lo == lo and L == hi - lo:
        return x
    data = np.zeros(x.shape + (hi - lo,), dtype=np.int64)
    data[..., x.lo - lo: x.lo - lo + L] = x.data
    return x._with(data, lo=lo)


def stack(parts, axis=0):
    ring = parts[0].ring
    s = max(x.scale for x in parts)
    al = []
    for x in parts:
        if x.scale < s:
            x, _ = align(x, x._with(x.data, scale=s))
        al.append(x)
    if ring.kind == "laurent":
        lo = min(x.lo for x in al)
        hi = max(x.lo + x.data.shape[-1] for x in al)
        al = [_pad(x, lo, hi) for x in al]
    if axis < 0:
        axis += al[0].ndim + 1
    data = np.stack([x.data for x in al], axis=axis)
    return al[0]._with(data, prec=min(x.prec for x in al), M=min(x.M for x in al))


def scatter_add(index, values: ZArr, size: int) -> ZArr:
    """out[index[i]] += values[i] along the first axis."""
    data = np.zeros((size,) + values.data.shape[1:], dtype=np.int64)
    np.add.at(data, np.asarray(index), values.data)
    return values._with(data % values.ring.mod)
