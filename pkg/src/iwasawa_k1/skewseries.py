"""Skew power series and skew Laurent polynomials over (Z/p^k)[H].

An element is sum_i a_i t^i with coefficients on the left.  Moving t past a
coefficient uses t b = sigma(b) t + delta(b); moving t^-1 past b uses
t^-1 b = sum_{l>=1} delta'^(l-1) sigma^-1(b) t^-l with delta' = sigma^-1 - 1.
Because sigma has order p^e, delta'^(p^e) lies in p*End, so that expansion is
exactly finite modulo p^k.

The map t -> gamma - 1 identifies the power-series part with the group ring
at every finite level, and t^-1 -> t_Z^-1 (1 + gamma + ... + gamma^(p^e - 1))
sends Laurent polynomials into B(Z) (x) R, the representation used by the
logarithm and norm code.
"""

from __future__ import annotations

import math

import numpy as np

from .algebra import GroupRingElement, beta
from .errors import InvalidInput, NotAUnit, PrecisionExhausted, WindowOverflow

INF = float("inf")


class SkewSeriesRing:
    """Lambda(H)[[t; sigma, delta]] truncated to degrees in ``window`` and to p^k."""

    def __init__(self, group, k: int, window=(0, 16)):
        d_neg, d_pos = window
        if d_neg > 0 or d_pos < 0:
            raise InvalidInput("window must contain degree 0")
        self.group = group
        self.p = group.p
        self.k = k
        self.mod = group.p**k
        self.nh = group.nh
        self.window = (int(d_neg), int(d_pos))
        nh = self.nh
        S = np.zeros((nh, nh), dtype=np.int64)
        S[group.action, np.arange(nh)] = 1
        self.sigma_matrix = S
        self.sigma_inv_matrix = S.T.copy()
        eye = np.eye(nh, dtype=np.int64)
        self.delta_matrix = (S - eye) % self.mod
        dprime = (self.sigma_inv_matrix - eye) % self.mod
        # t^-1 b = sum_l D_l b t^-l, D_l = delta'^(l-1) sigma^-1; stop once D_l = 0 mod p^k
        base, cur = {}, self.sigma_inv_matrix.copy()
        l = 1
        while np.any(cur):
            base[-l] = cur
            cur = (dprime @ cur) % self.mod
            l += 1
        self.depth = l - 1
        self._ops = {0: {0: eye}, 1: {1: S, 0: self.delta_matrix}, -1: base}

    @property
    def commutative(self):
        return not np.any(self.delta_matrix)

    def __eq__(self, other):
        return (isinstance(other, SkewSeriesRing) and self.group is other.group
                and self.k == other.k and self.window == other.window)

    def __hash__(self):
        return hash((id(self.group), self.k, self.window))

    # -- operators on Lambda(H) ---------------------------------------------------
    def sigma(self, a):
        return (np.asarray(a) @ self.sigma_matrix.T) % self.mod

    def delta(self, a):
        return (np.asarray(a) @ self.delta_matrix.T) % self.mod

    def base_mul(self, a, b):
        """Product in (Z/p^k)[H]; a, b are coefficient vectors (batched on the left)."""
        return (np.asarray(b) @ self.left_matrix(a).T) % self.mod

    def left_matrix(self, a):
        nh = self.nh
        L = np.zeros((nh, nh), dtype=np.int64)
        np.add.at(L, (self.group.table, np.broadcast_to(np.arange(nh), (nh, nh))),
                  np.broadcast_to(np.asarray(a, dtype=np.int64)[:, None], (nh, nh)))
        return L % self.mod

    def base_is_unit(self, a):
        return int(np.sum(a)) % self.p != 0

    def base_inverse(self, a):
        """Inverse in (Z/p^k)[H] (local ring: units are the elements of nonzero augmentation)."""
        a = np.asarray(a, dtype=np.int64) % self.mod
        if not self.base_is_unit(a):
            raise NotAUnit("coefficient lies in the radical of Lambda(H)")
        one = np.zeros(self.nh, dtype=np.int64)
        one[0] = 1
        b = one * pow(int(np.sum(a)) % self.mod, -1, self.mod)
        for _ in range(64):
            r = (one - self.base_mul(a, b)) % self.mod
            if not np.any(r):
                return b
            b = (b + self.base_mul(b, r)) % self.mod
        raise PrecisionExhausted("Newton iteration in Lambda(H) did not settle")

    def op(self, i: int):
        """{j: M} with t^i b = sum_j (M b) t^j."""
        if i not in self._ops:
            step = self.op(1 if i > 0 else -1)
            prev = self.op(i - 1 if i > 0 else i + 1)
            out = {}
            for j1, m1 in prev.items():
                for j2, m2 in step.items():
                    prod = (m1 @ m2) % self.mod
                    out[j1 + j2] = (out.get(j1 + j2, 0) + prod) % self.mod
            self._ops[i] = {j: m for j, m in out.items() if np.any(m)}
        return self._ops[i]

    # -- elements -------------------------------------------------------------------
    def element(self, coeffs, lo=0, valid_below=INF):
        return SkewLaurentElement(self, lo, coeffs, valid_below)

    def zero(self):
        return self.element(np.zeros((0, self.nh), dtype=np.int64))

    def one(self):
        return self.scalar(np.eye(1, self.nh, 0, dtype=np.int64)[0])

    def scalar(self, a, degree=0):
        return self.element(np.asarray(a, dtype=np.int64)[None, :], lo=degree)

    def t(self, power=1):
        return self.scalar(np.eye(1, self.nh, 0, dtype=np.int64)[0], degree=power)

    def h(self, index):
        return self.scalar(np.eye(1, self.nh, index, dtype=np.int64)[0])

    def random(self, rng, window=None, digits=None):
        lo, hi = self.window if window is None else window
        pd = self.p ** (self.k if digits is None else digits)
        return self.element(rng.integers(0, pd, size=(hi - lo + 1, self.nh)), lo=lo)


class SkewLaurentElement:
    """sum_{i} coeffs[i - lo] t^i; coefficients of degree >= ``valid_below`` are not certified."""

    def __init__(self, ring: SkewSeriesRing, lo, coeffs, valid_below=INF):
        self.ring = ring
        coeffs = np.asarray(coeffs, dtype=np.int64).reshape(-1, ring.nh) % ring.mod
        nz = np.nonzero(np.any(coeffs, axis=1))[0]
        if len(nz):
            coeffs = coeffs[nz[0]: nz[-1] + 1]
            lo = lo + int(nz[0])
        else:
            coeffs = coeffs[:0]
            lo = 0
        self.lo = int(lo)
        self.coeffs = coeffs
        self.valid_below = valid_below
        self.precision = ring.k
        self.residual_degree = None
        d_neg, d_pos = ring.window
        if len(coeffs) and (self.lo < d_neg or self.hi > d_pos):
            raise WindowOverflow(
                f"degrees [{self.lo}, {self.hi}] exceed the window [{d_neg}, {d_pos}]")

    @property
    def hi(self):
        return self.lo + len(self.coeffs) - 1

    def is_zero(self):
        return len(self.coeffs) == 0

    def coefficient(self, i):
        j = i - self.lo
        if 0 <= j < len(self.coeffs):
            return self.coeffs[j].copy()
        return np.zeros(self.ring.nh, dtype=np.int64)

    def terms(self):
        for j, a in enumerate(self.coeffs):
            if np.any(a):
                yield self.lo + j, a

    def _check(self, other):
        if not isinstance(other, SkewLaurentElement) or other.ring != self.ring:
            raise InvalidInput("elements of different skew rings")

    def __add__(self, other):
        self._check(other)
        return _combine(self.ring, [(self.lo, self.coeffs), (other.lo, other.coeffs)],
                        min(self.valid_below, other.valid_below))

    def __neg__(self):
        return self.ring.element(-self.coeffs, self.lo, self.valid_below)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.ring.element(self.coeffs * other, self.lo, self.valid_below)
        return skew_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, SkewLaurentElement):
            return NotImplemented
        d = self - other
        return d.is_zero()

    def __repr__(self):
        parts = [f"{a.tolist()} t^{i}" for i, a in self.terms()]
        return " + ".join(parts) if parts else "0"

    def lowest_unit_degree(self):
        for i, a in self.terms():
            if self.ring.base_is_unit(a):
                return i
        return None

    def in_radical(self):
        """True iff every coefficient lies in the radical (p, I_H) of Lambda(H)."""
        return self.lowest_unit_degree() is None


def _combine(ring, pieces, valid_below=INF, clip=None):
    pieces = [(lo, c) for lo, c in pieces if len(c)]
    if not pieces:
        return ring.element(np.zeros((0, ring.nh)), 0, valid_below)
    lo = min(l for l, _ in pieces)
    hi = max(l + len(c) for l, c in pieces)
    if clip is not None and hi > clip + 1:
        hi = max(clip + 1, lo)
        valid_below = min(valid_below, clip + 1)
    out = np.zeros((hi - lo, ring.nh), dtype=np.int64)
    for l, c in pieces:
        n = min(len(c), hi - l)
        if n > 0:
            out[l - lo: l - lo + n] += c[:n]
    return ring.element(out % ring.mod, lo, valid_below)


def _lowest_shift(x):
    """Lowest degree reached by t^i b t^j relative to j, over the terms of x."""
    shift = 0
    for i, _ in x.terms():
        shift = min(shift, min(x.ring.op(i)))
    return shift


def skew_mul(x: SkewLaurentElement, y: SkewLaurentElement, clip=None) -> SkewLaurentElement:
    """Product with every commutation t^i b = sum_j (M_ij b) t^j applied.

    ``clip`` drops degrees above it (recorded in ``valid_below``); degrees
    outside the ring's window otherwise raise WindowOverflow.
    """
    x._check(y)
    ring = x.ring
    pieces = []
    if not x.is_zero() and not y.is_zero():
        Y = y.coeffs
        for i, a in x.terms():
            La = ring.left_matrix(a)
            for j, M in ring.op(i).items():
                C = (Y @ ((La @ M) % ring.mod).T) % ring.mod
                pieces.append((y.lo + j, C))
    valid = INF
    if x.valid_below < INF:
        valid = min(valid, x.valid_below + min(y.lo, 0) if not y.is_zero() else INF)
    if y.valid_below < INF:
        valid = min(valid, y.valid_below + _lowest_shift(x))
    return _combine(ring, pieces, valid, clip)


def invert_unit(x: SkewLaurentElement, clip=None) -> SkewLaurentElement:
    """Two-sided inverse: leading-unit factorization, then Newton in the radical.

    Degrees above ``clip`` (default: the window's top) are dropped; the result
    carries ``residual_degree``, the lowest degree where x*y - 1 or y*x - 1 is
    nonzero (None if both vanish).
    """
    ring = x.ring
    i0 = x.lowest_unit_degree()
    if i0 is None:
        raise NotAUnit("every coefficient lies in the radical of Lambda(H)")
    clip = ring.window[1] if clip is None else clip

    def mul(a, b):
        c = skew_mul(a, b, clip=clip)
        return ring.element(c.coeffs, c.lo)

    ainv = ring.base_inverse(x.coefficient(i0))
    # (a t^i0)^-1 = t^-i0 a^-1, written with left coefficients
    y = mul(ring.t(-i0), ring.scalar(ainv))
    one = ring.one()
    last = None
    for _ in range(64):
        r = one - mul(x, y)
        key = (r.lo, r.coeffs.tobytes())
        if r.is_zero() or key == last:
            break
        last = key
        y = y + mul(y, r)
    r1 = one - mul(x, y)
    r2 = one - mul(y, x)
    degs = [e.lo for e in (r1, r2) if not e.is_zero()]
    y.residual_degree = min(degs) if degs else None
    if degs:
        # y agrees with the true inverse below the residual degree shifted by y's spread
        y.valid_below = min(degs) + _lowest_shift(y) + min(y.lo, 0)
    return y


# -- group ring at level n ---------------------------------------------------------

def _gamma_minus_one(ctx, ring):
    G = ctx.G
    r, m = ctx.group.split(0, 1)
    return G.basis(ring, int(r), int(m)) - G.one(ring)


def _embed_coefficient(ctx, ring, a):
    data = np.zeros((ctx.group.nr, 1), dtype=np.int64)
    data[: ctx.group.nh, 0] = a
    if ring.kind == "laurent":
        return ring.wrap(data)
    full = np.zeros((ctx.group.nr, ring.pn), dtype=np.int64)
    full[:, :1] = data
    return ring.wrap(full)


def to_group_ring(x: SkewLaurentElement, ctx, ring=None) -> GroupRingElement:
    """Substitute t = gamma - 1 in the group ring of ctx's level (power-series part only)."""
    from .zring import FiniteZ
    if not x.is_zero() and x.lo < 0:
        raise InvalidInput("to_group_ring needs an element without negative powers of t")
    if x.valid_below < INF:
        raise PrecisionExhausted("element is truncated in t; its image is not determined")
    ring = FiniteZ(ctx.p, ctx.n, x.ring.k) if ring is None else ring
    G = ctx.G
    T = _gamma_minus_one(ctx, ring)
    acc = G.one(ring) * 0
    power = G.one(ring)
    for i in range(0, x.hi + 1 if not x.is_zero() else 0):
        if i:
            power = G.mul(power, T)
        a = x.coefficient(i)
        if np.any(a):
            acc = acc + G.mul(_embed_coefficient(ctx, ring, a), power)
    return GroupRingElement(ctx, acc)


def from_group_ring(X: GroupRingElement, sring: SkewSeriesRing) -> SkewLaurentElement:
    """Expand gamma^j = (1 + t)^j; exact for d_pos >= p^(e+n) - 1."""
    ctx = X.ctx
    group = ctx.group
    nh, pe = group.nh, group.pe
    data = X.value.integral().data % sring.mod
    pn = data.shape[-1]
    top = pe * pn
    if sring.window[1] < top - 1:
        raise WindowOverflow(f"from_group_ring needs d_pos >= {top - 1}")
    out = np.zeros((top, nh), dtype=np.int64)
    binom = np.array([[math.comb(j, i) % sring.mod for i in range(top)] for j in range(top)],
                     dtype=np.int64)
    for r in range(group.nr):
        h, a = r % nh, r // nh
        for m in range(pn):
            c = int(data[r, m])
            if c:
                j = a + pe * m
                out[:, h] = (out[:, h] + c * binom[j]) % sring.mod
    return sring.element(out, 0)


# -- B(Z) (x) R representation ------------------------------------------------------

def t_inverse_B(ctx, lring):
    """(gamma - 1)^-1 = t_Z^-1 (1 + gamma + ... + gamma^(p^e - 1))."""
    G = ctx.G
    group = ctx.group
    acc = None
    for j in range(group.pe):
        r, m = group.split(0, j)
        b = G.basis(lring, int(r), int(m))
        acc = b if acc is None else acc + b
    return G.mul(acc, _scalar_laurent(lring, -1, group.nr))


def _scalar_laurent(lring, degree, nr):
    data = np.zeros((nr, 1), dtype=np.int64)
    data[0, 0] = 1
    return lring.wrap(data, lo=degree)


def to_B(x: SkewLaurentElement, ctx, lring) -> GroupRingElement:
    """Exact image of a skew Laurent polynomial in B(Z) (x) R (Laurent ring ``lring``)."""
    if x.valid_below < INF:
        raise PrecisionExhausted("element is truncated in t")
    G = ctx.G
    T = _gamma_minus_one(ctx, lring)
    Tinv = t_inverse_B(ctx, lring)
    pos, neg = G.one(lring), G.one(lring)
    terms = dict(x.terms())
    out = None
    top = max([i for i in terms if i >= 0], default=-1)
    for i in range(0, top + 1):
        if i:
            pos = G.mul(pos, T)
        if i in terms:
            term = G.mul(_embed_coefficient(ctx, lring, terms[i]), pos)
            out = term if out is None else out + term
    bottom = min([i for i in terms if i < 0], default=0)
    for i in range(-1, bottom - 1, -1):
        neg = G.mul(neg, Tinv)
        if i in terms:
            term = G.mul(_embed_coefficient(ctx, lring, terms[i]), neg)
            out = term if out is None else out + term
    if out is None:
        out = G.one(lring) * 0
    return GroupRingElement(ctx, out.trim())


def beta_B(f):
    """beta with B(Z)-coefficients: the structure maps act entrywise on Laurent data."""
    if not f.value.laurent:
        raise InvalidInput("beta_B expects a class element with B(Z) coefficients")
    return beta(f)


# -- B-side harness ---------------------------------------------------------------

B_WINDOW = (-4, 8)
B_WEIGHTS = (32, 48, 64)
B_EXTRA_DIGITS = 3  # t-adic target M = D * (K + B_EXTRA_DIGITS)


def random_B_unit(sring, rng, window=B_WINDOW, digits=None):
    """Random skew Laurent polynomial with a unit coefficient (hence a unit of B(G))."""
    while True:
        x = sring.random(rng, window=window, digits=digits)
        if x.lowest_unit_degree() is not None:
            return x


def _compare_laurent(a, b, degree):
    """(equal, certified digits at t_Z-degree ``degree``) for two class/abelian values."""
    d = a - b
    return d.is_zero(), d.certified_digits_at(degree)


def b_suite(ctx, lc, rng, count, rep, lambda_units=2, window=B_WINDOW):
    """B-coefficient checks appended to ``rep``.

    Lambda-units: theta_B and L_B reduce to theta and L at the working level,
    and L_B agrees with the Lambda-route logarithm inside B.  B-units (skew
    Laurent polynomials in ``window``): scriptL_B(theta_B(x)) = beta_B(L_B(x)),
    with the digits certified at t_Z-degree d_pos reported.
    """
    from .kone import random_unit, theta
    from .logmap import integral_log_L, integral_log_LB, script_L

    k = lc.k
    fring = lc.ring()
    for s in range(lambda_units):
        lring = lc.laurent_ring(D=B_WEIGHTS[0], M=B_WEIGHTS[0] * (lc.K + B_EXTRA_DIGITS))
        x = random_unit(ctx, fring, rng, digits=k)
        xB = GroupRingElement(ctx, lring.lift_level(x.value))
        th, thB = theta(x), theta(xB)
        ok, cert = True, lc.K
        for U in ctx.subgroups:
            red = lring.reduce_level(thB[U].value, fring)
            d = red - th[U].value
            ok &= d.is_zero()
            cert = min(cert, d.certified)
        rep.add("theta_B = theta on Lambda-units", [f"unit {s}"], ok, min(cert, k))
        LB = integral_log_LB(xB)
        Ll = integral_log_L(xB)
        ok1, c1 = _compare_laurent(LB.value, Ll.value, 0)
        red = lring.reduce_level(LB.value, fring)
        d = red - integral_log_L(x).value
        ok2 = d.is_zero()
        rep.add("L_B = L on Lambda-units", [f"unit {s}"], ok1 and ok2,
                min(c1, d.certified, k),
                note="compared inside B and after reduction to the working level")
    sring = SkewSeriesRing(ctx.group, lc.K, window=(window[0], window[1]))
    for s in range(count):
        x = random_B_unit(sring, rng, window, digits=k)
        last_exc = None
        for D in B_WEIGHTS:
            lring = lc.laurent_ring(D=D, M=D * (lc.K + B_EXTRA_DIGITS))
            try:
                xB = to_B(x, ctx, lring)
                thB = theta(xB)
                lhs = script_L(thB)
                rhs = beta_B(integral_log_LB(xB))
            except (PrecisionExhausted, NotAUnit) as exc:
                last_exc = exc
                continue
            ok, cert = True, lc.K
            for V in ctx.subgroups:
                e, c = _compare_laurent(rhs[V].value, lhs[V].value, window[1])
                ok &= e
                cert = min(cert, c)
            rep.add("scriptL_B(theta_B) = beta_B(L_B)", [f"B-unit {s}"], ok and cert >= 2,
                    min(cert, k), note=f"weight D={D}; digits certified at t_Z-degree {window[1]}")
            break
        else:
            rep.add("scriptL_B(theta_B) = beta_B(L_B)", [f"B-unit {s}"], False,
                    note=f"no weight in {B_WEIGHTS} converged: {last_exc}")
    return rep
