"""Logarithms: log on 1 + radical, exp on p*Lambda, the integral logarithm L,
alpha_Z / alpha_U, the tuple map script-L, omega, and the B-variants.

Series are summed until an explicit bound on the neglected tail reaches the
working precision; that bound (not the loop count) sets the precision of the
result.  Inputs are treated as exact, so a computation may run in a ring of
higher p-adic precision than the one the caller cares about (see LogContext).
"""

from __future__ import annotations

import math

import numpy as np

from .algebra import (AbelianElement, AdditiveTuple, ConjClassElement, GroupRingElement,
                      MonomialMap, UnitTuple, conj_project)
from .coeff import vp
from .errors import (InvalidInput, M3aViolation, NotAUnit, NotCyclic, NotInIdeal,
                     PrecisionExhausted)
from .kone import (_norm_from_basis, b_unit_decompose, gamma_algebra, gamma_embed_map,
                   teichmuller_decompose)
from .zring import FiniteZ, INF, ZArr

MAX_DIGITS = 19  # largest K with 3^K < 2^31


class LogContext:
    """Working parameters for logarithms on one lattice.

    ``nilpotence`` is the least N with I^N = 0 in F_p[G_n] (I the augmentation
    ideal), computed by linear algebra; Jac^N lies in p*Lambda.  ``buffer`` is
    the number of extra p-adic digits carried so that results divided by
    p^(2 + v_p|G/Z|) and by p^r (r = ceil(log_p N)) stay certified at k digits.
    """

    def __init__(self, ctx, k, buffer=None):
        self.ctx = ctx
        self.k = k
        self.nilpotence = augmentation_nilpotence(ctx)
        self.r_bound = _ceil_log(self.nilpotence, ctx.p)
        need = 2 + vp(len(ctx.lattice.g.r), ctx.p) + self.r_bound + 1
        self.buffer = need if buffer is None else buffer
        max_digits = int(math.floor(math.log(2**31 - 1) / math.log(ctx.p)))
        self.K = min(k + self.buffer, max_digits)

    def ring(self):
        return FiniteZ(self.ctx.p, self.ctx.n, self.K)

    def laurent_ring(self, M=None, D=None):
        from .zring import LaurentZ
        D = 4 * self.ctx.p if D is None else D
        M = D * self.K if M is None else M
        return LaurentZ(self.ctx.p, self.K, M, D)


def _ceil_log(n, p):
    r, q = 0, 1
    while q < n:
        q *= p
        r += 1
    return r


def augmentation_nilpotence(ctx) -> int:
    """Least N with I^N = 0 mod p in F_p[G_n] (I = augmentation ideal)."""
    def build():
        p = ctx.p
        ring = FiniteZ(p, ctx.n, 1)
        G = ctx.G
        nr, pn = ctx.group.nr, ring.pn
        size = nr * pn
        # generators of G_n: all of H, gamma, and z
        gr, gm = ctx.group.split(0, 1)
        gens = [(r, 0) for r in range(1, ctx.group.nh)] + [(int(gr), int(gm)), (0, 1)]
        gdiff = []
        for r, m in gens:
            e = G.basis(ring, r, m) - G.one(ring)
            if not e.is_zero():
                gdiff.append(e)
        basis = _echelon_mod_p(np.stack([e.data.reshape(-1) for e in gdiff]), p)
        N = 1
        while basis.shape[0]:
            rows = []
            cur = ring.wrap(basis.reshape(-1, nr, pn))
            for e in gdiff:
                rows.append(G.mul(cur, e.expand(0)).data.reshape(-1, size))
            basis = _echelon_mod_p(np.concatenate(rows), p)
            N += 1
            if N > size + 1:
                raise PrecisionExhausted("augmentation ideal does not look nilpotent")
        return N
    return ctx._cached(("nilpotence",), build)


def _echelon_mod_p(mat, p):
    m = np.array(mat, dtype=np.int64) % p
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if len(nz) == 0:
            continue
        piv = r + int(nz[0])
        m[[r, piv]] = m[[piv, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, p)) % p
        col = m[:, c].copy()
        col[r] = 0
        m = (m - np.outer(col, m[r])) % p
        r += 1
    return m[:r]


# -- series -----------------------------------------------------------------

def _lowest(y: ZArr):
    """(valuation, weight) lower bounds for y: p-adic valuation, and for Laurent W."""
    if y.laurent:
        return None, y.W()
    return y.valuation(), None


def log_one_plus(alg, y: ZArr) -> ZArr:
    """log(1 + y) = sum (-1)^(i+1) y^i / i for y in the topologically nilpotent part.

    Finite rings: y must be divisible by p.  Laurent rings: the weighted
    valuation W(y) must be positive.
    """
    ring = y.ring
    p = ring.p
    y = y.integral("log argument")
    if y.is_zero():
        return y._with(y.data * 0)
    if y.laurent:
        w0 = y.W()
        if w0 <= 0:
            raise PrecisionExhausted(f"log series does not converge for weight {w0}; raise D")
        unit, target = w0, y.M if y.M < INF else ring.M
        scale_unit = ring.D
    else:
        v0 = y.valuation()
        if v0 < 1:
            raise NotInIdeal("log argument is not 1 mod p")
        unit, target = v0, y.prec
        scale_unit = 1
    # tail bound: value-weight of y^j / j is >= j*unit - scale_unit*v_p(j)
    def bound(j):
        return j * unit - scale_unit * vp(j, p)

    imax = 1
    while min(bound(j) for j in range(imax + 1, imax + 2 + p * (imax + 2))) < target:
        imax += 1
    tail = min(bound(j) for j in range(imax + 1, imax + 2 + p * (imax + 2)))
    acc = None
    power = y
    # terms of weight >= keep stay beyond the target after division by i
    keep = target + scale_unit * (int(math.log(imax, p)) + 1) if y.laurent else None
    if keep is not None:
        power = power.cut(keep)
    for i in range(1, imax + 1):
        if i > 1:
            power = alg.mul(power, y)
            if keep is not None:
                power = power.cut(keep)
        v = vp(i, p)
        unit_i = (i // p**v) * (1 if i % 2 else -1)
        term = power * pow(unit_i % ring.mod, -1, ring.mod)
        if v:
            term = term.div_p(v)
        acc = term if acc is None else acc + term
    # honesty: the neglected tail only vanishes modulo weight ``tail`` (value scale)
    if acc.laurent:
        acc = acc._with(acc.data, M=min(acc.M, tail + ring.D * acc.scale)).trim()
    else:
        acc = acc._with(acc.data, prec=min(acc.prec, tail + acc.scale))
    return acc.normalize()


def exp_series(alg, a: ZArr) -> ZArr:
    """exp(a) for a in p*Lambda (finite coefficient rings, p odd)."""
    ring = a.ring
    p = ring.p
    a = a.integral("exp argument")
    one = alg.one(ring, a.shape[:-1])
    one.prec = a.prec
    if a.is_zero():
        return one
    v0 = a.valuation()
    if v0 < 1:
        raise NotInIdeal("exp argument is not in p*Lambda")

    def bound(j):
        return j * v0 - vp(math.factorial(j), p)

    imax = 1
    while min(bound(j) for j in range(imax + 1, 2 * imax + 8)) < a.prec:
        imax += 1
    acc = one
    power = one
    fact = 1
    for i in range(1, imax + 1):
        power = alg.mul(power, a)
        fact *= i
        v = vp(fact, p)
        term = power * pow((fact // p**v) % ring.mod, -1, ring.mod)
        acc = acc + term.div_p(v)
    return acc.integral("exp value")


# -- logarithm of units ---------------------------------------------------------

def power_to_one_mod_p(alg, u: ZArr, limit=12):
    """(r, u^(p^r)) with r minimal such that u^(p^r) = 1 mod p."""
    ring = u.ring
    one = alg.one(ring, u.shape[:-1])
    w = u
    if u.laurent and u.M == INF:
        w = u.cut(ring.M)
    for r in range(limit + 1):
        d = w - one
        if d.laurent:
            # weighted analogue of "= 1 mod p": t_Z itself is topologically nilpotent
            if d.trim().W() >= ring.D:
                return r, w
        elif not np.any(d.data % ring.p):
            return r, w
        w = alg.power(w, ring.p)
    raise NotAUnit("element is not 1 modulo the radical")


def log_unit_raw(alg, u: ZArr):
    """log(u) in the algebra (scaled), for u = 1 mod radical; returns (value, r)."""
    r, w = power_to_one_mod_p(alg, u)
    lw = log_one_plus(alg, w - alg.one(u.ring, u.shape[:-1]))
    return lw.div_p(r).normalize(), r


def log_unit(u: GroupRingElement) -> ConjClassElement:
    """Class projection of log(u) for u = 1 mod Jac."""
    val, _ = log_unit_raw(u.ctx.G, u.value)
    return conj_project(GroupRingElement(u.ctx, val))


def exp_p_ideal(a: AbelianElement) -> AbelianElement:
    return a._new(exp_series(a.alg, a.value))


def log_p_ideal(x: AbelianElement) -> AbelianElement:
    """log on 1 + p*Lambda(U) for abelian U (inverse of exp_p_ideal)."""
    one = x.alg.one(x.value.ring)
    return x._new(log_one_plus(x.alg, x.value - one))


def _phi_minus(ctx, lu: ConjClassElement) -> ConjClassElement:
    """lu - (1/p) phi_G(lu)."""
    ph = ctx.phi_class_map()(lu.value).div_p(1)
    return lu._new((lu.value - ph).normalize())


def integral_log_L(x: GroupRingElement) -> ConjClassElement:
    """L(x) = log(u) - (1/p) phi_G(log(u)) with x = zeta * u; checked integral."""
    _, u = teichmuller_decompose(x)
    lu = log_unit(u)
    out = _phi_minus(x.ctx, lu)
    return out._new(out.value.integral("integral logarithm"))


# -- alpha and script-L ---------------------------------------------------------

def _embed(ctx, W, V, value):
    return ctx.embed_map(W, V)(value)


def norm_to_prime_sub(ctx, U, f: AbelianElement) -> AbelianElement:
    """N^U_{U'}(f) for U in C(G,Z), U != Z (U abelian)."""
    U = ctx.sub(U)
    sub = ctx.lattice.prime_sub[U.position]
    alg = ctx.ab(sub)
    det = _norm_from_basis(ctx, f.value, U.abelianization.t, sub, alg, U.r)
    return AbelianElement(ctx, alg, det)


def alpha_U(f: AbelianElement, U) -> AbelianElement:
    """f^p / phi_Z(f) for U = Z, f^p / N^U_{U'}(f) otherwise; checked = 1 mod p."""
    ctx = f.ctx
    U = ctx.sub(U)
    if not U.is_cyclic_mod_z:
        raise NotCyclic(f"{U.label} is not in C(G,Z)")
    alg = f.alg
    p = ctx.p
    fp = alg.power(f.value, p)
    if U is ctx.lattice.z:
        den = ctx.phi_ab_map(U)(f.value)
    else:
        sub = ctx.lattice.prime_sub[U.position]
        den = _embed(ctx, sub, U, norm_to_prime_sub(ctx, U, f).value)
    out = alg.mul(fp, alg.inverse(den))
    d = out - alg.one(out.ring)
    dd = d.trim() if d.laurent else d
    if np.any(dd.data % p):
        raise PrecisionExhausted(f"alpha_{U.label}(f) is not 1 mod p")
    return f._new(out)


def check_m3a(t: UnitTuple):
    """Returns the first subgroup U with x_U^|U/Z| != x_Z mod p, or None."""
    ctx = t.ctx
    z = ctx.lattice.z
    xz = t[z]
    p = ctx.p
    for U in ctx.subgroups:
        xu = t[U]
        lhs = xu.alg.power(xu.value, len(U.r))
        rhs = _embed(ctx, z, U, xz.value)
        d = lhs - rhs
        dd = d.trim() if d.laurent else d
        if np.any(dd.data % p):
            return U
    return None


class _AlphaCache:
    """alpha_W(x_W) and its inverse, computed once per tuple."""

    def __init__(self, t: UnitTuple):
        self.t = t
        self.store = {}

    def inverse_alpha(self, W):
        if W.position not in self.store:
            aw = alpha_U(self.t[W], W)
            self.store[W.position] = aw.alg.inverse(aw.value)
        return self.store[W.position]


def script_L_component(t: UnitTuple, V, cache=None) -> AbelianElement:
    ctx = t.ctx
    V = ctx.sub(V)
    p = ctx.p
    z = ctx.lattice.z
    algV = ctx.ab(V)
    cache = _AlphaCache(t) if cache is None else cache
    yV = t[V].value
    s = p * p * len(V.r)
    num = algV.power(yV, s)
    # the denominator is assembled from inverses computed in smaller algebras
    yz = t[z]
    yz_inv = yz.alg.inverse(yz.value)
    arg = algV.mul(num, _embed(ctx, z, V, ctx.phi_ab_map(z)(yz.alg.power(yz_inv, p))))
    for W in ctx.lattice.P(V):
        img = ctx.phi_ab_map(W, target=V)(cache.inverse_alpha(W))
        arg = algV.mul(arg, algV.power(img, len(W.r)))
    y = arg - algV.one(arg.ring)
    yy = y.trim() if y.laurent else y
    if np.any(yy.data % p):
        raise M3aViolation(f"log argument for {V.label} is not 1 mod p", subgroup=V.label)
    val = log_one_plus(algV, y).div_p(vp(s, p)).normalize()
    return AbelianElement(ctx, algV, val)


def script_L(t: UnitTuple, check=True) -> AdditiveTuple:
    """The tuple map script-L; components are scaled (denominators tracked)."""
    if check:
        bad = check_m3a(t)
        if bad is not None:
            raise M3aViolation(f"(M3a) fails at {bad.label}", subgroup=bad.label)
    ctx = t.ctx
    cache = _AlphaCache(t)
    return AdditiveTuple(ctx, {V.position: script_L_component(t, V, cache)
                               for V in ctx.subgroups})


script_LB = script_L


def lg_identity_rhs(yG: AbelianElement) -> AbelianElement:
    """(1/p) log(y^p / phi(y)) on Lambda(G^ab)."""
    ctx = yG.ctx
    alg = yG.alg
    G = ctx.lattice.g
    arg = alg.mul(alg.power(yG.value, ctx.p), alg.inverse(ctx.phi_ab_map(G)(yG.value)))
    val = log_one_plus(alg, arg - alg.one(arg.ring)).div_p(1).normalize()
    return yG._new(val)


def omega(f: ConjClassElement):
    """prod g^a over the support of f, as Smith coordinates of G_n^ab."""
    ctx = f.ctx
    G = ctx.lattice.g
    sec = G.abelianization
    smith = sec.smith(ctx.n)
    x = f.value.integral("omega argument")
    mod = ctx.p**x.prec
    for d in smith.invariants:
        if mod % d:
            raise PrecisionExhausted("precision too low to evaluate omega")
    cm = ctx.classes()
    acc = [0] * len(smith.invariants)
    for c, r in enumerate(cm.reps.tolist()):
        t = int(sec.pos[r])
        for m in range(x.data.shape[-1]):
            a = int(x.data[c, m]) % mod
            if a:
                coords = smith.coordinates(t, m)
                acc = [(s + a * v) for s, v in zip(acc, coords)]
    return tuple(int(s) % d for s, d in zip(acc, smith.invariants))


# -- B-coefficient logarithm ----------------------------------------------------

def phi_gamma_map(ctx) -> MonomialMap:
    group = ctx.group
    pe, nh = group.pe, group.nh
    dst, zexp = [], []
    for j in range(pe):
        q, c = group.r_power(j * nh, ctx.p)
        dst.append(q // nh)
        zexp.append(c)
    return MonomialMap(pe, pe, np.arange(pe), dst, zexp, zpower=ctx.p)


def log_central_part(ctx, w: ZArr) -> ConjClassElement:
    """(1/p) log(w^p / phi(w)) for w a unit of the Gamma-section algebra, as a class element."""
    galg = gamma_algebra(ctx)
    arg = galg.mul(galg.power(w, ctx.p), galg.inverse(phi_gamma_map(ctx)(w)))
    y = arg - galg.one(arg.ring)
    yy = y.trim() if y.laurent else y
    if np.any(yy.data % ctx.p):
        raise PrecisionExhausted("w^p / phi(w) is not 1 mod p")
    val = log_one_plus(galg, y).div_p(1)
    return conj_project(GroupRingElement(ctx, gamma_embed_map(ctx)(val)))


def integral_log_LB(x: GroupRingElement) -> ConjClassElement:
    """L_B(x) = L_B(v) + L_B(w) for x = v w, v in 1 + I_B, w in B(sigma(Gamma))^x."""
    ctx = x.ctx
    v, w, _ = b_unit_decompose(x)
    lv = _phi_minus(ctx, log_unit(v))
    lw = log_central_part(ctx, w)
    out = lv._new((lv.value + lw.value).normalize())
    return out._new(out.value.integral("B integral logarithm"))
