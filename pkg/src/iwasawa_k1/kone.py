"""Units, norms and the map theta.

Norms N^V_U are determinants of right-multiplication matrices.  Lambda(V) is
a free left Lambda(U)-module on right coset representatives s_i (V is the
disjoint union of the U s_i), and s_i x = sum_j a_ij s_j with a_ij in
Lambda(U).  The entries are pushed to a commutative quotient of Lambda(U)
before the (division-free) determinant is taken.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from .algebra import (AbelianElement, GroupRingElement, MonomialMap, TwistedAlgebra,
                      UnitTuple, determinant, sigma_membership)
from .coeff import CoefficientRing, teichmuller
from .errors import InvalidInput, NotAUnit, NotIndexP, NotSubgroup
from .zring import FiniteZ, ZArr


def multiplication_map(ctx, basis_r, U, section, within_r):
    """MonomialMap sending coefficients over ``basis_r`` to the d x d x |T| matrix entries.

    ``section`` is an abelian section of U (the target of the entries) and
    ``within_r`` the R-indices of V; the right cosets of U in V index the matrix.
    """
    key = ("mult", tuple(np.asarray(basis_r).tolist()), U.position,
           tuple(section.k_r.tolist()), tuple(np.asarray(within_r).tolist()))

    def build():
        group = ctx.group
        reps = U.right_coset_reps(within_r).tolist()
        d = len(reps)
        q, _ = group.r_mul
        coset_of = {}
        for j, s in enumerate(reps):
            for u in U.r.tolist():
                coset_of[int(q[u, s])] = j
        T = section.size
        src, dst, zexp = [], [], []
        for i, s in enumerate(reps):
            sh, sa = group.rep(s)
            for b, r in enumerate(np.asarray(basis_r).tolist()):
                rh, ra = group.rep(r)
                xh, xa = group.mul(sh, sa, rh, ra)
                xr, _ = group.split(xh, xa)
                if int(xr) not in coset_of:
                    raise NotSubgroup("basis element does not lie in V")
                j = coset_of[int(xr)]
                th, ta = group.rep(reps[j])
                ih, ia = group.inv(th, ta)
                uh, ua = group.mul(xh, xa, ih, ia)
                ur, um = group.split(uh, ua)
                t = int(section.pos[int(ur)])
                if t < 0:
                    raise NotSubgroup("cocycle value outside U")
                src.append(b)
                dst.append((i * d + j) * T + t)
                zexp.append(int(um))
        return d, MonomialMap(len(basis_r), d * d * T, src, dst, zexp)
    return ctx._cached(key, build)


def _norm_from_basis(ctx, value: ZArr, basis_r, U, alg, within_r):
    d, mmap = multiplication_map(ctx, basis_r, U, alg.section, within_r)
    mat = mmap(value).reshape(d, d, alg.size)
    return determinant(alg, mat)


def norm(ctx, V, U, x: GroupRingElement) -> AbelianElement:
    """N^V_U(x) in Lambda(U^ab) for x supported on V."""
    V, U = ctx.sub(V), ctx.sub(U)
    if not U.r_set <= V.r_set:
        raise NotSubgroup(f"{U.label} is not contained in {V.label}")
    value = x.value
    outside = np.setdiff1d(np.arange(ctx.group.nr), V.r)
    if len(outside) and not value.take(outside, axis=-1).is_zero():
        raise InvalidInput(f"element is not supported on {V.label}")
    alg = ctx.ab(U)
    det = _norm_from_basis(ctx, value.take(V.r, axis=-1), V.r, U, alg, V.r)
    return AbelianElement(ctx, alg, det)


def theta_U(x: GroupRingElement, U) -> AbelianElement:
    return norm(x.ctx, x.ctx.lattice.g, U, x)


def theta(x: GroupRingElement) -> UnitTuple:
    """(theta_U(x))_U over the whole lattice; also serves B-coefficients."""
    ctx = x.ctx
    return UnitTuple(ctx, {U.position: theta_U(x, U) for U in ctx.subgroups})


theta_B = theta


def nu_VU(ctx, V, U, y: AbelianElement) -> AbelianElement:
    """N^{V^ab}_{U/[V,V]}(y) for [V,V] <= U <= V."""
    V, U = ctx.sub(V), ctx.sub(U)
    alg = ctx.section_algebra(U, V)
    sv = V.abelianization
    det = _norm_from_basis(ctx, y.value, sv.t, U, alg, V.r)
    return AbelianElement(ctx, alg, det)


# -- explicit index-p determinant -------------------------------------------

class LeibnizReport:
    def __init__(self, leibniz, collapsed, berkowitz, norm_value, membership):
        self.leibniz = leibniz
        self.collapsed = collapsed
        self.berkowitz = berkowitz
        self.norm = norm_value
        self.membership = membership

    @property
    def consistent(self):
        return (self.leibniz == self.berkowitz) and (self.leibniz == self.norm)

    def to_json(self):
        return {"determinants_agree": bool(self.consistent),
                "difference_in_image": self.membership.to_json()}


def leibniz_norm_oracle(ctx, V, U, x: GroupRingElement) -> LeibnizReport:
    """N^V_U(x) from x = sum_k x_k g^k, expanded by the permutation formula."""
    V, U = ctx.sub(V), ctx.sub(U)
    p = ctx.p
    if not U.r_set <= V.r_set or len(V.r) != p * len(U.r):
        raise NotIndexP(f"{U.label} is not of index p in {V.label}")
    if not U.is_normal_in(V):
        raise NotIndexP(f"{U.label} is not normal in {V.label}")
    group = ctx.group
    g = min(r for r in V.r.tolist() if not U.contains_r(r))
    alg = ctx.ab(U)
    sec = alg.section
    ring = x.value.ring
    gh, ga = group.rep(g)
    # g^k for k < p as group pairs, and g^p in U
    gpow = [(0, 0)]
    for _ in range(p):
        gpow.append(tuple(int(v) for v in group.mul(*gpow[-1], gh, ga)))
    gp_r, gp_m = group.split(*gpow[p])
    gp = alg.basis(ring, int(sec.pos[int(gp_r)]), int(gp_m))
    # pr(x_k): r = u g^k with u in U
    parts = [ring.zeros((sec.size,)) for _ in range(p)]
    value = x.value
    for r in V.r.tolist():
        c = value[r]
        rh, ra = group.rep(r)
        for k in range(p):
            ih, ia = group.inv(*gpow[k])
            uh, ua = group.mul(rh, ra, ih, ia)
            ur, um = group.split(uh, ua)
            if U.contains_r(int(ur)):
                parts[k][int(sec.pos[int(ur)])] = parts[k][int(sec.pos[int(ur)])] + c.zshift(int(um))
                break
    # sigma^i on Lambda(U^ab): conjugation by g^i (exact on R-indices)
    conj = group.r_conj

    def sig(f, i):
        gi_r, _ = group.split(*gpow[i])
        img = sec.pos[conj[int(gi_r), sec.t]]
        return MonomialMap(sec.size, sec.size, np.arange(sec.size), img)(f)

    entries = {}
    for i in range(p):
        for k in range(p):
            e = sig(parts[k], i)
            if i + k >= p:
                e = alg.mul(e, gp)
            entries[(i, (i + k) % p)] = e
    zero = ring.zeros((sec.size,))

    def entry(i, j):
        return entries.get((i, j), zero)

    leib = zero
    for perm in permutations(range(p)):
        sign = _perm_sign(perm)
        term = alg.one(ring)
        for i in range(p):
            term = alg.mul(term, entry(i, perm[i]))
        leib = leib + term * sign
    coll = zero
    for k in range(p):
        term = alg.power(gp, k)
        for i in range(p):
            term = alg.mul(term, sig(parts[k], i))
        coll = coll + term
    mat_rows = [[entry(i, j) for j in range(p)] for i in range(p)]
    from .zring import stack
    mat = stack([stack(row) for row in mat_rows])
    berk = determinant(alg, mat)
    direct = norm(ctx, V, U, x).value
    diff = AbelianElement(ctx, alg, leib - coll)
    mem = sigma_membership(diff, U, V)
    wrap = lambda v: AbelianElement(ctx, alg, v)
    return LeibnizReport(wrap(leib), wrap(coll), wrap(berk), wrap(direct), mem)


def _perm_sign(perm):
    sign, seen = 1, set()
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# -- decompositions of units --------------------------------------------------

def teichmuller_decompose(x: GroupRingElement):
    """x = zeta * u with zeta a Teichmuller scalar and u = 1 mod Jac."""
    ring = x.value.ring
    if isinstance(ring, FiniteZ):
        aug = int(x.value.data.sum()) % ring.mod
    else:
        # Lambda(G) inside B: a power series in t_Z, reduced at t_Z = 0
        v = x.value.trim()
        if v.lo < 0 and np.any(v.data[..., : min(-v.lo, v.data.shape[-1])]):
            raise InvalidInput("Teichmuller decomposition needs an element of Lambda(G)")
        aug = int(v.data[..., -v.lo].sum()) % ring.mod if 0 <= -v.lo < v.data.shape[-1] else 0
    if aug % ring.p == 0:
        raise NotAUnit("augmentation is divisible by p")
    cr = CoefficientRing(ring.p, x.value.prec)
    zeta = teichmuller(cr, aug % ring.p)
    zinv = pow(int(zeta.coords[0]), -1, ring.mod)
    u = x._new(x.value * zinv)
    return zeta, u


def gamma_algebra(ctx) -> TwistedAlgebra:
    """The commutative algebra of the section Gamma -> G (basis gamma^j, j < p^e)."""
    def build():
        group = ctx.group
        pe, nh = group.pe, group.nh
        q, c = group.r_mul
        idx = np.arange(pe) * nh
        mt = q[np.ix_(idx, idx)] // nh
        return TwistedAlgebra(mt, c[np.ix_(idx, idx)], 0, idx, name="Gamma")
    return ctx._cached(("gamma",), build)


def kill_h_map(ctx) -> MonomialMap:
    """G -> Gamma, (h, j) -> gamma^j."""
    nr = ctx.group.nr
    return MonomialMap(nr, ctx.group.pe, np.arange(nr), np.arange(nr) // ctx.group.nh)


def gamma_embed_map(ctx) -> MonomialMap:
    pe, nh = ctx.group.pe, ctx.group.nh
    return MonomialMap(pe, ctx.group.nr, np.arange(pe), np.arange(pe) * nh)


def b_unit_decompose(x: GroupRingElement):
    """x = v * w with w in B(sigma(Gamma))^x and v in 1 + I_B.

    Returns (v, w, ell) where w is given in the Gamma-basis and ell is the
    smallest exponent with (v - 1)^(p^ell) = 0 mod p (checked, not assumed).
    """
    ctx = x.ctx
    galg = gamma_algebra(ctx)
    w = kill_h_map(ctx)(x.value)
    try:
        winv = galg.inverse(w)
    except NotAUnit:
        raise NotAUnit("image in B(Gamma) is not a unit") from None
    v = ctx.G.mul(x.value, gamma_embed_map(ctx)(winv))
    ell = radical_exponent(ctx.G, v - ctx.G.one(v.ring))
    return x._new(v), w, ell


def radical_exponent(alg, y: ZArr, limit=12) -> int:
    """Smallest ell with y^(p^ell) = 0 mod p (for y in the radical mod p)."""
    ring = y.ring
    p = ring.p
    cur = y._with(y.data % p, prec=1)
    for ell in range(limit + 1):
        if not np.any(cur.trim().data % p if cur.laurent else cur.data % p):
            return ell
        cur = alg.power(cur, p)
        cur = cur._with(cur.data % p, prec=1)
    raise NotAUnit("element does not lie in the radical")


# -- random units -------------------------------------------------------------

def random_unit(ctx, ring, rng, support=None, digits=None, teich=True, group_element=True):
    """1 + (random radical element), optionally times a Teichmuller scalar and a group element.

    Coefficients are integers in [0, p^digits); the element is treated as exact.
    ``support`` restricts to the R-indices of a subgroup.
    """
    p = ring.p
    nr = ctx.group.nr
    digits = ring.K if digits is None else digits
    pd = p**digits
    rs = np.arange(nr) if support is None else np.asarray(support)
    zdim = ring.pn
    data = np.zeros((nr, zdim), dtype=np.int64)
    data[rs] = rng.integers(0, pd, size=(len(rs), zdim))
    aug = int(data.sum()) % p
    data[0, 0] = (data[0, 0] - aug) % pd
    data[0, 0] = (data[0, 0] + 1) % pd
    x = GroupRingElement(ctx, ring.wrap(data))
    if teich:
        cr = CoefficientRing(p, ring.K)
        zeta = teichmuller(cr, int(rng.integers(1, p)))
        x = x.scaled(int(zeta.coords[0]))
    if group_element:
        r = int(rng.choice(rs))
        m = int(rng.integers(0, zdim))
        x = x * GroupRingElement(ctx, ctx.G.basis(ring, r, m))
    return x
