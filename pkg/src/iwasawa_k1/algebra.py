"""Group rings over a Z-ring, class modules and the linear maps between them.

Every ring here is free over Lambda(Z) (or B(Z)) on a finite basis of
R-indices, so elements are ``ZArr`` arrays whose last batch axis runs over
that basis.  Maps between such modules are sparse "monomial" matrices: each
term sends basis vector ``src`` to ``mult * z^zexp`` times basis vector
``dst``, optionally after substituting z -> z^d in the coefficients.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp

from .coeff import vp
from .errors import (InvalidInput, NotAUnit, NotCyclic, NotNormal, NotSubgroup,
                     PrecisionExhausted)
from .group import AbelianSection, FiniteQuotient, SubgroupHandle, verlagerung
from .zring import INF, FiniteZ, LaurentZ, ZArr, _matmul_mod, stack


# -- sparse monomial maps ------------------------------------------------

class MonomialMap:
    def __init__(self, n_in, n_out, src, dst, zexp=None, mult=None, zpower=1):
        self.n_in, self.n_out = n_in, n_out
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        k = len(self.src)
        self.zexp = np.zeros(k, dtype=np.int64) if zexp is None else np.asarray(zexp, dtype=np.int64)
        self.mult = np.ones(k, dtype=np.int64) if mult is None else np.asarray(mult, dtype=np.int64)
        self.zpower = zpower

    def __call__(self, x: ZArr) -> ZArr:
        if x.shape[-1] != self.n_in:
            raise InvalidInput(f"map expects {self.n_in} components, got {x.shape[-1]}")
        ring = x.ring
        if self.zpower != 1:
            x = ring.frobenius_z(x, self.zpower)
        if len(self.src) == 0:
            out = ring.zeros(x.shape[:-1] + (self.n_out,))
            out.prec, out.scale = x.prec, x.scale
            return out
        y = x.take(self.src, axis=-1)
        if np.any(self.zexp):
            y = ring.zshift(y, np.broadcast_to(self.zexp, y.shape))
        if np.any(self.mult != 1):
            y = y * np.broadcast_to(self.mult, y.shape)
        data = np.moveaxis(y.data, -2, 0)
        out = np.zeros((self.n_out,) + data.shape[1:], dtype=np.int64)
        np.add.at(out, self.dst, data)
        return y._with(np.moveaxis(out % ring.mod, 0, -2))

    def then(self, other: MonomialMap) -> MonomialMap:
        """The composite other o self."""
        by_src = {}
        for k in range(len(other.src)):
            by_src.setdefault(int(other.src[k]), []).append(k)
        src, dst, zexp, mult = [], [], [], []
        for i in range(len(self.src)):
            for k in by_src.get(int(self.dst[i]), []):
                src.append(self.src[i])
                dst.append(other.dst[k])
                zexp.append(other.zpower * self.zexp[i] + other.zexp[k])
                mult.append(self.mult[i] * other.mult[k])
        return MonomialMap(self.n_in, other.n_out, src, dst, zexp, mult,
                           self.zpower * other.zpower)

    def integer_matrix(self):
        if np.any(self.zexp) or self.zpower != 1:
            raise InvalidInput("map is not given by an integer matrix")
        mat = np.zeros((self.n_in, self.n_out), dtype=np.int64)
        np.add.at(mat, (self.src, self.dst), self.mult)
        return mat


# -- algebras with a basis of R-indices ------------------------------------

class TwistedAlgebra:
    """Lambda(Z)-algebra with basis T and products t_i t_j = t_mt[i,j] z^cz[i,j]."""

    def __init__(self, mt, cz, identity=0, basis_r=None, name=""):
        self.mt = np.asarray(mt, dtype=np.int64)
        self.cz = np.asarray(cz, dtype=np.int64)
        self.size = self.mt.shape[0]
        self.identity = int(identity)
        self.basis_r = np.arange(self.size) if basis_r is None else np.asarray(basis_r)
        self.name = name
        jmap = np.zeros_like(self.mt)
        rows = np.arange(self.size)[:, None]
        jmap[rows, self.mt] = np.arange(self.size)[None, :]
        self.jmap = jmap
        self.czmap = np.take_along_axis(self.cz, jmap, axis=1)
        self.commutative = bool(np.array_equal(self.mt, self.mt.T) and np.array_equal(self.cz, self.cz.T))

    def __repr__(self):
        return f"TwistedAlgebra({self.name or self.size})"

    def one(self, ring, shape=()):
        out = ring.zeros(tuple(shape) + (self.size,))
        out[..., self.identity] = ring.ones(shape)
        return out

    def basis(self, ring, i, m=0):
        out = ring.zeros((self.size,))
        out[i] = ring.zpow(m)
        return out

    def from_terms(self, ring, terms):
        """Sum of coeff * z^m * t_i over (i, m, coeff)."""
        out = ring.zeros((self.size,))
        for i, m, c in terms:
            out[i] = out[i] + ring.zpow(m) * int(c)
        return out

    def regular(self, b: ZArr) -> ZArr:
        """reg[..., i, l] with (a*b)[l] = sum_i a[i] reg[i, l]."""
        g = b.take(self.jmap, axis=-1)
        if np.any(self.czmap):
            g = b.ring.zshift(g, np.broadcast_to(self.czmap, g.shape))
        return g

    def mul(self, a: ZArr, b: ZArr) -> ZArr:
        return a.ring.einsum("...i,...il->...l", a, self.regular(b))

    def power(self, a: ZArr, e: int) -> ZArr:
        if e < 0:
            return self.power(self.inverse(a), -e)
        result = None
        base = a
        while e:
            if e & 1:
                result = base if result is None else self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        if result is None:
            result = self.one(a.ring, a.shape[:-1])
            result.prec = a.prec
        return result

    def augmentation(self, a: ZArr):
        """Image in Lambda(Z) of the map t_i -> 1 (only meaningful when all cz vanish mod z)."""
        return a.sum(axis=-1)

    def residue_unit(self, a: ZArr) -> bool:
        """Finite level: is the image in the residue field nonzero?"""
        aug = a.data.sum(axis=(-2, -1)) % a.ring.p
        return bool(np.all(aug != 0))

    def inverse(self, a: ZArr) -> ZArr:
        if self.commutative:
            return self._inverse_charpoly(a)
        return self._inverse_newton(a)

    def _inverse_newton(self, a: ZArr) -> ZArr:
        ring = a.ring
        if not isinstance(ring, FiniteZ):
            raise InvalidInput("Newton inversion is implemented for finite levels only")
        a = a.integral("unit")
        aug = a.data.sum(axis=(-2, -1)) % ring.mod
        if np.any(aug % ring.p == 0):
            raise NotAUnit("augmentation is not a unit")
        inv = np.vectorize(lambda v: pow(int(v), -1, ring.mod), otypes=[np.int64])(aug)
        y = self.one(ring, a.shape[:-1]) * inv[..., None] if aug.ndim else self.one(ring) * int(inv)
        y.prec = a.prec
        one = self.one(ring, a.shape[:-1])
        for _ in range(80):
            r = one - self.mul(a, y)
            if r.is_zero():
                return y
            y = y + self.mul(y, r)
        raise PrecisionExhausted("Newton inversion did not converge")

    def _inverse_charpoly(self, a: ZArr) -> ZArr:
        """x^-1 = -(x^(n-1) + c_1 x^(n-2) + ... + c_(n-1)) / c_n by Cayley-Hamilton."""
        if a.shape[:-1] != ():
            flat = a.reshape(-1, self.size)
            parts = [self._inverse_charpoly(flat[i]) for i in range(flat.shape[0])]
            return stack(parts).reshape(*a.shape)
        scale = a.scale
        a = a._with(a.data, scale=0)
        shift = 0
        if a.laurent:
            # divide out the central monomial t^W(a) so every entry has weight >= 0;
            # otherwise the single truncation bound per array loses precision in Berkowitz
            w = a.trim().W()
            if w != 0 and w < INF:
                shift = int(w)
                a = a._with(a.data, lo=a.lo - shift, M=a.M - shift)
        coeffs = charpoly(Z_ALGEBRA, self.regular(a).expand(2))
        n = self.size
        cinv = a.ring.inverse(coeffs[n][0])
        acc = self.one(a.ring)
        acc.prec = a.prec
        for k in range(1, n):
            acc = self.mul(acc, a) + _scalar_times(self, coeffs[k][0], a.ring)
        out = -_scale_by(acc, cinv)
        if shift:
            out = out._with(out.data, lo=out.lo - shift, M=out.M - shift)
        return out._with(out.data, scale=out.scale - scale) if scale else out


def _scalar_times(alg, c: ZArr, ring):
    """c * identity of alg for a Z-ring scalar c."""
    out = ring.zeros((alg.size,))
    out[alg.identity] = c
    return out


def _scale_by(x: ZArr, c: ZArr) -> ZArr:
    """Multiply every component of x by the Z-ring scalar c."""
    return x.ring.einsum("...i,...->...i", x, c)


Z_ALGEBRA = TwistedAlgebra([[0]], [[0]], name="Z")


def matvec(alg, A: ZArr, v: ZArr) -> ZArr:
    """sum_j A[i, j] v[j] over alg; A has shape (n, n, T), v has shape (n, T)."""
    return alg.mul(A, v.expand(0)).sum(axis=1)


def charpoly(alg, A: ZArr):
    """Berkowitz: coefficients c_0 = 1, ..., c_n of det(x I - A) over a commutative algebra.

    A has shape (n, n, T); each returned coefficient has shape (T,).
    """
    n = A.shape[0]
    ring = A.ring
    one = alg.one(ring)
    one.prec = A.prec
    poly = stack([one])
    for k in range(1, n + 1):
        a = A[k - 1, k - 1]
        col = [one, -a]
        if k > 1:
            R = A[k - 1, : k - 1]
            C = A[: k - 1, k - 1]
            Ak = A[: k - 1, : k - 1]
            v = C
            for j in range(k - 1):
                col.append(-alg.mul(R, v).sum(axis=0))
                if j < k - 2:
                    v = matvec(alg, Ak, v)
        colarr = stack(col)  # (k+1, T)
        idx = np.arange(k + 1)[:, None] - np.arange(k)[None, :]
        valid = idx >= 0
        toe = colarr.take(np.where(valid, idx, 0), axis=0)  # (k+1, k, T)
        toe = toe * valid[..., None].astype(np.int64)
        poly = alg.mul(toe, poly.expand(0)).sum(axis=1)
    return [poly[i] for i in range(n + 1)]


def determinant(alg, A: ZArr) -> ZArr:
    n = A.shape[0]
    if n == 0:
        return alg.one(A.ring)
    c = charpoly(alg, A)[n]
    return c if n % 2 == 0 else -c


# -- class modules ----------------------------------------------------------

class ClassModule:
    """O[Conj(X)] at a fixed level: basis = conjugacy classes of X modulo Z."""

    def __init__(self, X: SubgroupHandle):
        group = X.group
        self.X = X
        conj = group.r_conj
        members = X.r.tolist()
        orbit_of = np.full(group.nr, -1, dtype=np.int64)
        reps = []
        for r in members:
            if orbit_of[r] >= 0:
                continue
            orbit = set(int(conj[g, r]) for g in members)
            for y in orbit:
                orbit_of[y] = len(reps)
            reps.append(min(orbit))
        # reps are discovered in increasing order of their minimal element
        order = np.argsort(reps)
        rank = np.empty(len(reps), dtype=np.int64)
        rank[order] = np.arange(len(reps))
        self.orbit_of = np.where(orbit_of >= 0, rank[np.maximum(orbit_of, 0)], -1)
        self.reps = np.array(sorted(reps))
        self.size = len(self.reps)
        self.class_sizes = np.bincount(self.orbit_of[X.r], minlength=self.size)


class AbelianAlgebra(TwistedAlgebra):
    """Lambda(X/K) for an abelian section X/K."""

    def __init__(self, section: AbelianSection, name=""):
        super().__init__(section.mt, section.cz, section.identity, section.t, name)
        self.section = section


# -- the context of all tables for one lattice ------------------------------

class AlgebraContext:
    """Integer tables for every map on one subgroup lattice.

    The tables do not depend on the Z-ring, so the same context serves
    Lambda(Z)_n at any precision and the B(Z) truncations.
    """

    def __init__(self, quotient: FiniteQuotient):
        self.quotient = quotient
        self.group = quotient.group
        self.p = self.group.p
        self.n = quotient.n
        self.lattice = quotient.lattice
        q, c = self.group.r_mul
        self.G = TwistedAlgebra(q, c, 0, np.arange(self.group.nr), name="G")
        self._cache = {}

    # rings
    def finite_ring(self, k):
        return FiniteZ(self.p, self.n, k)

    def laurent_ring(self, k, M, D=None):
        return LaurentZ(self.p, k, M, D)

    def _cached(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def subgroups(self):
        return self.lattice.subgroups

    def sub(self, U) -> SubgroupHandle:
        if isinstance(U, SubgroupHandle):
            return U
        if isinstance(U, str):
            return self.lattice.by_label(U)
        return self.lattice[int(U)]

    def index(self, V, U) -> int:
        return len(self.sub(V).r) // len(self.sub(U).r)

    # modules
    def classes(self, X=None) -> ClassModule:
        X = self.lattice.g if X is None else self.sub(X)
        return self._cached(("classes", X.position), lambda: ClassModule(X))

    def ab(self, U) -> AbelianAlgebra:
        U = self.sub(U)
        return self._cached(("ab", U.position),
                            lambda: AbelianAlgebra(U.abelianization, name=f"{U.label}^ab"))

    def section_algebra(self, U, V) -> AbelianAlgebra:
        """Lambda(U/[V,V]) for [V,V] <= U <= V."""
        U, V = self.sub(U), self.sub(V)
        if not set(V.commutator_r.tolist()) <= U.r_set or not U.r_set <= V.r_set:
            raise NotSubgroup(f"need [V,V] <= U <= V for {U.label}, {V.label}")
        return self._cached(("sec", U.position, V.position),
                            lambda: AbelianAlgebra(self.lattice.sections(U, V),
                                                   name=f"{U.label}/[{V.label},{V.label}]"))

    # maps
    def conj_project_map(self) -> MonomialMap:
        cm = self.classes()
        nr = self.group.nr
        return MonomialMap(nr, cm.size, np.arange(nr), cm.orbit_of)

    def trace_map(self, V, U) -> MonomialMap:
        V, U = self.sub(V), self.sub(U)

        def build():
            if not U.r_set <= V.r_set:
                raise NotSubgroup(f"{U.label} is not contained in {V.label}")
            cv, cu = self.classes(V), self.classes(U)
            conj = self.group.r_conj
            src, dst = [], []
            for ci, r in enumerate(cv.reps.tolist()):
                for x in U.left_coset_reps(V.r).tolist():
                    y = int(conj[self._r_inverse(x), r])
                    if U.contains_r(y):
                        src.append(ci)
                        dst.append(cu.orbit_of[y])
            return MonomialMap(cv.size, cu.size, src, dst)
        return self._cached(("tr", V.position, U.position), build)

    def _r_inverse(self, r):
        h, a = self.group.rep(r)
        ih, ia = self.group.inv(h, a)
        return int(self.group.split(ih, ia)[0])

    def pr_ab_map(self, U) -> MonomialMap:
        U = self.sub(U)
        cu = self.classes(U)
        sec = U.abelianization
        return MonomialMap(cu.size, sec.size, np.arange(cu.size), sec.pos[cu.reps])

    def beta_map(self, U) -> MonomialMap:
        U = self.sub(U)
        return self._cached(("beta", U.position),
                            lambda: self.trace_map(self.lattice.g, U).then(self.pr_ab_map(U)))

    def conj_map(self, g, U):
        """Returns (gUg^-1, map Lambda(U^ab) -> Lambda((gUg^-1)^ab))."""
        U = self.sub(U)
        W = self.lattice.conjugate(int(g), U)
        su, sw = U.abelianization, W.abelianization
        img = sw.pos[self.group.r_conj[int(g), su.t]]
        return W, MonomialMap(su.size, sw.size, np.arange(su.size), img)

    def sigma_map(self, U, V=None) -> MonomialMap:
        """sigma^V_U on Lambda(U^ab); V defaults to the normalizer N(U)."""
        U = self.sub(U)
        Vr = U.normalizer_r if V is None else self.sub(V).r
        key = ("sigma", U.position, -1 if V is None else self.sub(V).position)

        def build():
            if V is not None:
                Vh = self.sub(V)
                if not U.r_set <= Vh.r_set:
                    raise NotSubgroup(f"{U.label} is not contained in {Vh.label}")
                if not U.is_normal_in(Vh):
                    raise NotNormal(f"{U.label} is not normal in {Vh.label}")
            sec = U.abelianization
            reps = U.left_coset_reps(Vr)
            src, dst = [], []
            for g in reps.tolist():
                img = sec.pos[self.group.r_conj[g, sec.t]]
                src.extend(range(sec.size))
                dst.extend(img.tolist())
            return MonomialMap(sec.size, sec.size, src, dst)
        return self._cached(key, build)

    def eta_map(self, U) -> MonomialMap:
        U = self.sub(U)
        if not U.is_cyclic_mod_z:
            raise NotCyclic(f"{U.label} is not in C(G,Z)")
        sec = U.abelianization
        if U is self.lattice.z:
            keep = list(range(sec.size))
        else:
            sub = self.lattice.prime_sub[U.position]
            keep = [i for i, t in enumerate(sec.t.tolist()) if not sub.contains_r(t)]
        return MonomialMap(sec.size, sec.size, keep, keep)

    def phi_ab_map(self, U, target=None) -> MonomialMap:
        """t -> t^p on Lambda(U^ab) (coefficients z -> z^p), optionally into Lambda(target^ab)."""
        U = self.sub(U)
        sec = U.abelianization
        tsec = sec if target is None else self.sub(target).abelianization
        dst, zexp = [], []
        for t in sec.t.tolist():
            q, c = self.group.r_power(t, self.p)
            pos = int(tsec.pos[q])
            if pos < 0:
                raise NotSubgroup("p-th powers do not lie in the target")
            dst.append(pos)
            zexp.append(c)
        return MonomialMap(sec.size, tsec.size, np.arange(sec.size), dst, zexp, zpower=self.p)

    def phi_class_map(self, X=None) -> MonomialMap:
        cm = self.classes(X)
        dst, zexp = [], []
        for r in cm.reps.tolist():
            q, c = self.group.r_power(r, self.p)
            dst.append(cm.orbit_of[q])
            zexp.append(c)
        return MonomialMap(cm.size, cm.size, np.arange(cm.size), dst, zexp, zpower=self.p)

    def delta_map(self, U):
        """Returns (map t -> [t]_G, v) with delta_U = p^-v * map."""
        U = self.sub(U)
        sec = U.abelianization
        cm = self.classes()
        return (MonomialMap(sec.size, cm.size, np.arange(sec.size), cm.orbit_of[sec.t]),
                vp(U.index, self.p))

    def pi_map(self, U, V) -> MonomialMap:
        U, V = self.sub(U), self.sub(V)
        sec = U.abelianization
        tgt = self.section_algebra(U, V).section
        return MonomialMap(sec.size, tgt.size, np.arange(sec.size), tgt.pos[sec.t])

    def tau_map(self, U, V) -> MonomialMap:
        U, V = self.sub(U), self.sub(V)
        sv = V.abelianization
        tgt = self.section_algebra(U, V).section
        idx = [i for i, t in enumerate(sv.t.tolist()) if U.contains_r(t)]
        return MonomialMap(sv.size, tgt.size, idx, tgt.pos[sv.t[idx]],
                           mult=[self.index(V, U)] * len(idx))

    def ver_map(self, V, U) -> MonomialMap:
        """The ring homomorphism Lambda(V^ab) -> Lambda(U^ab) extending the transfer."""
        V, U = self.sub(V), self.sub(U)

        def build():
            sv = V.abelianization
            dst, zexp = [], []
            for t in sv.t.tolist():
                pos, m = verlagerung(V, U, t)
                dst.append(pos)
                zexp.append(m)
            return MonomialMap(sv.size, U.abelianization.size, np.arange(sv.size), dst, zexp,
                               zpower=self.index(V, U))
        return self._cached(("ver", V.position, U.position), build)

    def embed_map(self, W, V) -> MonomialMap:
        """Lambda(W^ab) -> Lambda(V^ab) induced by W <= V."""
        W, V = self.sub(W), self.sub(V)
        sw, sv = W.abelianization, V.abelianization
        if not W.r_set <= V.r_set:
            raise NotSubgroup(f"{W.label} is not contained in {V.label}")
        return MonomialMap(sw.size, sv.size, np.arange(sw.size), sv.pos[sw.t])

    # integral image membership
    def sigma_snf(self, U, V=None):
        key = ("snf", self.sub(U).position, -1 if V is None else self.sub(V).position)
        return self._cached(key, lambda: SmithSolver(self.sigma_map(U, V).integer_matrix()))


# -- linear algebra over Z/p^k ---------------------------------------------

class SmithSolver:
    """Solve c S = f for an integer matrix S, coordinatewise over a Z-ring."""

    def __init__(self, S):
        self.S = np.asarray(S, dtype=np.int64)
        n, m = self.S.shape
        D, P, Q = smith_normal_decomp(Matrix(self.S.tolist()))
        self.diag = [int(D[i, i]) if i < min(n, m) else 0 for i in range(m)]
        self.P = np.array(P.tolist(), dtype=object)
        self.Q = np.array(Q.tolist(), dtype=object)
        self.rows = n

    def solve(self, f: ZArr, p_power: int = 0):
        """Witness c with p^p_power * c S = f, or None; f has shape (m,).

        Returns (witness or None, precision, offending coordinate).
        """
        ring = f.ring
        p = ring.p
        x = f.normalize()
        if x.scale > 0:
            return None, x.certified, "value is not integral"
        x = x.integral()
        prec = x.prec
        pk = p**prec
        data = x.data % pk  # (m, L)
        Q = np.array([[int(v) % ring.mod for v in row] for row in self.Q], dtype=np.int64)
        g = _matmul_mod(data.T.copy(), Q, ring.mod).T % pk  # (m, L) in the Smith basis
        y = np.zeros((self.rows, data.shape[1]), dtype=np.int64)
        for i, d in enumerate(self.diag):
            if d == 0:
                if np.any(g[i] % pk):
                    return None, prec, f"coordinate {i} outside the image"
                continue
            v = vp(d, p) + p_power
            unit = d // p ** vp(d, p)
            if v >= prec:
                continue
            pv = p**v
            if np.any(g[i] % pv):
                return None, prec, f"coordinate {i} not divisible by p^{v}"
            y[i] = (g[i] // pv) * pow(unit % pk, -1, pk) % pk
        P = np.array([[int(v) % ring.mod for v in row] for row in self.P], dtype=np.int64)
        c = _matmul_mod(y.T.copy(), P, ring.mod).T % pk
        wit = ZArr(ring, c, 0, prec, x.lo, x.M)
        return wit, prec, None


def howell_solve(rows, target, p, k):
    """Decide target in the Z/p^k-span of ``rows`` (integer vectors mod p^k).

    Returns the coefficient vector (mod p^k) or None.  Uses echelon reduction
    with minimal-valuation pivots, adding p-power multiples of pivot rows so
    the span is represented completely (Howell property).
    """
    mod = p**k
    work = [(np.asarray(r, dtype=object) % mod, _unit_vec(len(rows), i)) for i, r in enumerate(rows)]
    ncols = len(target)
    pivots = []
    pool = work
    for col in range(ncols):
        cand = [(vp(int(r[col]) % mod, p, k), i) for i, (r, _) in enumerate(pool) if int(r[col]) % mod]
        if not cand:
            continue
        v, i = min(cand)
        prow, pcomb = pool.pop(i)
        unit = (int(prow[col]) // p**v) % mod
        uinv = pow(unit, -1, mod)
        prow = (prow * uinv) % mod
        pcomb = (pcomb * uinv) % mod
        rest = []
        for r, c in pool:
            if int(r[col]) % mod:
                f = (int(r[col]) // p**v) % mod
                r = (r - f * prow) % mod
                c = (c - f * pcomb) % mod
            rest.append((r, c))
        if v > 0:
            # p^(k-v) * pivot row has zero in this column but may be new
            rest.append(((prow * p ** (k - v)) % mod, (pcomb * p ** (k - v)) % mod))
        pool = rest
        pivots.append((col, v, prow, pcomb))
    resid = np.asarray(target, dtype=object) % mod
    comb = np.zeros(len(rows), dtype=object)
    for col, v, prow, pcomb in pivots:
        val = int(resid[col]) % mod
        if val % p**v:
            return None
        f = val // p**v
        resid = (resid - f * prow) % mod
        comb = (comb + f * pcomb) % mod
    if any(int(x) % mod for x in resid):
        return None
    return comb


def _unit_vec(n, i):
    v = np.zeros(n, dtype=object)
    v[i] = 1
    return v


# -- element wrappers ---------------------------------------------------------

class _Element:
    __slots__ = ("ctx", "alg", "value", "tag")

    def __init__(self, ctx, alg, value: ZArr, tag):
        self.ctx, self.alg, self.value, self.tag = ctx, alg, value, tag

    def _check(self, other):
        if not isinstance(other, type(self)) or other.tag != self.tag:
            raise InvalidInput("elements live in different rings")

    def _new(self, value):
        return type(self)(self.ctx, self.alg, value, self.tag)

    def __add__(self, other):
        self._check(other)
        return self._new(self.value + other.value)

    def __sub__(self, other):
        self._check(other)
        return self._new(self.value - other.value)

    def __neg__(self):
        return self._new(-self.value)

    def scaled(self, c: int):
        return self._new(self.value * int(c))

    @property
    def certified_precision(self):
        return self.value.certified

    def is_zero(self):
        return self.value.is_zero()

    def __eq__(self, other):
        if not isinstance(other, type(self)) or other.tag != self.tag:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None


class GroupRingElement(_Element):
    """Element of (O/p^k)[G_n] (or its B(Z) extension) in the R-basis."""

    def __init__(self, ctx, value, alg=None):
        super().__init__(ctx, ctx.G if alg is None else alg, value, ("G", value.ring))

    def _new(self, value):
        return GroupRingElement(self.ctx, value, self.alg)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scaled(other)
        self._check(other)
        return self._new(self.alg.mul(self.value, other.value))

    def __pow__(self, e):
        return self._new(self.alg.power(self.value, e))

    def inverse(self):
        return self._new(self.alg.inverse(self.value))

    @classmethod
    def group_element(cls, ctx, ring, h, a):
        r, m = ctx.group.split(h, a)
        return cls(ctx, ctx.G.basis(ring, int(r), int(m)))

    def to_vector(self):
        """Finite level: coefficient vector over element indices of G_n."""
        ring = self.value.ring
        nr = self.ctx.group.nr
        x = self.value.integral()
        out = np.zeros(nr * ring.pn, dtype=np.int64)
        for m in range(ring.pn):
            out[np.arange(nr) + nr * m] = x.data[:, m]
        return out

    @classmethod
    def from_vector(cls, ctx, ring, vec):
        nr = ctx.group.nr
        vec = np.asarray(vec, dtype=np.int64)
        data = np.stack([vec[np.arange(nr) + nr * m] for m in range(ring.pn)], axis=-1)
        return cls(ctx, ring.wrap(data))


class ConjClassElement(_Element):
    """Element of O[Conj(X)] (default X = G), coordinates over classes."""

    def __init__(self, ctx, value, X=None):
        X = ctx.lattice.g if X is None else ctx.sub(X)
        super().__init__(ctx, None, value, ("C", X.position, value.ring))
        self.alg = X

    def _new(self, value):
        return ConjClassElement(self.ctx, value, self.alg)

    @property
    def subgroup(self):
        return self.alg


class AbelianElement(_Element):
    """Element of Lambda(X/K) for an abelian section, coordinates over T."""

    def __init__(self, ctx, alg: AbelianAlgebra, value):
        super().__init__(ctx, alg, value, ("A", alg.name, value.ring))

    def _new(self, value):
        return AbelianElement(self.ctx, self.alg, value)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scaled(other)
        self._check(other)
        return self._new(self.alg.mul(self.value, other.value))

    def __pow__(self, e):
        return self._new(self.alg.power(self.value, e))

    def inverse(self):
        return self._new(self.alg.inverse(self.value))

    def to_smith(self):
        """Finite level: {Smith index: coefficient} for the nonzero coefficients."""
        sec = self.alg.section
        data = self.value.integral().data
        smith = sec.smith(self.ctx.n)
        out = {}
        for t in range(sec.size):
            for m in range(data.shape[-1]):
                c = int(data[t, m])
                if c:
                    out[smith.smith_index(t, m)] = c
        return dict(sorted(out.items()))

    @classmethod
    def from_smith(cls, ctx, alg, ring, coeffs):
        sec = alg.section
        smith = sec.smith(ctx.n)
        data = np.zeros((sec.size, ring.pn), dtype=np.int64)
        for idx, c in coeffs.items():
            t, m = smith.element_of[int(idx)]
            data[t, m] += int(c)
        return cls(ctx, alg, ring.wrap(data))


class ComponentTuple:
    """One element per subgroup of the lattice (keyed by lattice position)."""

    kind = "tuple"

    def __init__(self, ctx, components: dict):
        self.ctx = ctx
        self.components = dict(sorted(components.items()))

    def __getitem__(self, U):
        return self.components[self.ctx.sub(U).position]

    def __setitem__(self, U, value):
        self.components[self.ctx.sub(U).position] = value

    def __iter__(self):
        return iter(self.components.items())

    def __len__(self):
        return len(self.components)

    def copy(self):
        return type(self)(self.ctx, dict(self.components))

    @property
    def certified_precision(self):
        return min(v.certified_precision for v in self.components.values())


class AdditiveTuple(ComponentTuple):
    kind = "additive"

    def __add__(self, other):
        return AdditiveTuple(self.ctx, {k: v + other.components[k] for k, v in self})

    def __sub__(self, other):
        return AdditiveTuple(self.ctx, {k: v - other.components[k] for k, v in self})


class UnitTuple(ComponentTuple):
    kind = "unit"

    def __mul__(self, other):
        return UnitTuple(self.ctx, {k: v * other.components[k] for k, v in self})


# -- public operations ------------------------------------------------------

def conj_project(x: GroupRingElement) -> ConjClassElement:
    return ConjClassElement(x.ctx, x.ctx.conj_project_map()(x.value))


def class_of_group_element(ctx, ring, h, a) -> ConjClassElement:
    return conj_project(GroupRingElement.group_element(ctx, ring, h, a))


def trace(V, U, x: ConjClassElement) -> ConjClassElement:
    ctx = x.ctx
    V, U = ctx.sub(V), ctx.sub(U)
    if x.subgroup.position != V.position:
        raise InvalidInput("class element does not live on V")
    return ConjClassElement(ctx, ctx.trace_map(V, U)(x.value), U)


def pr_ab(x: ConjClassElement) -> AbelianElement:
    ctx = x.ctx
    U = x.subgroup
    return AbelianElement(ctx, ctx.ab(U), ctx.pr_ab_map(U)(x.value))


def sigma_U(f: AbelianElement, U) -> AbelianElement:
    ctx = f.ctx
    U = ctx.sub(U)
    if not U.is_abelian:
        raise InvalidInput(f"{U.label} is not abelian")
    return f._new(ctx.sigma_map(U)(f.value))


def sigma_UV(V, U, f: AbelianElement) -> AbelianElement:
    ctx = f.ctx
    return f._new(ctx.sigma_map(U, V)(f.value))


def eta_U(f: AbelianElement, U) -> AbelianElement:
    return f._new(f.ctx.eta_map(U)(f.value))


def phi_U(x, U=None):
    ctx = x.ctx
    if isinstance(x, ConjClassElement):
        return x._new(ctx.phi_class_map(x.subgroup)(x.value))
    U = ctx.sub(U) if U is not None else _owner(ctx, x.alg)
    return x._new(ctx.phi_ab_map(U)(x.value))


def _owner(ctx, alg):
    for U in ctx.subgroups:
        if ("ab", U.position) in ctx._cache and ctx._cache[("ab", U.position)] is alg:
            return U
    raise InvalidInput("cannot tell which subgroup the element belongs to")


def beta(f: ConjClassElement) -> AdditiveTuple:
    ctx = f.ctx
    comps = {}
    for U in ctx.subgroups:
        comps[U.position] = AbelianElement(ctx, ctx.ab(U), ctx.beta_map(U)(f.value))
    return AdditiveTuple(ctx, comps)


def pr_cyc(t: ComponentTuple) -> dict:
    ctx = t.ctx
    return {U.position: t.components[U.position] for U in ctx.lattice.cyclic}


def delta_section(cyc: dict, ctx=None) -> ConjClassElement:
    """sum_U delta_U(eta_U(a_U)) over U in C(G,Z); the result carries a scale."""
    acc = None
    for pos, a in sorted(cyc.items()):
        ctx = a.ctx
        m, v = ctx.delta_map(pos)
        term = m(ctx.eta_map(pos)(a.value)).div_p(v)
        acc = term if acc is None else acc + term
    out = ConjClassElement(ctx, acc.normalize())
    return out


def integral_class(x: ConjClassElement, what="class element") -> ConjClassElement:
    return x._new(x.value.integral(what))


class Membership:
    """Outcome of an image-membership test."""

    def __init__(self, member, witness, precision, reason=None):
        self.member = member
        self.witness = witness
        self.precision = precision
        self.reason = reason

    def __bool__(self):
        return bool(self.member)

    def to_json(self):
        out = {"member": bool(self.member), "certified_precision": int(self.precision)}
        if self.reason:
            out["reason"] = self.reason
        if self.witness is not None and isinstance(self.witness, AbelianElement) \
                and isinstance(self.witness.value.ring, FiniteZ):
            out["witness"] = {str(k): v for k, v in self.witness.to_smith().items()}
        return out


def sigma_membership(f: AbelianElement, U, V=None, p_power=0) -> Membership:
    """Is f in p^p_power * im(sigma^V_U) (V = N(U) by default)?  Witness is verified."""
    ctx = f.ctx
    solver = ctx.sigma_snf(U, V)
    wit, prec, reason = solver.solve(f.value, p_power)
    if wit is None:
        return Membership(False, None, prec, reason)
    w = f._new(wit)
    back = ctx.sigma_map(U, V)(wit) * (ctx.p**p_power)
    diff = (back - f.value.integral())
    if not diff.is_zero():
        raise PrecisionExhausted("membership witness failed verification")
    return Membership(True, w, prec)


def submodule_membership(f: AbelianElement, generators, p_power: int = 0) -> Membership:
    """Is f in p^p_power times the Z_p-span of ``generators``?  Linear algebra over Z/p^k."""
    x = f.value.integral()
    gens = [g.value.integral() for g in generators]
    k = min([x.prec] + [g.prec for g in gens])
    p = x.ring.p
    if not gens:
        return Membership(x.is_zero(), [], k)
    parts = stack([x] + gens)
    rows = [parts.data[i + 1].ravel() * p**p_power for i in range(len(gens))]
    target = parts.data[0].ravel()
    comb = howell_solve(rows, target, p, k)
    if comb is None:
        return Membership(False, None, k, "not in the span")
    return Membership(True, [int(c) for c in comb], k)
