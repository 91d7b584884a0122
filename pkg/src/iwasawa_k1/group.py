"""Semidirect products G = H x| Gamma, their finite quotients and subgroup data.

An element of G is a pair (h, a) with h an index into the table of H and a an
integer exponent of gamma.  Z = Gamma^(p^e) is central, so every element
factors uniquely as r * z^m with r in the transversal

    R = {(h, j) : 0 <= j < p^e},      R-index of (h, j) = h + |H| * j,

and m an integer.  All lattice data (cosets, abelianizations, cocycles) is
computed on R-indices with exact integer z-exponents, so it is shared by every
finite level and by the Laurent (B) coefficients.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp

from .coeff import is_prime
from .errors import H3Violation, InvalidInput, NotSubgroup


class GroupDefinition:
    """H (multiplication table), the action of gamma on H, p and e."""

    def __init__(self, p, e, h_table, gamma_action, label=""):
        self.label = label
        if not isinstance(p, int) or not is_prime(p):
            raise InvalidInput(f"p={p} is not a prime")
        if p == 2:
            raise InvalidInput("p = 2 is excluded by (H4): p must be odd")
        if e < 0:
            raise InvalidInput("e must be nonnegative")
        table = np.asarray(h_table, dtype=np.int64)
        nh = table.shape[0]
        if table.ndim != 2 or table.shape != (nh, nh) or nh == 0:
            raise InvalidInput("h_table must be a square table")
        order = nh
        while order % p == 0:
            order //= p
        if order != 1:
            raise InvalidInput(f"|H| = {nh} is not a power of p = {p}")
        if table.min() < 0 or table.max() >= nh:
            raise InvalidInput("h_table entries out of range")
        ar = np.arange(nh)
        if not (np.array_equal(table[0], ar) and np.array_equal(table[:, 0], ar)):
            raise InvalidInput("index 0 of h_table must be the identity")
        if any(len(set(row)) != nh for row in table.tolist()) or any(
                len(set(col)) != nh for col in table.T.tolist()):
            raise InvalidInput("h_table is not a Latin square")
        if not np.array_equal(table[table[:, :, None], ar[None, None, :]],
                              table[ar[:, None, None], table[None, :, :]]):
            raise InvalidInput("h_table is not associative")
        act = np.asarray(gamma_action, dtype=np.int64)
        if act.shape != (nh,) or sorted(act.tolist()) != list(range(nh)):
            raise InvalidInput("gamma_action must be a permutation of H")
        if not np.array_equal(act[table], table[act[:, None], act[None, :]]):
            raise InvalidInput("gamma_action is not an automorphism of H")
        pe = p**e
        pw = [ar]
        for _ in range(pe):
            pw.append(act[pw[-1]])
        if not np.array_equal(pw[pe], ar):
            raise InvalidInput("gamma_action^(p^e) is not the identity, so Z is not central (H1)")
        self.p, self.e, self.pe = p, e, pe
        self.nh = nh
        self.table = table
        self.action = act
        self.act_pow = np.array(pw[:pe])
        self.hinv = np.array([int(np.nonzero(table[h] == 0)[0][0]) for h in range(nh)])
        self.nr = nh * pe

    # -- infinite model -------------------------------------------------
    def mul(self, h1, a1, h2, a2):
        """Product in G of (h1, a1) and (h2, a2); works elementwise on arrays."""
        return self.table[h1, self.act_pow[np.mod(a1, self.pe), h2]], a1 + a2

    def inv(self, h, a):
        return self.act_pow[np.mod(-a, self.pe), self.hinv[h]], -a

    def split(self, h, a):
        """(h, a) -> (R-index, z-exponent)."""
        return h + self.nh * np.mod(a, self.pe), np.floor_divide(a, self.pe)

    def rep(self, r):
        """R-index -> (h, j)."""
        return r % self.nh, r // self.nh

    @cached_property
    def r_mul(self):
        """Tables (q, c) with r * s = q * z^c for R-indices r, s; c is 0 or 1."""
        r = np.arange(self.nr)
        h, a = self.rep(r)
        ph, pa = self.mul(h[:, None], a[:, None], h[None, :], a[None, :])
        return self.split(ph, pa)

    @cached_property
    def r_conj(self):
        """c[g, r] = g r g^-1 as an R-index (the exponent is preserved, no z-part)."""
        r = np.arange(self.nr)
        h, a = self.rep(r)
        gh, ga = h[:, None], a[:, None]
        xh, xa = self.mul(gh, ga, h[None, :], a[None, :])
        ih, ia = self.inv(gh, ga)
        ch, ca = self.mul(xh, xa, ih, ia)
        q, m = self.split(ch, ca)
        if np.any(m != 0):
            raise H3Violation("conjugation does not preserve the transversal R")
        return q

    def r_power(self, r, m: int):
        """r^m as (R-index, z-exponent) for an R-index r and integer m >= 0."""
        h, a = self.rep(r)
        rh, ra = 0, 0
        for _ in range(m):
            rh, ra = self.mul(rh, ra, h, a)
        q, c = self.split(rh, ra)
        return int(q), int(c)

    def to_text(self) -> str:
        lines = []
        if self.label:
            lines.append(f"label: {self.label}")
        lines.append(f"p: {self.p}")
        lines.append(f"e: {self.e}")
        lines.append("h_table:")
        for row in self.table.tolist():
            lines.append("  " + " ".join(str(x) for x in row))
        lines.append("gamma_action: " + " ".join(str(x) for x in self.action.tolist()))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> GroupDefinition:
        fields, current = {}, None
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            if line.startswith((" ", "\t")):
                if current is None:
                    raise InvalidInput(f"unexpected indented line: {raw!r}")
                fields[current].append(line.split())
                continue
            if ":" not in line:
                raise InvalidInput(f"cannot parse line: {raw!r}")
            key, value = (s.strip() for s in line.split(":", 1))
            current = key
            fields[key] = [value.split()] if value else []
        try:
            p = int(fields["p"][0][0])
            e = int(fields["e"][0][0])
            rows = [[int(x) for x in row] for row in fields["h_table"]]
            action = [int(x) for row in fields["gamma_action"] for x in row]
        except (KeyError, IndexError, ValueError) as exc:
            raise InvalidInput(f"group file incomplete or malformed: {exc}") from None
        label = " ".join(fields["label"][0]) if fields.get("label") else ""
        return cls(p, e, rows, action, label)


def cyclic_table(m: int):
    a = np.arange(m)
    return (a[:, None] + a[None, :]) % m


def semidirect_cyclic(p: int, pk: int, mult: int, e: int, label="") -> GroupDefinition:
    """H = Z/pk with gamma acting by h -> mult * h."""
    action = [(mult * h) % pk for h in range(pk)]
    return GroupDefinition(p, e, cyclic_table(pk), action, label)


def load_group(path) -> GroupDefinition:
    with open(path, encoding="utf-8") as fh:
        return GroupDefinition.from_text(fh.read())


class FiniteQuotient:
    """G / Z^(p^n): elements (h, a mod p^(e+n)), index h + |H| * a."""

    def __init__(self, group: GroupDefinition, n: int):
        if n < 0:
            raise InvalidInput("level n must be nonnegative")
        self.group = group
        self.n = n
        self.pn = group.p**n
        self.period = group.pe * self.pn
        self.order = group.nh * self.period
        idx = np.arange(self.order)
        self.h_of = idx % group.nh
        self.a_of = idx // group.nh
        ph, pa = group.mul(self.h_of[:, None], self.a_of[:, None],
                           self.h_of[None, :], self.a_of[None, :])
        self.table = ph + group.nh * np.mod(pa, self.period)
        ih, ia = group.inv(self.h_of, self.a_of)
        self.inverse = ih + group.nh * np.mod(ia, self.period)
        self.z = self.index(0, group.pe)
        self.z_mask = np.zeros(self.order, dtype=bool)
        self.z_mask[[self.index(0, group.pe * m) for m in range(self.pn)]] = True

    def index(self, h, a):
        return int(h) + self.group.nh * (int(a) % self.period)

    def split(self, idx):
        """element index -> (R-index, m)."""
        return idx % self.group.nr, idx // self.group.nr

    def project(self, idx, n: int):
        """Image in the quotient of level n <= self.n."""
        lower = self.group.nh * self.group.pe * self.group.p**n
        return np.mod(idx, lower)

    def closure(self, gens, start=None):
        mask = np.zeros(self.order, dtype=bool) if start is None else start.copy()
        mask[0] = True
        gens = [int(g) for g in gens]
        mask[gens] = True
        while True:
            cur = np.nonzero(mask)[0]
            new = mask.copy()
            new[self.table[np.ix_(cur, np.nonzero(mask)[0])].ravel()] = True
            if np.array_equal(new, mask):
                return mask
            mask = new

    @cached_property
    def lattice(self) -> SubgroupLattice:
        return SubgroupLattice(self)


def conjugacy_classes(quotient: FiniteQuotient, members=None):
    """Orbits under conjugation by ``members`` (default: the whole quotient).

    Returns (class_of, reps): the class index of each element of the set and
    the minimal element index of each class, in increasing order.
    """
    table, inv = quotient.table, quotient.inverse
    elems = np.arange(quotient.order) if members is None else np.asarray(members)
    conj = table[table[elems[:, None], elems[None, :]], inv[elems][:, None]]
    # conj[g, x] = g x g^-1 for g, x in elems
    cls = {}
    reps = []
    for x in elems.tolist():
        if x in cls:
            continue
        orbit = set(conj[:, np.searchsorted(elems, x)].tolist())
        c = len(reps)
        reps.append(min(orbit))
        for y in orbit:
            cls[y] = c
    order = np.argsort(reps)
    rank = np.empty(len(reps), dtype=np.int64)
    rank[order] = np.arange(len(reps))
    class_of = {x: int(rank[c]) for x, c in cls.items()}
    return class_of, sorted(reps)


def check_H3(quotient_or_group) -> list:
    """Return R as R-indices after checking it is a conjugation-closed transversal of G/Z."""
    group = getattr(quotient_or_group, "group", quotient_or_group)
    r = list(range(group.nr))
    conj = group.r_conj  # raises H3Violation on failure
    if not np.all(np.isin(conj, r)) or 0 not in r:
        raise H3Violation("R is not closed under conjugation")
    return r


class AbelianSection:
    """The abelian group X / K with Z central, written as T x Z with a cocycle.

    X is given by its R-indices, K is a subgroup of H (R-indices with j = 0)
    normal in X with X/K abelian.  T is the set of minimal R-indices of the
    cosets of K*Z in X.  The product of T-elements is t_i t_j = t_mt[i,j] z^cz[i,j].
    """

    def __init__(self, group: GroupDefinition, x_r, k_r):
        self.group = group
        self.x_r = np.array(sorted(int(v) for v in x_r))
        self.k_r = np.array(sorted(int(v) for v in k_r))
        q, _ = group.r_mul
        pos = np.full(group.nr, -1, dtype=np.int64)
        reps = []
        for r in self.x_r.tolist():
            if pos[r] >= 0:
                continue
            coset = q[r, self.k_r]
            pos[coset] = len(reps)
            reps.append(r)
        self.t = np.array(reps)
        self.pos = pos
        self.size = len(reps)
        rq, rc = group.r_mul
        sub_q = rq[np.ix_(self.t, self.t)]
        self.mt = pos[sub_q]
        self.cz = rc[np.ix_(self.t, self.t)]
        if np.any(self.mt < 0):
            raise NotSubgroup("X is not closed under multiplication")
        if not np.array_equal(self.mt, self.mt.T) or not np.array_equal(self.cz, self.cz.T):
            raise InvalidInput("X/K is not abelian")
        self.identity = int(pos[0])

    def contains(self, r) -> bool:
        return bool(self.pos[r] >= 0)

    def reduce(self, r, m=0):
        """(R-index, z-exponent) -> (T-position, z-exponent)."""
        t = self.pos[r]
        if np.any(t < 0):
            raise NotSubgroup("element does not lie in the section")
        return t, m

    def reduce_element(self, h, a):
        r, m = self.group.split(h, a)
        return self.reduce(r, m)

    def mul(self, i, m1, j, m2):
        return self.mt[i, j], m1 + m2 + self.cz[i, j]

    def power(self, i, m, e: int):
        ti, tm = self.identity, 0
        for _ in range(e):
            ti, tm = self.mul(ti, tm, i, m)
        return int(ti), int(tm)

    def smith(self, n: int) -> AbelianizationData:
        cache = self.__dict__.setdefault("_smith", {})
        if n not in cache:
            cache[n] = AbelianizationData(self, n)
        return cache[n]


class AbelianizationData:
    """Smith coordinates for the finite abelian group (X/K) / Z^(p^n)."""

    def __init__(self, section: AbelianSection, n: int):
        self.section = section
        self.n = n
        p = section.group.p
        pn = p**n
        s = section.size
        rows = []
        for i in range(s):
            for j in range(i, s):
                row = [0] * (s + 1)
                row[i] += 1
                row[j] += 1
                row[section.mt[i, j]] -= 1
                row[s] -= int(section.cz[i, j])
                rows.append(row)
        ident = [0] * (s + 1)
        ident[section.identity] = 1
        rows.append(ident)
        zrow = [0] * (s + 1)
        zrow[s] = pn
        rows.append(zrow)
        rel = Matrix(rows)
        smith, left, right = smith_normal_decomp(rel)
        diag = [abs(int(smith[i, i])) for i in range(min(smith.shape))]
        diag += [0] * (s + 1 - len(diag))
        keep = [i for i, d in enumerate(diag) if d != 1]
        if any(diag[i] == 0 for i in keep):
            raise InvalidInput("abelianization is not finite")
        q = np.array(right.tolist(), dtype=object)
        self.invariants = [diag[i] for i in keep]
        self._cols = keep
        self._q = q
        self.order = s * pn
        radix = [1]
        for d in self.invariants[:-1]:
            radix.append(radix[-1] * d)
        self._radix = radix
        # index tables (T-position, m) <-> Smith index
        self.index_of = np.zeros((s, pn), dtype=np.int64)
        for t in range(s):
            for m in range(pn):
                self.index_of[t, m] = self._index(self.coordinates(t, m))
        flat = self.index_of.ravel()
        if len(set(flat.tolist())) != self.order:
            raise InvalidInput("Smith coordinates are not a bijection")
        self.element_of = np.zeros((self.order, 2), dtype=np.int64)
        for t in range(s):
            for m in range(pn):
                self.element_of[self.index_of[t, m]] = (t, m)

    def coordinates(self, t, m):
        s = self.section.size
        v = [0] * (s + 1)
        v[t] += 1
        v[s] += m
        w = [sum(v[r] * self._q[r, c] for r in range(s + 1)) for c in self._cols]
        return tuple(int(x) % d for x, d in zip(w, self.invariants))

    def _index(self, coords):
        return int(sum(c * r for c, r in zip(coords, self._radix)))

    def smith_index(self, t, m):
        return int(self.index_of[t, m % (self.section.group.p**self.n)])


class SubgroupHandle:
    """A subgroup Z <= U <= G at a given level, with cached structure."""

    def __init__(self, quotient: FiniteQuotient, mask):
        self.quotient = quotient
        self.group = quotient.group
        self.mask = mask
        self.members = np.nonzero(mask)[0]
        self.order = len(self.members)
        self.r = self.members[self.members < self.group.nr]  # U cap R, a transversal of U/Z
        self.index = self.group.nr // len(self.r)
        self.label = ""
        self.position = -1

    def __repr__(self):
        return f"SubgroupHandle({self.label or '?'}, order={self.order})"

    def __contains__(self, idx):
        return bool(self.mask[idx])

    def contains_r(self, r) -> bool:
        return bool(self.mask[r])

    @cached_property
    def r_set(self):
        return frozenset(self.r.tolist())

    def key(self):
        return self.mask.tobytes()

    @cached_property
    def commutator_r(self):
        """[U, U] as R-indices (a subgroup of H)."""
        g = self.group
        h, a = g.rep(self.r)
        xh, xa = g.mul(h[:, None], a[:, None], h[None, :], a[None, :])
        ih, ia = g.inv(h, a)
        yh, ya = g.mul(xh, xa, ih[:, None], ia[:, None])
        ch, ca = g.mul(yh, ya, ih[None, :], ia[None, :])
        if np.any(ca != 0):
            raise H3Violation("commutators must lie in H")
        q, _ = g.r_mul
        gens = set(ch.ravel().tolist())
        sub = {0}
        frontier = list(sub)
        while frontier:
            nxt = []
            for x in frontier:
                for y in gens:
                    w = int(q[x, y])
                    if w not in sub:
                        sub.add(w)
                        nxt.append(w)
            frontier = nxt
        return np.array(sorted(sub))

    @property
    def is_abelian(self) -> bool:
        return len(self.commutator_r) == 1

    @cached_property
    def normalizer_r(self):
        conj = self.group.r_conj
        s = self.r_set
        return np.array([g for g in range(self.group.nr)
                         if frozenset(conj[g, self.r].tolist()) == s])

    @cached_property
    def normalizer_mask(self):
        mask = np.zeros(self.quotient.order, dtype=bool)
        for m in range(self.quotient.pn):
            mask[self.normalizer_r + self.group.nr * m] = True
        return mask

    @cached_property
    def weyl_r(self):
        """Transversal of W(U) = N(U)/U as R-indices (minimal element of each coset)."""
        return self.left_coset_reps(self.normalizer_r)

    def left_coset_reps(self, within_r=None):
        """Minimal representatives s of the cosets sU inside ``within_r`` (default G)."""
        q, _ = self.group.r_mul
        within = range(self.group.nr) if within_r is None else within_r
        seen = set()
        reps = []
        for s in sorted(int(x) for x in within):
            if s in seen:
                continue
            reps.append(s)
            seen.update(q[s, self.r].tolist())
        return np.array(reps)

    def right_coset_reps(self, within_r=None):
        """Minimal representatives s of the cosets Us inside ``within_r`` (default G)."""
        q, _ = self.group.r_mul
        within = range(self.group.nr) if within_r is None else within_r
        seen = set()
        reps = []
        for s in sorted(int(x) for x in within):
            if s in seen:
                continue
            reps.append(s)
            seen.update(q[self.r, s].tolist())
        return np.array(reps)

    @cached_property
    def abelianization(self) -> AbelianSection:
        return AbelianSection(self.group, self.r, self.commutator_r)

    @cached_property
    def smith(self) -> AbelianizationData:
        return self.abelianization.smith(self.quotient.n)

    @cached_property
    def is_cyclic_mod_z(self) -> bool:
        return self.cyclic_generator is not None

    @cached_property
    def cyclic_generator(self):
        """Minimal R-index generating U/Z, or None."""
        q, _ = self.group.r_mul
        size = len(self.r)
        for g in self.r.tolist():
            x, count = g, 1
            while x != 0:
                x = int(q[x, g])
                count += 1
            if count == size:
                return g
        return None

    def is_subgroup_of(self, other) -> bool:
        return bool(np.all(other.mask[self.members]))

    def is_normal_in(self, other) -> bool:
        conj = self.group.r_conj
        return all(frozenset(conj[g, self.r].tolist()) == self.r_set for g in other.r.tolist())


def commutator_subgroup(U: SubgroupHandle):
    """[U, U] as a list of H-indices."""
    return U.commutator_r.tolist()


class SubgroupLattice:
    """S(G, Z) at one level, with C(G, Z), conjugation action and P(V), P_c(V)."""

    def __init__(self, quotient: FiniteQuotient):
        self.quotient = quotient
        self.group = quotient.group
        nr = self.group.nr
        found = {}
        start = quotient.closure([quotient.z])
        frontier = [start]
        found[start.tobytes()] = start
        while frontier:
            nxt = []
            for mask in frontier:
                for r in range(nr):
                    if mask[r]:
                        continue
                    new = quotient.closure([r], mask)
                    key = new.tobytes()
                    if key not in found:
                        found[key] = new
                        nxt.append(new)
            frontier = nxt
        handles = [SubgroupHandle(quotient, m) for m in found.values()]
        handles.sort(key=lambda u: (u.order, tuple(u.r.tolist())))
        for i, u in enumerate(handles):
            u.label = f"U{i}"
            u.position = i
        self.subgroups = handles
        self.by_key = {u.key(): u for u in handles}
        self.z = handles[0]
        self.g = handles[-1]
        self.by_r = {u.r_set: u for u in handles}

    def __iter__(self):
        return iter(self.subgroups)

    def __len__(self):
        return len(self.subgroups)

    def __getitem__(self, i):
        return self.subgroups[i]

    def find(self, r_elements) -> SubgroupHandle:
        return self.by_r[frozenset(int(x) for x in r_elements)]

    def by_label(self, label):
        for u in self.subgroups:
            if u.label == label:
                return u
        raise KeyError(label)

    @cached_property
    def cyclic(self):
        return [u for u in self.subgroups if u.is_cyclic_mod_z]

    def conjugate(self, g, U: SubgroupHandle) -> SubgroupHandle:
        """gUg^-1 for an R-index g."""
        return self.find(self.group.r_conj[g, U.r])

    def contained(self, U, V) -> bool:
        return U.r_set <= V.r_set

    @cached_property
    def prime_sub(self):
        """W -> W' for W in C(G,Z), W != Z (unique index-p subgroup containing Z)."""
        out = {}
        for w in self.cyclic:
            if w is self.z:
                continue
            gen = w.cyclic_generator
            q, _ = self.group.r_power(gen, self.group.p)
            sub = self.quotient.closure([q], self.z.mask)
            out[w.position] = self.by_key[sub.tobytes()]
        return out

    def P(self, V):
        return [w for w in self.cyclic if w is not self.z
                and self.contained(self.prime_sub[w.position], V)]

    def P_c(self, V):
        return [w for w in self.cyclic
                if self.contained(V, w) and w.index * self.group.p == V.index]

    def sections(self, U, V) -> AbelianSection:
        """U / [V, V] for [V, V] <= U <= V."""
        return AbelianSection(self.group, U.r, V.commutator_r)


def enumerate_S(quotient: FiniteQuotient):
    """All subgroups of the quotient containing the image of Z."""
    return quotient.lattice.subgroups


def verlagerung(V: SubgroupHandle, U: SubgroupHandle, g):
    """Transfer V -> U^ab of an element g = (h, a) of V.

    Returns (T-position in U^ab, integer z-exponent).  ``g`` may also be an
    R-index.  The transversal used is the set of minimal left coset
    representatives unless ``transversal`` is supplied.
    """
    return _verlagerung(V, U, g, None)


def _verlagerung(V, U, g, transversal):
    group = V.group
    if not U.r_set <= V.r_set:
        raise NotSubgroup(f"{U.label} is not contained in {V.label}")
    if isinstance(g, (int, np.integer)):
        gh, ga = group.rep(int(g))
    else:
        gh, ga = g
    reps = U.left_coset_reps(V.r) if transversal is None else transversal
    sec = U.abelianization
    q, _ = group.r_mul
    coset_of = {}
    for j, s in enumerate(reps):
        for u in U.r.tolist():
            coset_of[int(q[s, u])] = j
    acc_t, acc_m = sec.identity, 0
    rep_elems = [group.rep(int(s)) for s in reps]
    for sh, sa in rep_elems:
        xh, xa = group.mul(gh, ga, sh, sa)
        xr, _ = group.split(xh, xa)
        j = coset_of[int(xr)]
        th, ta = rep_elems[j]
        ih, ia = group.inv(th, ta)
        ch, ca = group.mul(ih, ia, xh, xa)
        cr, cm = group.split(ch, ca)
        t = int(sec.pos[int(cr)])
        if t < 0:
            raise NotSubgroup("cocycle value outside U")
        acc_t, acc_m = sec.mul(acc_t, acc_m, t, int(cm))
        acc_t, acc_m = int(acc_t), int(acc_m)
    return acc_t, acc_m
