"""Independent brute-force reference implementations used by the tests.

Everything here works on plain Python integers and tuples, built directly
from the group definition (multiplication table of H and the gamma action)
without touching the package's indexing or cached tables.
"""

from itertools import product


class BruteGroup:
    """G / Z^(p^n) as pairs (h, a mod p^(e+n))."""

    def __init__(self, gdef, n):
        self.p, self.e = gdef.p, gdef.e
        self.table = [list(map(int, row)) for row in gdef.table]
        self.act = [int(x) for x in gdef.action]
        self.nh = len(self.table)
        self.period = self.p ** (self.e + n)
        self.elements = [(h, a) for a in range(self.period) for h in range(self.nh)]

    def gamma_pow(self, a, h):
        for _ in range(a % (self.p**self.e) if self.e else 0):
            h = self.act[h]
        return h

    def mul(self, x, y):
        (h1, a1), (h2, a2) = x, y
        return self.table[h1][self.gamma_pow(a1, h2)], (a1 + a2) % self.period

    def inv(self, x):
        for y in self.elements:
            if self.mul(x, y) == (0, 0):
                return y
        raise AssertionError("no inverse")

    def index(self, x):
        """The package's element numbering h + |H| a (used only to compare results)."""
        return x[0] + self.nh * x[1]

    def closure(self, gens):
        """Subgroup generated by ``gens`` (finite group: closed under right
        multiplication by the generators)."""
        gens = list(gens)
        sub = {(0, 0)}
        frontier = [(0, 0)]
        while frontier:
            s = frontier.pop()
            for g in gens:
                c = self.mul(s, g)
                if c not in sub:
                    sub.add(c)
                    frontier.append(c)
        return frozenset(sub)

    def z(self):
        return (0, self.p**self.e % self.period)

    def subgroups_containing_z(self, max_gens=2):
        """All subgroups containing z generated by z and at most ``max_gens`` elements."""
        z = self.z()
        found = {self.closure([z])}
        for k in range(1, max_gens + 1):
            for gens in product(self.elements, repeat=k):
                found.add(self.closure([z, *gens]))
        return found

    def all_subgroups(self, max_gens=2):
        found = {frozenset({(0, 0)})}
        for k in range(1, max_gens + 1):
            for gens in product(self.elements, repeat=k):
                found.add(self.closure(list(gens)))
        return found

    def conj(self, g, x):
        return self.mul(self.mul(g, x), self.inv(g))

    def conjugacy_classes(self):
        seen, classes = set(), []
        for x in self.elements:
            if x in seen:
                continue
            orbit = {self.conj(g, x) for g in self.elements}
            seen |= orbit
            classes.append(frozenset(orbit))
        return classes

    def commutator_subgroup(self, members=None):
        members = self.elements if members is None else list(members)
        comms = [self.mul(self.mul(x, y), self.mul(self.inv(x), self.inv(y)))
                 for x in members for y in members]
        return self.closure(comms)


def commutator_components(bg):
    """Connected components of the graph with an edge gh -- hg for all g, h.

    The Z/p^k-span of {gh - hg} is exactly the set of vectors whose sum over
    each component vanishes.
    """
    parent = {x: x for x in bg.elements}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in bg.elements:
        for h in bg.elements:
            a, b = find(bg.mul(g, h)), find(bg.mul(h, g))
            if a != b:
                parent[a] = b
    comps = {}
    for x in bg.elements:
        comps.setdefault(find(x), set()).add(x)
    return [frozenset(c) for c in comps.values()]


def group_ring_mul(bg, x, y, mod):
    """Product of {element: coeff} dictionaries in (Z/mod)[G_n]."""
    out = {}
    for g, a in x.items():
        for h, b in y.items():
            k = bg.mul(g, h)
            out[k] = (out.get(k, 0) + a * b) % mod
    return {k: v for k, v in out.items() if v}


def transfer(bg, V, U, g, transversal=None):
    """ver^V_U(g) modulo [U, U], via left coset representatives of U in V.

    Returns the coset of the product inside U / [U, U] as a frozenset.
    """
    V, U = set(V), set(U)
    if transversal is None:
        reps, covered = [], set()
        for s in sorted(V, key=lambda x: (x[1], x[0]), reverse=True):
            if s in covered:
                continue
            reps.append(s)
            covered |= {bg.mul(s, u) for u in U}
    else:
        reps = list(transversal)
    comm = bg.commutator_subgroup(U)
    acc = (0, 0)
    for s in reps:
        x = bg.mul(g, s)
        t = next(r for r in reps if bg.mul(bg.inv(r), x) in U)
        acc = bg.mul(acc, bg.mul(bg.inv(t), x))
    return frozenset(bg.mul(acc, c) for c in comm)


def scalar_log_one_plus(x, p, k, terms=200):
    """log(1 + x) in Q_p for x divisible by p, as an exact fraction mod p^k."""
    from fractions import Fraction
    acc = Fraction(0)
    for j in range(1, terms):
        acc += Fraction((-1) ** (j + 1) * x**j, j)
    return acc
