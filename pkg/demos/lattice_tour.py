"""Walk through the subgroup lattice of G_1 for the group Z/9 x| Z_3 (gamma: h -> 4h).

Run: python demos/lattice_tour.py
"""

from iwasawa_k1 import corpus
from iwasawa_k1.algebra import AlgebraContext
from iwasawa_k1.group import FiniteQuotient, verlagerung

group = corpus.load("modular")
quotient = FiniteQuotient(group, 1)
ctx = AlgebraContext(quotient)
lat = quotient.lattice
G = lat.g

print(f"|G_1| = {quotient.order}, {len(lat)} subgroups contain Z, "
      f"{len(lat.cyclic)} of them are cyclic modulo Z")
print(f"conjugacy classes of G_1: {ctx.classes().size}\n")
print(f"{'label':6} {'|U|':>4} {'[G:U]':>6} {'cyclic/Z':>9} {'abelian':>8} {'|U^ab|':>7}")
for U in lat:
    print(f"{U.label:6} {len(U.members):4d} {len(G.r) // len(U.r):6d} "
          f"{str(U.is_cyclic_mod_z):>9} {str(U.is_abelian):>8} "
          f"{U.abelianization.size * quotient.pn:7d}")

print("\nTransfer of gamma into each subgroup (T-position, z-exponent):")
for U in lat:
    print(f"  ver^G_{U.label}(gamma) = {verlagerung(G, U, (0, 1))}")
