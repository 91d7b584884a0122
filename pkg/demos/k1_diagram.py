"""The additive and multiplicative sides of K_1 for one random unit.

A seeded unit x of Lambda(G_1) is sent along both routes of the square

    x  --theta-->  (theta_U(x))_U  --scriptL-->  additive tuple
    x  --L------>  class element   --beta----->  additive tuple

and the two tuples are compared component by component.

Run: python demos/k1_diagram.py [seed]
"""

import sys

import numpy as np

from iwasawa_k1 import corpus
from iwasawa_k1.algebra import AlgebraContext, beta
from iwasawa_k1.group import FiniteQuotient
from iwasawa_k1.kone import random_unit, theta
from iwasawa_k1.logmap import LogContext, integral_log_L, omega, script_L
from iwasawa_k1.verify import check_A, check_M

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
ctx = AlgebraContext(FiniteQuotient(corpus.load("modular"), 1))
lc = LogContext(ctx, 5)
print(f"target precision k = {lc.k}; working digits K = {lc.K} "
      f"(augmentation ideal nilpotent of index {lc.nilpotence} mod p)")

x = random_unit(ctx, lc.ring(), np.random.default_rng(seed), digits=lc.k)
th = theta(x)
rep = check_M(th)
print(f"check_M(theta(x)): {'pass' if rep.passed else 'fail'} "
      f"({len(rep.entries)} conditions checked)")

L = integral_log_L(x)
print(f"omega(L(x)) = {omega(L)} (trivial, as L(x) comes from a unit)")

left, right = beta(L), script_L(th)
print(f"check_A(beta(L(x))): {'pass' if check_A(left).passed else 'fail'}")
for U, c in right:
    d = left[U].value - c.value
    print(f"  {ctx.sub(U).label}: beta(L) - scriptL(theta) = 0 ? {d.is_zero()}  "
          f"(certified to {d.certified} digits)")
