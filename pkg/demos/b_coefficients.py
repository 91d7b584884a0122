"""The same square with coefficients in B(Z), for a unit that is not in Lambda(G).

A random skew Laurent polynomial x in t = gamma - 1 (degrees -4..8) with a unit
coefficient is a unit of B(G).  It is transported to B(Z)-coefficients and both
routes are compared at t_Z-degree 8.  Takes several seconds.

Run: python demos/b_coefficients.py [seed]
"""

import sys

import numpy as np

from iwasawa_k1 import corpus
from iwasawa_k1.algebra import AlgebraContext
from iwasawa_k1.group import FiniteQuotient
from iwasawa_k1.kone import theta
from iwasawa_k1.logmap import LogContext, integral_log_LB, script_L
from iwasawa_k1.skewseries import (B_EXTRA_DIGITS, B_WEIGHTS, B_WINDOW, SkewSeriesRing,
                                   beta_B, random_B_unit, to_B)

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
group = corpus.load("modular")
ctx = AlgebraContext(FiniteQuotient(group, 1))
lc = LogContext(ctx, 5)
sring = SkewSeriesRing(group, lc.K, window=B_WINDOW)
x = random_B_unit(sring, np.random.default_rng(seed), digits=lc.k)
print(f"x has t-degrees {x.lo}..{x.hi}; lowest unit coefficient at degree "
      f"{x.lowest_unit_degree()}")

D = B_WEIGHTS[0]
lring = lc.laurent_ring(D=D, M=D * (lc.K + B_EXTRA_DIGITS))
xB = to_B(x, ctx, lring)
lhs = script_L(theta(xB))
rhs = beta_B(integral_log_LB(xB))
for U, c in lhs:
    d = rhs[U].value - c.value
    print(f"  {ctx.sub(U).label}: equal = {d.is_zero()}, digits certified at degree {B_WINDOW[1]}: "
          f"{d.certified_digits_at(B_WINDOW[1])}")
