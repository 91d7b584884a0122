"""Algebraic laws checked on seeded random data."""

import numpy as np
from hypothesis import given, settings, strategies as st

from iwasawa_k1.algebra import GroupRingElement, beta, delta_section, pr_cyc
from iwasawa_k1.skewseries import SkewSeriesRing, from_group_ring, skew_mul, to_group_ring
from iwasawa_k1.verify import random_class_element
from iwasawa_k1.zring import FiniteZ, LaurentZ

from conftest import desk_group

seeds = st.integers(0, 2**32 - 1)
FEW = settings(max_examples=15, deadline=None)
K = 5
RING = FiniteZ(3, 1, K)


def _rand(desk, rng):
    return GroupRingElement(desk, RING.wrap(rng.integers(0, 3**K, size=(desk.group.nr, 3))))


@FEW
@given(seeds)
def test_group_ring_associative_and_distributive(desk, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (_rand(desk, rng) for _ in range(3))
    assert ((a * b) * c - a * (b * c)).is_zero()
    assert (a * (b + c) - (a * b + a * c)).is_zero()


@FEW
@given(seeds)
def test_augmentation_is_multiplicative(desk, seed):
    rng = np.random.default_rng(seed)
    a, b = _rand(desk, rng), _rand(desk, rng)
    aug = lambda x: int(x.value.data.sum()) % 3**K
    assert aug(a * b) == aug(a) * aug(b) % 3**K


@FEW
@given(seeds)
def test_laurent_product_commutative_and_associative(seed):
    rng = np.random.default_rng(seed)
    ring = LaurentZ(3, 4, 40, 8)
    a, b, c = (ring.wrap(rng.integers(0, 81, size=6), lo=int(rng.integers(-3, 3)))
               for _ in range(3))
    assert (a * b - b * a).trim().is_zero()
    assert ((a * b) * c - a * (b * c)).trim().is_zero()


@FEW
@given(seeds)
def test_laurent_inverse_of_unit_leading_term(seed):
    rng = np.random.default_rng(seed)
    ring = LaurentZ(3, 4, 40, 8)
    data = rng.integers(0, 81, size=5)
    data[0] = 1 + 3 * int(rng.integers(0, 27))
    a = ring.wrap(data, lo=int(rng.integers(-2, 3)))
    prod = (a * ring.inverse(a) - ring.ones()).trim()
    assert prod.is_zero()


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_skew_polynomials_associative(seed):
    rng = np.random.default_rng(seed)
    ring = SkewSeriesRing(desk_group(), 4, window=(0, 9))
    a, b, c = (ring.random(rng, window=(0, 2)) for _ in range(3))
    assert skew_mul(skew_mul(a, b), c) == skew_mul(a, skew_mul(b, c))
    assert skew_mul(a, b + c) == skew_mul(a, b) + skew_mul(a, c)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_group_ring_transport_is_multiplicative(desk, seed):
    rng = np.random.default_rng(seed)
    ring = SkewSeriesRing(desk_group(), K, window=(0, 20))
    x = from_group_ring(_rand(desk, rng), ring)
    y = from_group_ring(_rand(desk, rng), ring)
    lhs = to_group_ring(skew_mul(x, y), desk, RING)
    rhs = to_group_ring(x, desk, RING) * to_group_ring(y, desk, RING)
    assert (lhs - rhs).is_zero()


@FEW
@given(seeds)
def test_beta_is_additive_and_inverted_by_delta(desk, seed):
    rng = np.random.default_rng(seed)
    f = random_class_element(desk, RING, rng)
    g = random_class_element(desk, RING, rng)
    bf, bg, bfg = beta(f), beta(g), beta(f + g)
    for U, c in bfg:
        assert (c - bf[U] - bg[U]).is_zero()
    assert (delta_section(pr_cyc(bf)) - f).is_zero()
