import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iwasawa_k1.coeff import (CoefficientRing, default_modulus, divide_by_p_power, frobenius,
                              is_irreducible_mod_p, is_prime, teichmuller, vp)
from iwasawa_k1.errors import InvalidInput, NotAUnit, NotDivisible


def test_frobenius_is_identity_for_f1():
    R = CoefficientRing(3, 2)
    assert frobenius(R.element(5)).coords == (5,)
    assert frobenius(R.zero()).coords == (0,)
    assert frobenius(R.one()).coords == (1,)


def _newton_frobenius_oracle(R):
    """Independent Hensel lift of x^p: iterate y <- y - m(y)/m'(y) with plain lists."""
    p, mod, poly = R.p, R.mod, R.modulus
    f = R.f

    def mul(a, b):
        prod = [0] * (2 * f - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % mod
        for d in range(len(prod) - 1, f - 1, -1):
            c = prod[d]
            if c:
                for i in range(f + 1):
                    prod[d - f + i] = (prod[d - f + i] - c * poly[i]) % mod
        return (prod + [0] * f)[:f]

    def ev(coeffs, y):
        acc = [0] * f
        for c in reversed(coeffs):
            acc = mul(acc, y)
            acc[0] = (acc[0] + c) % mod
        return acc

    x = [0, 1] + [0] * (f - 2)
    y = [1] + [0] * (f - 1)
    for _ in range(p):
        y = mul(y, x)
    der = [i * c for i, c in enumerate(poly)][1:]
    for _ in range(2 * R.k + 2):
        val, dv = ev(poly, y), ev(der, y)
        inv = R.element(dv).inverse().coords
        y = [(a - b) % mod for a, b in zip(y, mul(val, list(inv)))]
    return tuple(y)


def test_frobenius_f2_matches_newton_oracle_and_is_an_involution():
    R = CoefficientRing(3, 6, f=2)
    x = R.generator()
    fx = frobenius(x)
    assert fx.coords == _newton_frobenius_oracle(R)
    assert frobenius(fx).coords == x.coords  # phi^2 = id on the F_9 lift
    a, b = R.element([2, 7]), R.element([5, 1])
    assert frobenius(a * b).coords == (frobenius(a) * frobenius(b)).coords


def test_teichmuller_lifts():
    R = CoefficientRing(3, 4)
    assert teichmuller(R, 1).coords == (1,)
    assert teichmuller(R, -1).coords == (3**4 - 1,)
    assert teichmuller(CoefficientRing(3, 2), 2).coords == (8,)
    z = teichmuller(CoefficientRing(5, 6), 2)
    assert (z ** 4).coords == (1,) and z.coords[0] % 5 == 2


def test_divide_by_p_power():
    R = CoefficientRing(3, 4)
    q = divide_by_p_power(R.element(9), 2)
    assert q.coords == (1,) and q.certified_precision == 2
    assert divide_by_p_power(R.zero(), 3).coords == (0,)
    R3 = CoefficientRing(3, 3)
    q = divide_by_p_power(R3.element(6), 1)
    assert q.coords[0] % 9 == 2 and q.certified_precision == 2
    with pytest.raises(NotDivisible):
        divide_by_p_power(R3.element(5), 1)


def test_inverse_and_units():
    R = CoefficientRing(3, 5)
    a = R.element(7)
    assert (a * a.inverse()).coords == (1,)
    with pytest.raises(NotAUnit):
        R.element(6).inverse()
    R2 = CoefficientRing(3, 5, f=2)
    b = R2.element([4, 2])
    assert (b * b.inverse()).coords == (1, 0)


def test_ring_construction_rejects_bad_input():
    with pytest.raises(InvalidInput, match="H4"):
        CoefficientRing(2, 3)
    with pytest.raises(InvalidInput):
        CoefficientRing(9, 3)
    with pytest.raises(InvalidInput):
        CoefficientRing(3, 3, f=2, modulus=[1, 0, 1, 0])


def test_primes_and_irreducibility():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert is_irreducible_mod_p(default_modulus(3, 2), 3)
    assert not is_irreducible_mod_p([2, 0, 1], 3)  # x^2 + 2 = (x - 1)(x + 1) mod 3
    assert vp(54, 3) == 3 and vp(0, 3, cap=7) == 7


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 3**6 - 1), st.integers(0, 3**6 - 1), st.integers(0, 3**6 - 1),
       st.integers(0, 3**6 - 1))
def test_frobenius_is_a_ring_homomorphism(a0, a1, b0, b1):
    R = CoefficientRing(3, 6, f=2)
    a, b = R.element([a0, a1]), R.element([b0, b1])
    assert frobenius(a * b).coords == (frobenius(a) * frobenius(b)).coords
    assert frobenius(a + b).coords == (frobenius(a) + frobenius(b)).coords
    r = a.residue()
    assert frobenius(a).residue() == (a ** 3).residue() or r == (0, 0)
