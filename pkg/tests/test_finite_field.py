import numpy as np
import pytest

from osbounds.errors import NotPrimePower, ZeroInverse
from osbounds.finite_field import (FiniteField, field_inv, find_irreducible,
                                   make_field, prime_power_decomposition)

PRIME_POWERS_64 = [n for n in range(2, 65) if prime_power_decomposition(n)]


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def test_characteristic_two():
    f = make_field(2)
    assert f.add(1, 1) == 0


def test_mod_three_multiplication():
    f = make_field(3)
    assert f.mul(2, 2) == 1


def test_gf4_polynomial_model():
    f = make_field(4)
    assert list(f.reduction_polynomial) == [1, 1, 1]  # x^2 + x + 1
    assert f.mul(2, 2) == 3  # x * x = x + 1


@pytest.mark.parametrize("n", [6, 10, 12, 15, 100])
def test_composite_orders_rejected(n):
    with pytest.raises(NotPrimePower):
        make_field(n)


@pytest.mark.parametrize("n", [0, 1, -4])
def test_tiny_orders_rejected(n):
    with pytest.raises(ValueError):
        make_field(n)


# ---------------------------------------------------------------------------
# irreducible polynomial search
# ---------------------------------------------------------------------------

def _oracle_divides(divisor, f, p):
    # long division with integer coefficients mod p, no library helpers
    r = list(f)
    while len(r) >= len(divisor) and any(r):
        while r and r[-1] == 0:
            r.pop()
        if len(r) < len(divisor):
            break
        shift = len(r) - len(divisor)
        lead = r[-1]
        inv = pow(divisor[-1], p - 2, p)
        factor = (lead * inv) % p
        for i, c in enumerate(divisor):
            r[shift + i] = (r[shift + i] - factor * c) % p
    return not any(r)


def _oracle_irreducible(f, p):
    from itertools import product as iproduct
    k = len(f) - 1
    for d in range(1, k):
        for tail in iproduct(range(p), repeat=d):
            divisor = list(tail) + [1]
            if _oracle_divides(divisor, f, p):
                return False
    return True


@pytest.mark.parametrize("p,k,expected", [
    (2, 2, [1, 1, 1]),       # x^2 + x + 1
    (3, 2, [1, 0, 1]),       # x^2 + 1
    (2, 3, [1, 1, 0, 1]),    # x^3 + x + 1
])
def test_find_irreducible_matches_exhaustive_scan(p, k, expected):
    got = find_irreducible(p, k)
    assert got == expected
    assert _oracle_irreducible(got, p)


@pytest.mark.parametrize("p,k", [(2, 4), (3, 3), (5, 2), (7, 2)])
def test_find_irreducible_is_lexicographically_smallest(p, k):
    from itertools import product as iproduct
    got = find_irreducible(p, k)
    assert _oracle_irreducible(got, p)
    for tail in iproduct(range(p), repeat=k):
        cand = list(tail) + [1]
        if cand == got:
            break
        assert not _oracle_irreducible(cand, p)


# ---------------------------------------------------------------------------
# inverses
# ---------------------------------------------------------------------------

def test_inverse_examples():
    assert field_inv(make_field(5), 2) == 3
    assert field_inv(make_field(4), 2) == 3
    assert field_inv(make_field(7), 1) == 1


def test_zero_inverse_raises():
    with pytest.raises(ZeroInverse):
        field_inv(make_field(9), 0)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 7, 8, 9, 16, 25, 27])
def test_inverse_is_an_involution(n):
    f = make_field(n)
    for x in range(1, n):
        assert f.inv(f.inv(x)) == x
        assert f.mul(x, f.inv(x)) == 1


# ---------------------------------------------------------------------------
# field axioms, exhaustively for every prime power up to 64
# ---------------------------------------------------------------------------

def _tables(f):
    n = f.order
    add = np.asarray([[f.add(x, y) for y in range(n)] for x in range(n)])
    mul = np.asarray([[f.mul(x, y) for y in range(n)] for x in range(n)])
    return add, mul


@pytest.mark.parametrize("n", PRIME_POWERS_64)
def test_field_axioms_exhaustive(n):
    f = make_field(n)
    add, mul = _tables(f)
    idx = np.arange(n)

    assert np.array_equal(add, add.T)
    assert np.array_equal(mul, mul.T)
    assert np.array_equal(add[0], idx)          # additive identity
    assert np.array_equal(mul[1], idx)          # multiplicative identity
    assert np.array_equal(mul[0], np.zeros(n, dtype=add.dtype))

    x, y, z = np.ix_(idx, idx, idx)
    assert np.array_equal(add[add[x, y], z], add[x, add[y, z]])
    assert np.array_equal(mul[mul[x, y], z], mul[x, mul[y, z]])
    assert np.array_equal(mul[x, add[y, z]], add[mul[x, y], mul[x, z]])

    # unique inverses and additive exponent p
    for a in range(1, n):
        assert np.count_nonzero(mul[a] == 1) == 1
    acc = np.zeros(n, dtype=int)
    for _ in range(f.characteristic):
        acc = add[acc, idx]
    assert np.array_equal(acc, np.zeros(n, dtype=int))


@pytest.mark.parametrize("n", [4, 5, 8, 9])
def test_affine_maps_are_bijections(n):
    f = make_field(n)
    for a in range(1, n):
        for b in range(n):
            image = {f.add(f.mul(a, x), b) for x in range(n)}
            assert image == set(range(n))


def test_large_order_falls_back_to_direct_arithmetic():
    f = make_field(257)  # above the table limit
    assert f._mul_table is None
    assert f.mul(200, f.inv(200)) == 1
    assert f.add(256, 1) == 0


def test_element_range_checked():
    f = make_field(5)
    with pytest.raises(ValueError):
        f.add(5, 0)
