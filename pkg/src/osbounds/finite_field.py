"""Exact arithmetic for the Galois fields GF(p^k).

Elements are encoded as integers in 0..n-1: the base-p digits of an encoding
are the coefficients of a Z_p polynomial, lowest degree first.  For k = 1
this is plain arithmetic mod p.  Small fields precompute full operation
tables; larger ones fall back to direct polynomial computation.
"""

from __future__ import annotations

import math
from itertools import product

from .errors import NotPrimePower, ZeroInverse

# Orders up to this bound get eagerly built add/mul/inv tables.  Enumeration
# of the affine family is then pure table lookup.
TABLE_LIMIT = 256


def prime_power_decomposition(n):
    """Return (p, k) with n == p**k, or None when n is not a prime power."""
    if n < 2:
        return None
    p = None
    for q in range(2, math.isqrt(n) + 1):
        if n % q == 0:
            p = q
            break
    if p is None:
        return n, 1
    m, k = n, 0
    while m % p == 0:
        m //= p
        k += 1
    return (p, k) if m == 1 else None


def _poly_trim(coeffs):
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_mod(a, m, p):
    """Remainder of a modulo the monic polynomial m, over Z_p."""
    r = [c % p for c in a]
    _poly_trim(r)
    dm = len(m) - 1
    while len(r) - 1 >= dm:
        shift = len(r) - 1 - dm
        lead = r[-1]
        for i, mi in enumerate(m):
            r[shift + i] = (r[shift + i] - lead * mi) % p
        _poly_trim(r)
    return r


def _poly_eval(coeffs, x, p):
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def _is_irreducible(f, p):
    """Irreducibility of a monic polynomial f (degree >= 2) over Z_p."""
    k = len(f) - 1
    for x in range(p):
        if _poly_eval(f, x, p) == 0:
            return False
    # No linear factors; trial-divide by monic polynomials of degree 2..k//2.
    for d in range(2, k // 2 + 1):
        for tail in product(range(p), repeat=d):
            divisor = list(tail) + [1]
            if not _poly_mod(f, divisor, p):
                return False
    return True


def find_irreducible(p, k):
    """Lexicographically smallest monic irreducible of degree k over Z_p.

    Coefficient vectors are compared low-degree first, so the scan runs over
    (c_0, ..., c_{k-1}) in ascending order with the leading coefficient
    fixed at 1.
    """
    if k < 2:
        raise ValueError("degree must be at least 2")
    if prime_power_decomposition(p) != (p, 1):
        raise ValueError("characteristic must be prime")
    for tail in product(range(p), repeat=k):
        f = list(tail) + [1]
        if _is_irreducible(f, p):
            return f
    raise AssertionError("no irreducible polynomial found")  # unreachable


class FiniteField:
    """GF(p^k).  Immutable after construction; safe for shared reads."""

    def __init__(self, characteristic, degree, reduction_polynomial):
        self.characteristic = characteristic
        self.degree = degree
        self.order = characteristic ** degree
        self.reduction_polynomial = tuple(reduction_polynomial)
        self._add_table = None
        self._mul_table = None
        self._inv_table = None
        if self.order <= TABLE_LIMIT:
            self._build_tables()

    def __repr__(self):
        return f"FiniteField(order={self.order})"

    def elements(self):
        return range(self.order)

    def _digits(self, x):
        p = self.characteristic
        out = []
        for _ in range(self.degree):
            out.append(x % p)
            x //= p
        return out

    def _encode(self, digits):
        p = self.characteristic
        x = 0
        for d in reversed(digits):
            x = x * p + d
        return x

    def _check(self, x):
        if not 0 <= x < self.order:
            raise ValueError(f"element {x} outside 0..{self.order - 1}")

    def _add_raw(self, x, y):
        p = self.characteristic
        if self.degree == 1:
            return (x + y) % p
        dx, dy = self._digits(x), self._digits(y)
        return self._encode([(a + b) % p for a, b in zip(dx, dy)])

    def _mul_raw(self, x, y):
        p = self.characteristic
        if self.degree == 1:
            return (x * y) % p
        prod = _poly_mul(self._digits(x), self._digits(y), p)
        rem = _poly_mod(prod, list(self.reduction_polynomial), p)
        rem += [0] * (self.degree - len(rem))
        return self._encode(rem)

    def _build_tables(self):
        n = self.order
        self._add_table = [[self._add_raw(x, y) for y in range(n)] for x in range(n)]
        self._mul_table = [[self._mul_raw(x, y) for y in range(n)] for x in range(n)]
        inv = [0] * n
        for x in range(1, n):
            row = self._mul_table[x]
            inv[x] = row.index(1)
        self._inv_table = inv

    def add(self, x, y):
        self._check(x)
        self._check(y)
        if self._add_table is not None:
            return self._add_table[x][y]
        return self._add_raw(x, y)

    def neg(self, x):
        self._check(x)
        p = self.characteristic
        if self.degree == 1:
            return (-x) % p
        return self._encode([(-d) % p for d in self._digits(x)])

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def mul(self, x, y):
        self._check(x)
        self._check(y)
        if self._mul_table is not None:
            return self._mul_table[x][y]
        return self._mul_raw(x, y)

    def inv(self, x):
        self._check(x)
        if x == 0:
            raise ZeroInverse("0 has no multiplicative inverse")
        if self._inv_table is not None:
            return self._inv_table[x]
        # x^(n-2) = x^{-1} since the multiplicative group has order n-1.
        result, base, e = 1, x, self.order - 2
        while e:
            if e & 1:
                result = self._mul_raw(result, base)
            base = self._mul_raw(base, base)
            e >>= 1
        return result

    def pow(self, x, e):
        self._check(x)
        if e < 0:
            return self.pow(self.inv(x), -e)
        result, base = 1, x
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result


def make_field(n):
    """Construct GF(n) for a prime power n >= 2.

    Raises NotPrimePower when n has two or more distinct prime factors.
    """
    if not isinstance(n, int) or n < 2:
        raise ValueError("field order must be an integer >= 2")
    decomp = prime_power_decomposition(n)
    if decomp is None:
        raise NotPrimePower(f"{n} is not a prime power")
    p, k = decomp
    poly = [0, 1] if k == 1 else find_irreducible(p, k)
    return FiniteField(p, k, poly)


def field_inv(field, x):
    """Multiplicative inverse of x in the field; ZeroInverse for x = 0."""
    return field.inv(x)
