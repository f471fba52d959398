"""Shared brute-force oracles, written independently of the library paths
they check."""

from fractions import Fraction
from itertools import permutations, product

import pytest


def brute_expected_topsum(rows, maps, map_weights, ell):
    """Weighted expectation of the top-ell sum, by direct enumeration."""
    total = Fraction(0)
    for g, w in zip(maps, map_weights):
        vals = sorted((abs(rows[i][g[i]]) for i in range(len(rows))),
                      reverse=True)
        total += Fraction(w) * Fraction(sum(vals[:ell]))
    return total


def brute_partial_integral(rows, weights, ell):
    """Partial integral of the rearrangement: sort atoms, accumulate mass."""
    atoms = sorted(
        ((abs(rows[i][j]), Fraction(weights[j]))
         for i in range(len(rows)) for j in range(len(rows[0]))),
        key=lambda t: t[0], reverse=True)
    remaining = Fraction(ell)
    acc = Fraction(0)
    for value, mass in atoms:
        if remaining <= 0:
            break
        take = mass if mass <= remaining else remaining
        acc += Fraction(value) * take
        remaining -= take
    return acc


def brute_rademacher(v):
    """Average of |sum e_i v_i| over all sign patterns via itertools."""
    n = len(v)
    total = 0.0
    for signs in product((1, -1), repeat=n):
        total += abs(sum(s * x for s, x in zip(signs, v)))
    return total / 2 ** n


def brute_permutation_average(weights, x):
    """Mean over all permutations of the weighted Euclidean norm."""
    n = len(x)
    total = 0.0
    count = 0
    for pi in permutations(range(n)):
        total += sum((x[i] * weights[pi[i]]) ** 2 for i in range(n)) ** 0.5
        count += 1
    return total / count


def brute_two_point_expectation(x, value, prob, ell):
    """Exact expectation of the top-ell sum for a two-point sample."""
    n = len(x)
    total = 0.0
    for outcome in product((0.0, value), repeat=n):
        p = 1.0
        for o in outcome:
            p *= prob if o == value else (1.0 - prob)
        vals = sorted((abs(x[i] * outcome[i]) for i in range(n)), reverse=True)
        total += p * sum(vals[:ell])
    return total


@pytest.fixture
def seeded_rng():
    from osbounds._streams import stream
    return stream(20260810)
