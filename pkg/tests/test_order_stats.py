import math
from fractions import Fraction

import pytest

from osbounds.errors import (BoundViolation, ImplicitFamily, IndexOutOfRange)
from osbounds.finite_field import make_field
from osbounds.map_family import (WeightedSpace, affine_family,
                                 full_function_family, symmetric_group)
from osbounds.order_stats import (BivariateFunction, averaged_function,
                                  check_bounds, decreasing_rearrangement,
                                  expected_sum, integral_rearrangement, kmax,
                                  level_set, order_stat_sum, strictify,
                                  verify_reduction)
from conftest import brute_expected_topsum, brute_partial_integral

QUARTER = WeightedSpace(range(2), (Fraction(1, 4), Fraction(3, 4)))
ROWS_42 = [[4, 1], [2, 3]]


def identity2():
    return BivariateFunction([[1, 0], [0, 1]])


# ---------------------------------------------------------------------------
# kmax
# ---------------------------------------------------------------------------

def test_kmax_basic():
    assert kmax([3, 1, 2], 2) == 2
    assert kmax([5, 5, 1], 2) == 5
    assert kmax([7], 1) == 7


def test_kmax_out_of_range():
    with pytest.raises(IndexOutOfRange):
        kmax([1, 2], 3)
    with pytest.raises(IndexOutOfRange):
        kmax([1, 2], 0)


# ---------------------------------------------------------------------------
# rearrangement
# ---------------------------------------------------------------------------

def test_rearrangement_identity_matrix():
    step = decreasing_rearrangement(identity2())
    assert step.levels == (1, 0)
    assert step.breakpoints == (0, 1, 2)


def test_rearrangement_weighted_example():
    a = BivariateFunction(ROWS_42, QUARTER)
    step = decreasing_rearrangement(a)
    assert step.levels == (4, 3, 2, 1)
    assert step.breakpoints == (0, Fraction(1, 4), 1, Fraction(5, 4), 2)


def test_rearrangement_constant_function():
    a = BivariateFunction([[7, 7], [7, 7]])
    step = decreasing_rearrangement(a)
    assert step.levels == (7,)
    assert step.breakpoints == (0, 2)


def test_partial_integral_weighted_example():
    a = BivariateFunction(ROWS_42, QUARTER)
    assert integral_rearrangement(a, 1) == Fraction(13, 4)  # 4/4 + 3*3/4


def test_partial_integral_matches_matrix_formula(seeded_rng):
    # uniform codomain: integral over [0, ell] equals (1/N) * top ell*N sum
    for _ in range(25):
        n, N = int(seeded_rng.integers(2, 5)), int(seeded_rng.integers(2, 6))
        rows = seeded_rng.integers(0, 9, size=(n, N)).tolist()
        a = BivariateFunction(rows)
        s = sorted((abs(v) for row in rows for v in row), reverse=True)
        for ell in range(1, n + 1):
            expect = Fraction(sum(s[:ell * N]), N)
            assert integral_rearrangement(a, ell) == expect


def test_partial_integral_constant_is_ell():
    a = BivariateFunction([[1, 1, 1]] * 3)
    assert integral_rearrangement(a, 2) == 2
    assert integral_rearrangement(a, 1.5) == 1.5


def test_partial_integral_brute_oracle(seeded_rng):
    weights = (Fraction(1, 8), Fraction(3, 8), Fraction(1, 2))
    for _ in range(20):
        rows = seeded_rng.integers(0, 12, size=(3, 3)).tolist()
        a = BivariateFunction(rows, WeightedSpace(range(3), weights))
        for ell in (1, 2, 3):
            assert integral_rearrangement(a, ell) == \
                brute_partial_integral(rows, weights, ell)


def test_equimeasurability(seeded_rng):
    weights = (Fraction(1, 4), Fraction(3, 4))
    for _ in range(20):
        rows = seeded_rng.integers(0, 6, size=(2, 2)).tolist()
        a = BivariateFunction(rows, WeightedSpace(range(2), weights))
        step = decreasing_rearrangement(a)
        for s in range(-1, 7):
            mass = sum(weights[j] for i in range(2) for j in range(2)
                       if rows[i][j] > s)
            assert step.length_above(s) == mass


def test_total_mass_conservation(seeded_rng):
    weights = (Fraction(1, 3), Fraction(2, 3))
    for _ in range(20):
        rows = seeded_rng.integers(0, 9, size=(4, 2)).tolist()
        a = BivariateFunction(rows, WeightedSpace(range(2), weights))
        total = sum(Fraction(rows[i][j]) * weights[j]
                    for i in range(4) for j in range(2))
        assert decreasing_rearrangement(a).integral(4) == total


# ---------------------------------------------------------------------------
# order-statistic sums and expectations
# ---------------------------------------------------------------------------

def test_order_stat_sum_examples():
    a = identity2()
    assert order_stat_sum(a, (0, 1), 1) == 1
    assert order_stat_sum(a, (1, 0), 2) == 0
    b = BivariateFunction(ROWS_42, QUARTER)
    assert order_stat_sum(b, (0, 1), 2) == 7  # values (4, 3)


def test_expected_sum_identity_over_swaps():
    est = expected_sum(identity2(), symmetric_group(2), 1)
    assert est.value == Fraction(1, 2)
    assert est.stderr == 0.0


def test_expected_sum_product_example():
    fam = full_function_family(2, QUARTER)
    a = BivariateFunction(ROWS_42, QUARTER)
    est = expected_sum(a, fam, 1)
    assert est.value == Fraction(49, 16)  # 3.0625


def test_expected_sum_constant_function():
    fam = affine_family(make_field(3))
    a = BivariateFunction([[1, 1, 1]] * 3)
    for ell in (1, 2, 3):
        assert expected_sum(a, fam, ell).value == ell


def test_expected_sum_brute_oracle(seeded_rng):
    fam = symmetric_group(3)
    for _ in range(15):
        rows = seeded_rng.integers(0, 10, size=(3, 3)).tolist()
        a = BivariateFunction(rows)
        for ell in (1, 2, 3):
            assert expected_sum(a, fam, ell).value == \
                brute_expected_topsum(rows, fam.maps, fam.weights, ell)


def test_expected_sum_full_level_closed_form(seeded_rng):
    # ell = n over permutations: every kmax contributes, so the expectation
    # is the mean row-column sum
    for n in (2, 3, 4):
        fam = symmetric_group(n)
        rows = seeded_rng.integers(0, 9, size=(n, n)).tolist()
        a = BivariateFunction(rows)
        expect = Fraction(sum(sum(r) for r in rows), n)
        assert expected_sum(a, fam, n).value == expect


def test_expected_sum_monotone_and_homogeneous(seeded_rng):
    fam = symmetric_group(3)
    rows = seeded_rng.integers(0, 9, size=(3, 3)).tolist()
    bigger = [[v + 2 for v in row] for row in rows]
    a, b = BivariateFunction(rows), BivariateFunction(bigger)
    for ell in (1, 2, 3):
        assert expected_sum(a, fam, ell).value <= expected_sum(b, fam, ell).value
    scaled = a.scaled(Fraction(7, 2))
    assert expected_sum(scaled, fam, 2).value == \
        Fraction(7, 2) * expected_sum(a, fam, 2).value


def test_expected_sum_monte_carlo_agrees(seeded_rng):
    fam = full_function_family(3, WeightedSpace.uniform(3))
    rows = seeded_rng.integers(0, 9, size=(3, 3)).tolist()
    a = BivariateFunction(rows)
    exact = float(expected_sum(a, fam, 2).value)
    est = expected_sum(a, fam, 2, mode="mc", trials=40_000, seed=11)
    assert abs(est.value - exact) <= 4 * est.stderr + 1e-12


def test_expected_sum_requires_explicit_family():
    fam = full_function_family(10, WeightedSpace.uniform(10))
    a = BivariateFunction([[1] * 10] * 10)
    with pytest.raises(ImplicitFamily):
        expected_sum(a, fam, 1)


def test_non_integer_ell_rejected():
    with pytest.raises(ValueError):
        expected_sum(identity2(), symmetric_group(2), 1.5)
    # the rearrangement integral accepts fractional limits
    assert integral_rearrangement(identity2(), 0.5) == 0.5


# ---------------------------------------------------------------------------
# bound certification
# ---------------------------------------------------------------------------

def test_check_bounds_identity_example():
    rep = check_bounds(identity2(), symmetric_group(2), 1, 2)
    assert rep.expectation == Fraction(1, 2)
    assert rep.integral == 1
    assert rep.lower_constant == Fraction(1, 1200)
    assert rep.upper_constant == 30
    assert rep.ok


def test_check_bounds_product_example():
    fam = full_function_family(2, QUARTER)
    a = BivariateFunction(ROWS_42, QUARTER)
    rep = check_bounds(a, fam, 1, 1)
    assert rep.expectation == Fraction(49, 16)
    assert rep.integral == Fraction(13, 4)
    assert rep.lower_constant == Fraction(1, 432)
    assert rep.upper_constant == 18
    assert rep.ok


def test_check_bounds_zero_function():
    a = BivariateFunction([[0, 0], [0, 0]])
    rep = check_bounds(a, symmetric_group(2), 1, 1)
    assert rep.ok
    assert rep.expectation == 0 and rep.integral == 0
    assert rep.slack_lower == 1.0 and rep.slack_upper == 1.0


def test_check_bounds_scale_invariant_verdict(seeded_rng):
    fam = affine_family(make_field(3))
    rows = seeded_rng.integers(0, 9, size=(3, 3)).tolist()
    a = BivariateFunction(rows)
    r1 = check_bounds(a, fam, 2, 1)
    r2 = check_bounds(a.scaled(Fraction(11, 3)), fam, 2, 1)
    assert (r1.lower_ok, r1.upper_ok) == (r2.lower_ok, r2.upper_ok)
    assert math.isclose(r1.slack_lower, r2.slack_lower)


def test_check_bounds_violation_carries_report():
    # deterministic singleton family: marginals fail, so the certified lower
    # bound genuinely breaks on a matrix vanishing along the chosen graph
    from osbounds.map_family import MapFamily
    fam = MapFamily(2, WeightedSpace.uniform(2), [(0, 1)], [Fraction(1)])
    a = BivariateFunction([[0, 9], [9, 0]])
    with pytest.raises(BoundViolation) as err:
        check_bounds(a, fam, 1, 1)
    report = err.value.report
    assert report is not None
    assert not report.lower_ok
    assert report.expectation == 0 and report.integral > 0


def test_check_bounds_monte_carlo_mode():
    fam = full_function_family(3, WeightedSpace.uniform(3))
    a = BivariateFunction([[5, 1, 0], [2, 2, 2], [0, 1, 4]])
    rep = check_bounds(a, fam, 2, 1, mode="mc", trials=20_000, seed=5)
    assert rep.ok
    assert rep.stderr > 0


# ---------------------------------------------------------------------------
# strictification and level sets
# ---------------------------------------------------------------------------

def test_strictify_preserves_strict_order(seeded_rng):
    for _ in range(10):
        rows = seeded_rng.integers(0, 4, size=(3, 3)).tolist()
        a = BivariateFunction(rows)
        b = strictify(a)
        atoms = [(i, j) for i in range(3) for j in range(3)]
        vals = {ij: b.values[ij[0]][ij[1]] for ij in atoms}
        assert len(set(vals.values())) == 9
        for s in atoms:
            for t in atoms:
                if a.values[s[0]][s[1]] > a.values[t[0]][t[1]]:
                    assert vals[s] > vals[t]


def test_strictify_rank_is_stable_argsort(seeded_rng):
    for _ in range(10):
        rows = seeded_rng.integers(0, 3, size=(2, 4)).tolist()
        a = BivariateFunction(rows)
        b = strictify(a)
        atoms = [(i, j) for i in range(2) for j in range(4)]
        by_b = sorted(atoms, key=lambda ij: b.values[ij[0]][ij[1]])
        stable = sorted(atoms, key=lambda ij: (a.values[ij[0]][ij[1]],
                                               atoms.index(ij)))
        assert by_b == stable


def test_strictify_constant_increases_in_atom_order():
    a = BivariateFunction([[5, 5], [5, 5]])
    b = strictify(a)
    flat = [b.values[i][j] for i in range(2) for j in range(2)]
    assert flat == sorted(flat)
    assert len(set(flat)) == 4


def test_strictify_ties_stay_between_neighbours():
    a = BivariateFunction([[5, 3], [5, 7]])
    b = strictify(a)
    tied = [b.values[0][0], b.values[1][0]]
    assert all(3 < v < 7 for v in tied)
    assert tied[0] < tied[1]


def test_level_set_extremes():
    a = BivariateFunction(ROWS_42, QUARTER)
    assert level_set(a, 0).atoms == ()
    full = level_set(a, 2)
    assert len(full.atoms) == 4
    assert full.sigma == 2


def test_level_set_weighted_example():
    a = strictify(BivariateFunction(ROWS_42, QUARTER))
    ls = level_set(a, Fraction(1, 2))
    assert ls.atoms == ((0, 0), (1, 1))
    assert ls.sigma == 1
    assert ls.overshoot == Fraction(1, 2)
    assert ls.boundary_atom == (1, 1)


def test_level_set_overshoot_below_one_atom(seeded_rng):
    weights = (Fraction(1, 6), Fraction(1, 3), Fraction(1, 2))
    for _ in range(10):
        rows = seeded_rng.integers(0, 20, size=(2, 3)).tolist()
        a = strictify(BivariateFunction(rows, WeightedSpace(range(3), weights)))
        t = Fraction(int(seeded_rng.integers(1, 12)), 6)
        ls = level_set(a, t)
        assert 0 <= ls.overshoot
        if ls.boundary_atom is not None:
            assert ls.overshoot < weights[ls.boundary_atom[1]]


# ---------------------------------------------------------------------------
# averaging and the reduction sandwich
# ---------------------------------------------------------------------------

def test_averaged_function_constant_input():
    a = BivariateFunction([[1, 1], [1, 1]])
    for ell in (1, 2):
        avg = averaged_function(a, ell)
        members = level_set(a, ell).atoms
        for (i, j) in members:
            assert avg.values[i][j] == 1


def test_averaged_function_identity():
    avg = averaged_function(identity2(), 1)
    assert avg.values == ((1, 0), (0, 1))


def test_averaged_function_homogeneous(seeded_rng):
    rows = seeded_rng.integers(0, 9, size=(3, 3)).tolist()
    a = BivariateFunction(rows)
    lam = Fraction(5, 2)
    left = averaged_function(a.scaled(lam), 2)
    right = averaged_function(a, 2).scaled(lam)
    assert left.values == right.values


def test_verify_reduction_constant_function():
    fam = symmetric_group(3)
    a = BivariateFunction([[1, 1, 1]] * 3)
    for ell in (1, 2, 3):
        rep = verify_reduction(a, fam, ell, Fraction(3, 2))
        assert rep.ok
        assert rep.expectation == rep.averaged_expectation == ell


def test_verify_reduction_identity_enumeration():
    rep = verify_reduction(identity2(), symmetric_group(2), 1, 2)
    assert rep.ok
    assert rep.expectation == Fraction(1, 2)
    assert rep.averaged_expectation == Fraction(1, 2)


def test_verify_reduction_seeded_instances(seeded_rng):
    fam = symmetric_group(3)
    aff = affine_family(make_field(3))
    for _ in range(25):
        rows = seeded_rng.integers(0, 10, size=(3, 3)).tolist()
        a = BivariateFunction(rows)
        for ell in (1, 2, 3):
            assert verify_reduction(a, fam, ell, Fraction(3, 2)).ok
            assert verify_reduction(a, aff, ell, Fraction(1)).ok
