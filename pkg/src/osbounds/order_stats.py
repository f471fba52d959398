"""Decreasing rearrangements, order-statistic sums, and two-sided bound
certification for finite bivariate functions.

A bivariate function is an n x |Omega| table of non-negative values over a
weighted codomain; the atom (i, omega) carries the weight of omega, so the
total mass is n.  All expectation operations accept integer levels ell in
1..n only; the partial rearrangement integral accepts any real 0 < ell <= n.

Ties in rearrangements and level sets are broken by the stable order
(value descending, row ascending, atom ascending).  Exact rational
arithmetic is used whenever values and weights are rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from ._streams import stream
from .errors import BoundViolation, ImplicitFamily, IndexOutOfRange
from .map_family import WeightedSpace

FLOAT_TOL = 1e-9
MC_SIGMA_MARGIN = 4.0


def _is_exact_number(v):
    return isinstance(v, Rational)


class BivariateFunction:
    """Non-negative value table over {0..n-1} x Omega.

    Absolute values are applied on ingestion, so the table always represents
    |a|.  Instances are immutable.
    """

    __slots__ = ("codomain", "values")

    def __init__(self, values, codomain=None):
        rows = tuple(tuple(abs(v) for v in row) for row in values)
        if not rows:
            raise ValueError("at least one row required")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("all rows must have equal length")
        if codomain is None:
            codomain = WeightedSpace.uniform(width)
        if len(codomain) != width:
            raise ValueError("row length must match the codomain size")
        for row in rows:
            for v in row:
                if isinstance(v, float) and not math.isfinite(v):
                    raise ValueError("values must be finite")
        self.values = rows
        self.codomain = codomain

    @classmethod
    def from_matrix(cls, rows, weights=None):
        if weights is None:
            return cls(rows)
        return cls(rows, WeightedSpace(range(len(weights)), weights))

    @property
    def domain_size(self):
        return len(self.values)

    @property
    def num_atoms(self):
        return len(self.codomain)

    @property
    def total_mass(self):
        return self.domain_size  # counting measure x probability measure

    @property
    def is_exact(self):
        return (self.codomain.is_exact
                and all(_is_exact_number(v) for row in self.values for v in row))

    def scaled(self, factor):
        if factor < 0:
            raise ValueError("scale factor must be >= 0")
        return BivariateFunction(
            [[v * factor for v in row] for row in self.values], self.codomain)

    def atom_order(self):
        """Atoms (i, j) sorted by value descending, ties in row-major order."""
        atoms = [(i, j) for i in range(self.domain_size)
                 for j in range(self.num_atoms)]
        return sorted(atoms, key=lambda ij: self.values[ij[0]][ij[1]],
                      reverse=True)


@dataclass(frozen=True)
class StepFunction:
    """Right-open decreasing step function on [0, total_length).

    Levels are strictly decreasing (equal neighbours are merged on
    construction via :func:`decreasing_rearrangement`).
    """

    breakpoints: tuple
    levels: tuple

    def __post_init__(self):
        if len(self.breakpoints) != len(self.levels) + 1:
            raise ValueError("need one more breakpoint than level")
        bs = self.breakpoints
        if any(bs[k] >= bs[k + 1] for k in range(len(bs) - 1)):
            raise ValueError("breakpoints must increase strictly")
        ls = self.levels
        if any(ls[k] <= ls[k + 1] for k in range(len(ls) - 1)):
            raise ValueError("levels must decrease strictly")

    @property
    def total_length(self):
        return self.breakpoints[-1]

    def value_at(self, t):
        if t < 0 or t > self.total_length:
            raise ValueError("argument outside [0, total_length]")
        if t == self.total_length:
            return self.levels[-1]
        for k in range(len(self.levels)):
            if t < self.breakpoints[k + 1]:
                return self.levels[k]
        raise AssertionError("unreachable")

    def integral(self, upto):
        """Exact partial integral on [0, upto], splitting a plateau if needed."""
        if upto < 0 or upto > self.total_length:
            raise ValueError("integration limit outside [0, total_length]")
        acc = 0
        for k, level in enumerate(self.levels):
            lo, hi = self.breakpoints[k], self.breakpoints[k + 1]
            if upto <= lo:
                break
            seg = (hi if hi <= upto else upto) - lo
            acc = acc + level * seg
        return acc

    def length_above(self, s):
        """Lebesgue measure of {t : value(t) > s}."""
        acc = 0
        for k, level in enumerate(self.levels):
            if level > s:
                acc = acc + (self.breakpoints[k + 1] - self.breakpoints[k])
        return acc


def kmax(values, k):
    """The k-th largest value of a finite multiset, with multiplicity."""
    vals = sorted(values, reverse=True)
    if not 1 <= k <= len(vals):
        raise IndexOutOfRange(f"k={k} outside 1..{len(vals)}")
    return vals[k - 1]


def decreasing_rearrangement(a):
    """Step-function rearrangement of a, equimeasurable with it.

    Atom (i, omega) contributes a plateau of length mu(omega) at its value;
    plateaus with equal values are merged.
    """
    lengths = []
    levels = []
    for (i, j) in a.atom_order():
        v = a.values[i][j]
        w = a.codomain.weights[j]
        if w == 0:
            continue
        if levels and levels[-1] == v:
            lengths[-1] = lengths[-1] + w
        else:
            levels.append(v)
            lengths.append(w)
    breakpoints = [0]
    for w in lengths:
        breakpoints.append(breakpoints[-1] + w)
    return StepFunction(tuple(breakpoints), tuple(levels))


def integral_rearrangement(a, ell):
    """Partial integral of the rearrangement over [0, ell], 0 < ell <= n."""
    if not 0 < ell <= a.total_mass:
        raise ValueError(f"ell={ell} outside (0, {a.total_mass}]")
    return decreasing_rearrangement(a).integral(ell)


def _validate_ell(a, ell):
    if not isinstance(ell, int) or isinstance(ell, bool):
        raise ValueError("ell must be an integer for expectation operations")
    if not 1 <= ell <= a.domain_size:
        raise ValueError(f"ell={ell} outside 1..{a.domain_size}")


def order_stat_sum(a, g, ell):
    """Sum of the ell largest values among a(i, g(i)), i = 0..n-1."""
    _validate_ell(a, ell)
    n = a.domain_size
    if len(g) != n:
        raise ValueError("map length must equal the domain size")
    vals = sorted((a.values[i][g[i]] for i in range(n)), reverse=True)
    return sum(vals[:ell])


@dataclass(frozen=True)
class Estimate:
    """A value with a standard error; stderr == 0 marks an exact result."""

    value: object
    stderr: float = 0.0
    trials: object = None

    @property
    def is_exact(self):
        return self.trials is None


def _exact_expected_sum(a, family, ell):
    all_int = all(isinstance(v, int) and not isinstance(v, bool)
                  for row in a.values for v in row)
    if all_int and family.uniform_weights:
        vals = np.asarray(a.values, dtype=np.int64)
        picked = vals[np.arange(a.domain_size)[None, :], family.maps_array()]
        picked = np.sort(picked, axis=1)
        tops = picked[:, -ell:].sum(axis=1)
        total = int(tops.sum())
        return Fraction(total) * Fraction(family.weights[0])
    exact = a.is_exact and family.is_exact
    if exact:
        acc = Fraction(0)
        for g, w in zip(family.maps, family.weights):
            acc += Fraction(w) * Fraction(order_stat_sum(a, g, ell))
        return acc
    terms = [float(w) * float(order_stat_sum(a, g, ell))
             for g, w in zip(family.maps, family.weights)]
    return math.fsum(terms)


def _sampled_topsums(a, maps, ell):
    vals = np.asarray([[float(v) for v in row] for row in a.values])
    picked = vals[np.arange(a.domain_size)[None, :], maps]
    if ell < a.domain_size:
        picked = np.partition(picked, a.domain_size - ell, axis=1)
        picked = picked[:, a.domain_size - ell:]
    return picked.sum(axis=1)


def expected_sum(a, family, ell, mode="exact", trials=100_000, seed=0):
    """E over the family of the top-ell sum of a(i, g(i)).

    Exact mode needs an explicit family and returns a rational value whenever
    all inputs are rational; Monte Carlo mode returns a mean with its
    standard error.
    """
    _validate_ell(a, ell)
    if len(family.codomain) != a.num_atoms:
        raise ValueError("family codomain does not match the value table")
    if mode == "exact":
        if not family.explicit:
            raise ImplicitFamily("exact expectation needs an explicit family")
        return Estimate(_exact_expected_sum(a, family, ell))
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    maps = family.sample_maps(stream(seed, 0), trials)
    tops = _sampled_topsums(a, maps, ell)
    mean = float(tops.mean())
    se = float(tops.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return Estimate(mean, se, trials)


@dataclass(frozen=True)
class BoundReport:
    """Two-sided certificate E against the partial rearrangement integral."""

    domain_size: int
    num_atoms: int
    ell: int
    cg: object
    lower_constant: object
    upper_constant: object
    integral: object
    expectation: object
    stderr: float
    lower_ok: bool
    upper_ok: bool
    slack_lower: float
    slack_upper: float

    CSV_FIELDS = ("n", "N_or_atoms", "ell", "CG", "c", "C", "integral",
                  "expectation", "stderr", "lower_ok", "upper_ok")

    @property
    def ok(self):
        return self.lower_ok and self.upper_ok

    def to_csv_row(self):
        return [self.domain_size, self.num_atoms, self.ell, float(self.cg),
                float(self.lower_constant), float(self.upper_constant),
                float(self.integral), float(self.expectation), self.stderr,
                self.lower_ok, self.upper_ok]

    def to_json_dict(self):
        return dict(zip(self.CSV_FIELDS, self.to_csv_row()))


def _slack(numer, denom):
    numer, denom = float(numer), float(denom)
    if denom == 0:
        return 1.0 if numer == 0 else math.inf
    return numer / denom


def bound_constants(cg):
    """The certified constants: lower 1/(48(1+2CG)^2), upper 6(1+2CG)."""
    if cg < 1:
        raise ValueError("CG must be >= 1")
    if isinstance(cg, Rational):
        one = 1 + 2 * Fraction(cg)
        return Fraction(1) / (48 * one * one), 6 * one
    one = 1.0 + 2.0 * cg
    return 1.0 / (48.0 * one * one), 6.0 * one


def check_bounds(a, family, ell, cg, mode="exact", trials=100_000, seed=0):
    """Certify c*I <= E <= C*I for the top-ell expectation over the family.

    The caller guarantees the family satisfies the marginal and pairwise
    conditions with constant <= cg.  Exact inputs are compared exactly;
    float inputs get a 1e-9 relative tolerance, Monte Carlo estimates a
    4-standard-error margin.  Raises BoundViolation (carrying the report)
    when either side fails.
    """
    c, big_c = bound_constants(cg)
    est = expected_sum(a, family, ell, mode=mode, trials=trials, seed=seed)
    integ = integral_rearrangement(a, ell)

    lower_bound = c * integ
    upper_bound = big_c * integ
    exact = (est.is_exact and isinstance(est.value, Rational)
             and isinstance(integ, Rational) and isinstance(c, Rational))
    if exact:
        margin = 0
    else:
        scale = max(1.0, abs(float(est.value)), abs(float(upper_bound)))
        margin = FLOAT_TOL * scale + MC_SIGMA_MARGIN * est.stderr
    lower_ok = bool(est.value + margin >= lower_bound)
    upper_ok = bool(est.value - margin <= upper_bound)

    report = BoundReport(
        domain_size=a.domain_size,
        num_atoms=a.num_atoms,
        ell=ell,
        cg=cg,
        lower_constant=c,
        upper_constant=big_c,
        integral=integ,
        expectation=est.value,
        stderr=est.stderr,
        lower_ok=lower_ok,
        upper_ok=upper_ok,
        slack_lower=_slack(est.value, lower_bound),
        slack_upper=_slack(upper_bound, est.value),
    )
    if not report.ok:
        raise BoundViolation(
            f"bound failed: c*I={float(lower_bound)!r} "
            f"E={float(est.value)!r} C*I={float(upper_bound)!r}", report)
    return report


def strictify(a):
    """Order-preserving tie-break: distinct values, ties in atom order.

    Values are coerced to exact rationals (floats are dyadic, so this is
    lossless); members of a tie class are offset upward by distinct amounts
    below half the gap to the next larger value, so the strict order of the
    input is preserved and tied atoms end up ranked by row-major position.
    """
    atoms = [(i, j) for i in range(a.domain_size) for j in range(a.num_atoms)]
    exact_vals = {ij: Fraction(a.values[ij[0]][ij[1]]) for ij in atoms}
    classes = {}
    for ij in atoms:
        classes.setdefault(exact_vals[ij], []).append(ij)
    distinct = sorted(classes)
    new_vals = {}
    for idx, v in enumerate(distinct):
        gap = distinct[idx + 1] - v if idx + 1 < len(distinct) else Fraction(1)
        members = classes[v]  # already in row-major order
        size = len(members)
        for rank, ij in enumerate(members):
            new_vals[ij] = v + gap * Fraction(rank, 2 * size)
    table = [[new_vals[(i, j)] for j in range(a.num_atoms)]
             for i in range(a.domain_size)]
    return BivariateFunction(table, a.codomain)


@dataclass(frozen=True)
class LevelSet:
    """Minimal upper level set of measure >= t under the canonical order."""

    atoms: tuple
    sigma: object
    boundary_atom: object
    overshoot: object


def level_set(a, t):
    """Smallest canonical upper level set with measure at least t.

    With distinct values and atomic weights the overshoot sigma - t is less
    than one atom's weight.  Tied values are resolved by the canonical
    (value desc, row asc, atom asc) order.
    """
    total = a.total_mass
    if t < 0 or t > total:
        raise ValueError(f"t={t} outside [0, {total}]")
    chosen = []
    cum = 0
    if t > 0:
        for ij in a.atom_order():
            chosen.append(ij)
            cum = cum + a.codomain.weights[ij[1]]
            if cum >= t:
                break
    return LevelSet(
        atoms=tuple(chosen),
        sigma=cum,
        boundary_atom=chosen[-1] if chosen else None,
        overshoot=cum - t,
    )


def averaged_function(a, ell):
    """Cut-off of a: its mean top-ell rearrangement value on the level set.

    Constant value (1/ell) * integral_rearrangement(a, ell) on the atoms of
    the minimal level set of measure >= ell, zero elsewhere.
    """
    _validate_ell(a, ell)
    integ = integral_rearrangement(a, ell)
    if isinstance(integ, Rational):
        value = Fraction(integ) / ell
    else:
        value = integ / ell
    hs = level_set(a, ell)
    members = set(hs.atoms)
    table = [[value if (i, j) in members else 0
              for j in range(a.num_atoms)] for i in range(a.domain_size)]
    return BivariateFunction(table, a.codomain)


@dataclass(frozen=True)
class ReductionReport:
    """Sandwich of E S(a~) between multiples of E S(a)."""

    expectation: object        # E S(a)
    averaged_expectation: object  # E S(a~)
    lower_constant: object     # 1 / (6 + 12 CG)
    upper_constant: object     # 8 + 16 CG
    cg: object
    lower_ok: bool
    upper_ok: bool

    @property
    def ok(self):
        return self.lower_ok and self.upper_ok


def verify_reduction(a, family, ell, cg):
    """Check the averaging sandwich with constants 1/(6+12CG) and 8+16CG.

    Both expectations are computed exactly over an explicit family; raises
    BoundViolation on failure.
    """
    if cg < 1:
        raise ValueError("CG must be >= 1")
    es_a = expected_sum(a, family, ell).value
    es_avg = expected_sum(averaged_function(a, ell), family, ell).value
    if isinstance(cg, Rational):
        lo = Fraction(1) / (6 + 12 * Fraction(cg))
        hi = 8 + 16 * Fraction(cg)
    else:
        lo = 1.0 / (6.0 + 12.0 * cg)
        hi = 8.0 + 16.0 * cg
    exact = isinstance(es_a, Rational) and isinstance(es_avg, Rational) \
        and isinstance(lo, Rational)
    margin = 0 if exact else FLOAT_TOL * max(1.0, abs(float(es_a)))
    lower_ok = bool(es_avg + margin >= lo * es_a)
    upper_ok = bool(es_avg - margin <= hi * es_a)
    report = ReductionReport(
        expectation=es_a,
        averaged_expectation=es_avg,
        lower_constant=lo,
        upper_constant=hi,
        cg=cg,
        lower_ok=lower_ok,
        upper_ok=upper_ok,
    )
    if not report.ok:
        raise BoundViolation(
            f"reduction sandwich failed: E S(a)={float(es_a)!r} "
            f"E S(avg)={float(es_avg)!r}", report)
    return report
