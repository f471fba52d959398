"""Random-sign embeddings of weighted sequence spaces into ell_1.

The operator maps x to the n^2 * N vector of normalized sign-weighted sums
over the affine map family, with N sign vectors chosen so that empirical
sign averages reproduce the full Rademacher average within a factor
(1 +- delta) on a probe set.  Distortion is measured against the
permutation average of weighted Euclidean norms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

from ._streams import stream
from .errors import BudgetExceeded, DomainTooLarge
from .finite_field import make_field
from .map_family import affine_family

RADEMACHER_LIMIT = 20
SIGN_SUBSAMPLE = 1 << 20
SIGN_START_FACTOR = 4
SIGN_BUDGET_FACTOR = 1024
REFERENCE_EXACT_LIMIT = 8


def rademacher_average(v):
    """Exact average of |sum_i e_i v_i| over all 2^n sign patterns (n <= 20)."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("expected a vector")
    if v.size > RADEMACHER_LIMIT:
        raise DomainTooLarge(
            f"n={v.size} exceeds the enumeration bound {RADEMACHER_LIMIT}")
    sums = np.zeros(1)
    for vi in v:
        sums = np.concatenate((sums + vi, sums - vi))
    return float(np.abs(sums).mean())


def _estimated_rademacher(v, rng, count=SIGN_SUBSAMPLE):
    v = np.asarray(v, dtype=float)
    total = 0.0
    done = 0
    chunk = 1 << 16
    while done < count:
        m = min(chunk, count - done)
        signs = rng.integers(0, 2, size=(m, v.size)) * 2 - 1
        total += float(np.abs(signs @ v).sum())
        done += m
    return total / count


@dataclass(frozen=True)
class SignSelection:
    """Sign matrix accepted by the doubling search, with its audit trail."""

    matrix: np.ndarray          # (N, n) entries +-1
    num_vectors: int
    rounds: int
    worst_lower: float          # min over probes of empirical/exact
    worst_upper: float          # max over probes of empirical/exact


def select_sign_vectors(n, delta, probe_set, seed=0,
                        start_factor=SIGN_START_FACTOR,
                        budget_factor=SIGN_BUDGET_FACTOR):
    """Draw iid uniform sign vectors until every probe is (1 +- delta)-faithful.

    N starts at start_factor*n and doubles (keeping earlier draws, so the
    sign sets are nested) until the empirical sign average of every probe
    lies within (1 +- delta) of its Rademacher average; exact averages are
    used for n <= 20, a 2^20 subsample above.  Raises BudgetExceeded instead
    of growing past budget_factor*n.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in the open interval (0, 1)")
    probes = np.asarray(probe_set, dtype=float)
    if probes.ndim == 1:
        probes = probes[None, :]
    if probes.size == 0:
        raise ValueError("probe set must be nonempty")
    if probes.shape[1] != n:
        raise ValueError("probe dimension must equal n")

    if n <= RADEMACHER_LIMIT:
        aves = np.asarray([rademacher_average(u) for u in probes])
    else:
        aves = np.asarray([
            _estimated_rademacher(u, stream(seed, 0, idx))
            for idx, u in enumerate(probes)])

    rng = stream(seed, 1)
    cap = budget_factor * n
    num = start_factor * n
    matrix = rng.integers(0, 2, size=(num, n)) * 2 - 1
    rounds = 0
    while True:
        rounds += 1
        emp = np.abs(probes @ matrix.T).mean(axis=1)
        positive = aves > 0
        ratios = np.divide(emp, aves, out=np.ones_like(emp), where=positive)
        zero_ok = np.all(emp[~positive] == 0)
        lo, hi = float(ratios.min()), float(ratios.max())
        if zero_ok and lo >= 1 - delta and hi <= 1 + delta:
            return SignSelection(matrix=matrix, num_vectors=num,
                                 rounds=rounds, worst_lower=lo, worst_upper=hi)
        if 2 * num > cap:
            raise BudgetExceeded(
                f"sign count would exceed {budget_factor}*n = {cap}")
        matrix = np.vstack((matrix, rng.integers(0, 2, size=(num, n)) * 2 - 1))
        num *= 2


def ones_weights(n):
    return (1.0,) * n


def p_family_weights(n, p):
    """Probe weights i^(1/p - 1/2), i = 1..n."""
    return tuple(float(i) ** (1.0 / p - 0.5) for i in range(1, n + 1))


class EmbeddingSpec:
    """Frozen description of the sign-and-map-family embedding operator."""

    def __init__(self, n, weights, sign_matrix):
        field = make_field(n)
        self.n = n
        self.weights = tuple(float(w) for w in weights)
        if len(self.weights) != n:
            raise ValueError("need one weight per coordinate")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        self.sign_matrix = np.asarray(sign_matrix, dtype=np.int8)
        if self.sign_matrix.ndim != 2 or self.sign_matrix.shape[1] != n:
            raise ValueError("sign matrix must be N x n")
        if not np.all(np.abs(self.sign_matrix) == 1):
            raise ValueError("sign entries must be +-1")
        self.family = affine_family(field)
        # weight seen by coordinate i of the block of map g
        self._gw = np.asarray(self.weights)[self.family.maps_array()]

    @property
    def num_signs(self):
        return self.sign_matrix.shape[0]

    @property
    def output_dim(self):
        return self.n * self.n * self.num_signs

    @property
    def normalization(self):
        return 1.0 / self.output_dim  # 1 / (n^2 N)

    def to_json(self):
        return json.dumps({
            "n": self.n,
            "weights": list(self.weights),
            "sign_vectors": self.sign_matrix.tolist(),
        })

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(obj["n"], obj["weights"], obj["sign_vectors"])


def psi(spec, x):
    """Image of x: coordinate (g, j) is the normalized sign-weighted sum."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n,):
        raise ValueError(f"x must have length {spec.n}")
    block = spec._gw * x                      # (n^2, n)
    coords = block @ spec.sign_matrix.T.astype(float)  # (n^2, N)
    return (coords * spec.normalization).ravel()


def psi_l1(spec, x):
    return float(np.abs(psi(spec, x)).sum())


@lru_cache(maxsize=None)
def _all_permutations(n):
    return np.asarray(list(permutations(range(n))), dtype=np.intp)


def reference_norm(weights, x, mode="exact", trials=20_000, seed=0, rng=None):
    """Permutation average of the weighted Euclidean norms of x.

    Exact mode enumerates the full symmetric group (n <= 8); sampled mode
    averages over random permutations drawn from `rng` (or a stream keyed
    by `seed`).
    """
    w = np.asarray(weights, dtype=float)
    x = np.asarray(x, dtype=float)
    n = x.size
    if w.size != n:
        raise ValueError("weights and x must have equal length")
    if mode == "exact":
        if n > REFERENCE_EXACT_LIMIT:
            raise DomainTooLarge(
                f"exact permutation average bounded at n = {REFERENCE_EXACT_LIMIT}")
        perms = _all_permutations(n)
    elif mode == "sampled":
        if rng is None:
            rng = stream(seed, 0)
        perms = rng.permuted(np.tile(np.arange(n), (trials, 1)), axis=1)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    vals = w[perms] * x
    return float(np.sqrt((vals * vals).sum(axis=1)).mean())


@dataclass(frozen=True)
class EquivalenceReport:
    """Both map-family averages against the split rearrangement bound."""

    avg_affine: float
    avg_symmetric: float
    bound: float
    head: float                 # (1/n) * sum of the n largest entries
    tail: float                 # ((1/n) * sum of the rest^p)^(1/p)
    upper_ok_affine: bool
    upper_ok_symmetric: bool
    ratio_affine: float         # avg / bound, the measured lower constant
    ratio_symmetric: float
    affine_over_symmetric: float


def equivalence_averages_check(matrix, p=2):
    """Compare the affine-family and symmetric-group averages of row picks.

    Both averages of (sum_i |a_{i g(i)}|^p)^(1/p) must stay below the split
    bound head + tail built from the sorted entries; the measured ratios
    report how tight the unstated lower constant is.
    """
    a = np.abs(np.asarray(matrix, dtype=float))
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n > REFERENCE_EXACT_LIMIT:
        raise DomainTooLarge(
            f"exact symmetric-group average bounded at n = {REFERENCE_EXACT_LIMIT}")
    family = affine_family(make_field(n))
    rows = np.arange(n)

    picks = a[rows[None, :], family.maps_array()]
    avg_g0 = float((picks ** p).sum(axis=1) ** (1.0 / p) @
                   np.asarray([float(w) for w in family.weights]))
    perms = _all_permutations(n)
    vals = a[rows[None, :], perms]
    avg_sym = float(((vals ** p).sum(axis=1) ** (1.0 / p)).mean())

    s = np.sort(a.ravel())[::-1]
    head = float(s[:n].sum() / n)
    tail = float((np.sum(s[n:] ** p) / n) ** (1.0 / p))
    bound = head + tail
    tol = 1e-12 * max(1.0, bound)
    return EquivalenceReport(
        avg_affine=avg_g0,
        avg_symmetric=avg_sym,
        bound=bound,
        head=head,
        tail=tail,
        upper_ok_affine=avg_g0 <= bound + tol,
        upper_ok_symmetric=avg_sym <= bound + tol,
        ratio_affine=avg_g0 / bound if bound > 0 else 1.0,
        ratio_symmetric=avg_sym / bound if bound > 0 else 1.0,
        affine_over_symmetric=avg_g0 / avg_sym if avg_sym > 0 else 1.0,
    )


@dataclass(frozen=True)
class DistortionReport:
    n: int
    num_signs: int
    samples: int
    min_ratio: float
    max_ratio: float
    distortion: float
    seed: int

    def to_csv_row(self):
        return [self.n, self.num_signs, self.samples, self.min_ratio,
                self.max_ratio, self.distortion, self.seed]

    CSV_FIELDS = ("n", "N", "samples", "min_ratio", "max_ratio",
                  "distortion", "seed")


def sphere_samples(n, count, rng):
    xs = rng.standard_normal((count, n))
    return xs / np.linalg.norm(xs, axis=1, keepdims=True)


def distortion_report(spec, samples, seed=0, reference_trials=20_000):
    """Empirical distortion of the embedding against the reference norm.

    Evaluates ||psi(x)||_1 / reference_norm(x) over random unit-sphere
    samples; the max/min ratio is the measured two-sided embedding constant
    on the sample.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = stream(seed, 3)
    xs = sphere_samples(spec.n, samples, rng)
    mode = "exact" if spec.n <= REFERENCE_EXACT_LIMIT else "sampled"
    ratios = []
    for idx, x in enumerate(xs):
        ref = reference_norm(spec.weights, x, mode=mode,
                             trials=reference_trials,
                             rng=stream(seed, 4, idx))
        ratios.append(psi_l1(spec, x) / ref)
    ratios = np.asarray(ratios)
    lo, hi = float(ratios.min()), float(ratios.max())
    return DistortionReport(
        n=spec.n, num_signs=spec.num_signs, samples=samples,
        min_ratio=lo, max_ratio=hi, distortion=hi / lo, seed=seed,
    )


def build_spec(n, delta=0.25, weights=None, probes=None, seed=0):
    """Assemble an embedding: affine family plus certified sign vectors.

    Default probes are the unit vectors; callers measuring distortion should
    pass the sample vectors they intend to evaluate.
    """
    if weights is None:
        weights = ones_weights(n)
    if probes is None:
        probes = np.eye(n)
    selection = select_sign_vectors(n, delta, probes, seed=seed)
    return EmbeddingSpec(n, weights, selection.matrix), selection
