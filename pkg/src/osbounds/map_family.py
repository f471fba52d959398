"""Weighted families of maps {0..n-1} -> finite probability spaces.

A family carries one probability weight per map.  The two conditions checked
by :func:`verify_conditions` are exact coordinate marginals and a uniform
bound on pairwise joint probabilities; the smallest feasible pairwise
constant is reported together with a witnessing pair of (index, atom) pairs.

Builtin constructions keep all weights as ``fractions.Fraction`` so that
verification and downstream expectations stay exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from math import prod
from numbers import Rational

import numpy as np

from .errors import DomainTooLarge, ImplicitFamily

WEIGHT_SUM_TOL = 1e-12
PROB_TOL = 1e-9
EXPLICIT_PRODUCT_LIMIT = 10 ** 7
SYMMETRIC_GROUP_LIMIT = 10


def _check_weights(weights, what):
    if any(w < 0 for w in weights):
        raise ValueError(f"{what} must be non-negative")
    total = sum(weights)
    if abs(total - 1) > WEIGHT_SUM_TOL:
        raise ValueError(f"{what} must sum to 1 (got {float(total)!r})")


class WeightedSpace:
    """Finite probability space: atom labels plus one weight per atom."""

    __slots__ = ("atoms", "weights")

    def __init__(self, atoms, weights):
        atoms = tuple(atoms)
        weights = tuple(weights)
        if len(atoms) != len(weights):
            raise ValueError("one weight per atom required")
        if not atoms:
            raise ValueError("space must have at least one atom")
        _check_weights(weights, "atom weights")
        self.atoms = atoms
        self.weights = weights

    @classmethod
    def uniform(cls, size, labels=None):
        if labels is None:
            labels = range(size)
        return cls(labels, (Fraction(1, size),) * size)

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        return f"WeightedSpace(size={len(self.atoms)})"

    @property
    def is_uniform(self):
        w0 = self.weights[0]
        return all(w == w0 for w in self.weights)

    @property
    def is_exact(self):
        return all(isinstance(w, Rational) for w in self.weights)


class MapFamily:
    """A weighted collection of maps {0..n-1} -> atom indices.

    Storage is either an explicit list of maps with weights, or the implicit
    product mode representing all |Omega|^n maps under the product measure
    (used when explicit enumeration would be too large).  Implicit families
    only support sampling.
    """

    def __init__(self, domain_size, codomain, maps=None, weights=None,
                 product_mode=False):
        if domain_size < 1:
            raise ValueError("domain size must be >= 1")
        self.domain_size = domain_size
        self.codomain = codomain
        self._maps_array = None
        if product_mode:
            if maps is not None or weights is not None:
                raise ValueError("product mode takes no explicit maps")
            self.maps = None
            self.weights = None
        else:
            maps = tuple(tuple(m) for m in maps)
            weights = tuple(weights)
            if len(maps) != len(weights):
                raise ValueError("one weight per map required")
            natoms = len(codomain)
            for m in maps:
                if len(m) != domain_size:
                    raise ValueError("map length must equal the domain size")
                if any(not 0 <= j < natoms for j in m):
                    raise ValueError("map entry indexes a missing atom")
            _check_weights(weights, "map weights")
            self.maps = maps
            self.weights = weights

    def __repr__(self):
        mode = "product" if self.maps is None else f"size={len(self.maps)}"
        return f"MapFamily(n={self.domain_size}, {mode})"

    @property
    def explicit(self):
        return self.maps is not None

    @property
    def size(self):
        if self.explicit:
            return len(self.maps)
        return len(self.codomain) ** self.domain_size

    @property
    def uniform_weights(self):
        if not self.explicit:
            return False
        w0 = self.weights[0]
        return all(w == w0 for w in self.weights)

    @property
    def is_exact(self):
        if not self.explicit:
            return self.codomain.is_exact
        return (all(isinstance(w, Rational) for w in self.weights)
                and self.codomain.is_exact)

    def maps_array(self):
        if not self.explicit:
            raise ImplicitFamily("implicit family has no map table")
        if self._maps_array is None:
            self._maps_array = np.asarray(self.maps, dtype=np.intp)
        return self._maps_array

    def sample_maps(self, rng, count):
        """Draw `count` maps as an integer array of shape (count, n)."""
        p = np.asarray([float(w) for w in self.codomain.weights])
        if self.explicit:
            wts = np.asarray([float(w) for w in self.weights])
            wts = wts / wts.sum()
            idx = rng.choice(len(self.maps), size=count, p=wts)
            return self.maps_array()[idx]
        p = p / p.sum()
        return rng.choice(len(self.codomain), size=(count, self.domain_size), p=p)

    def to_json_dict(self):
        if not self.explicit:
            raise ImplicitFamily("implicit family is not serializable")
        return {
            "n": self.domain_size,
            "atoms": list(self.codomain.atoms),
            "weights": [float(w) for w in self.codomain.weights],
            "maps": [list(m) for m in self.maps],
            "map_weights": [float(w) for w in self.weights],
        }

    def to_json(self):
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, obj):
        codomain = WeightedSpace(obj["atoms"], obj["weights"])
        return cls(obj["n"], codomain, obj["maps"], obj["map_weights"])

    @classmethod
    def from_json(cls, text):
        return cls.from_json_dict(json.loads(text))


def affine_family(field):
    """All n^2 maps i -> l*i + m over GF(n), uniformly weighted.

    The domain is indexed by the field elements 0..n-1 and the codomain is
    the uniform space on the same labels.
    """
    n = field.order
    maps = []
    for l in range(n):
        for m in range(n):
            maps.append(tuple(field.add(field.mul(l, i), m) for i in range(n)))
    w = Fraction(1, n * n)
    return MapFamily(n, WeightedSpace.uniform(n), maps, (w,) * (n * n))


def symmetric_group(n):
    """All n! permutations of {0..n-1}, uniformly weighted (n <= 10)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > SYMMETRIC_GROUP_LIMIT:
        raise DomainTooLarge(f"n={n} exceeds the enumeration bound "
                             f"{SYMMETRIC_GROUP_LIMIT}")
    maps = list(permutations(range(n)))
    w = Fraction(1, len(maps))
    return MapFamily(n, WeightedSpace.uniform(n), maps, (w,) * len(maps))


def full_function_family(n, codomain):
    """All maps {0..n-1} -> Omega under the product measure.

    Enumerates explicitly while |Omega|^n stays within the explicit limit,
    otherwise returns an implicit sampler-mode family.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    size = len(codomain) ** n
    if size <= EXPLICIT_PRODUCT_LIMIT:
        maps = list(product(range(len(codomain)), repeat=n))
        weights = [prod(codomain.weights[j] for j in m) for m in maps]
        return MapFamily(n, codomain, maps, weights)
    return MapFamily(n, codomain, product_mode=True)


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the two-condition verification of a map family."""

    marginal_ok: bool
    worst_marginal_deviation: float
    best_CG: object          # Fraction for exact families, float otherwise
    witness: object          # ((i1, j1), (i2, j2)) attaining best_CG, or None
    cardinality_ok: object   # bool for uniform square codomains, else None
    family_size: int
    required_size: object    # n^2 / best_CG when applicable, else None

    def passed(self, cg=None, tol=PROB_TOL):
        ok = self.marginal_ok and self.cardinality_ok is not False
        if cg is not None:
            ok = ok and self.best_CG <= cg + tol
        return ok

    def to_json_dict(self):
        return {
            "marginal_ok": self.marginal_ok,
            "worst_marginal_deviation": float(self.worst_marginal_deviation),
            "best_CG": float(self.best_CG),
            "witness": self.witness,
            "cardinality_ok": self.cardinality_ok,
            "family_size": self.family_size,
            "required_size": None if self.required_size is None
            else float(self.required_size),
        }


def verify_conditions(family, tol=PROB_TOL):
    """Check exact marginals and compute the best pairwise constant.

    Condition checks run on singleton sets only; additivity over the finite
    atomic codomain makes that equivalent to checking all measurable sets.
    Atom pairs with zero product weight are excluded from the maximization.
    """
    if not family.explicit:
        raise ImplicitFamily("condition verification needs an explicit family")
    n = family.domain_size
    mu = family.codomain.weights
    natoms = len(mu)
    zero = Fraction(0) if family.is_exact else 0.0

    marginals = [[zero] * natoms for _ in range(n)]
    for m, w in zip(family.maps, family.weights):
        for i in range(n):
            marginals[i][m[i]] += w
    worst = max(abs(marginals[i][j] - mu[j])
                for i in range(n) for j in range(natoms))
    marginal_ok = worst <= tol

    best = None
    witness = None
    for i1 in range(n):
        for i2 in range(i1 + 1, n):
            joint = {}
            for m, w in zip(family.maps, family.weights):
                key = (m[i1], m[i2])
                joint[key] = joint.get(key, zero) + w
            for (j1, j2), p in joint.items():
                denom = mu[j1] * mu[j2]
                if denom == 0:
                    continue
                ratio = p / denom
                if best is None or ratio > best:
                    best = ratio
                    witness = ((i1, j1), (i2, j2))
    if best is None:
        best = Fraction(1) if family.is_exact else 1.0

    cardinality_ok = None
    required = None
    if natoms == n and family.codomain.is_uniform:
        required = cardinality_lower_bound(n, best)
        cardinality_ok = family.size >= required or bool(
            abs(family.size - required) <= tol)

    return ConditionReport(
        marginal_ok=marginal_ok,
        worst_marginal_deviation=worst,
        best_CG=best,
        witness=witness,
        cardinality_ok=cardinality_ok,
        family_size=family.size,
        required_size=required,
    )


def cardinality_lower_bound(n, cg):
    """Minimal family size n^2 / C_G implied by the pairwise condition."""
    if cg < 1:
        raise ValueError("the pairwise constant is >= 1")
    if isinstance(cg, Rational):
        return Fraction(n * n) / cg
    return n * n / cg
