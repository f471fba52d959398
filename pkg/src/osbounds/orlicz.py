"""Orlicz functions, Legendre conjugation, Luxemburg norms, and the
quantile-integral construction tying order-statistic sums to dual norms.

An Orlicz function here is convex, nondecreasing, vanishes at 0, and may be
capped: ``+inf`` beyond a finite domain value.  Convex piecewise-linear
("grid") functions are closed under Legendre conjugation, and their dual is
computed exactly from the node/slope exchange; smooth closed forms are
conjugated by monotone root-finding on the derivative.
"""

from __future__ import annotations

import bisect as _bisect
import math
from dataclasses import dataclass
from numbers import Rational

import numpy as np
from scipy.integrate import quad

from .errors import BoundViolation, DegenerateQuantile, NotInBall

DEFAULT_GRID_NODES = 2048
LUXEMBURG_REL_TOL = 1e-10
INVERSION_TOL = 1e-12
CONVEXITY_TOL = 1e-12


def _convexify(points):
    """Lower-hull sweep dropping nodes that break slope monotonicity.

    The anchors always lie on a convex curve; only floating-point dust can
    violate convexity, so dropped nodes carry no information.
    """
    hull = []
    for s, v in points:
        while len(hull) >= 2:
            (s1, v1), (s2, v2) = hull[-2], hull[-1]
            if (v2 - v1) * (s - s2) > (v - v2) * (s2 - s1):
                hull.pop()
            else:
                break
        hull.append((s, v))
    return hull


class OrliczFunction:
    """Convex nondecreasing function M on [0, inf) with M(0) = 0.

    kinds:
      power   scale * t**p
      hinge   max(t - theta, 0)
      grid    piecewise-linear through ``nodes``; beyond the last node the
              function continues with ``final_slope`` or is +inf when capped
      custom  arbitrary evaluator, optionally with a derivative and a cap
    """

    def __init__(self, kind, *, params=None, nodes=None, cap=None,
                 final_slope=None, evaluator=None, derivative=None,
                 label=None):
        self.kind = kind
        self.params = dict(params or {})
        self.cap = None if cap is None else float(cap)
        self.label = label or kind
        self._evaluator = evaluator
        self._derivative = derivative
        self._s = self._v = None
        self.final_slope = None

        if kind == "power":
            p, scale = self.params["p"], self.params.get("scale", 1.0)
            if p < 1 or scale <= 0:
                raise ValueError("power kind needs p >= 1 and scale > 0")
            self.params.setdefault("scale", 1.0)
        elif kind == "hinge":
            if self.params["theta"] < 0:
                raise ValueError("hinge offset must be >= 0")
        elif kind == "grid":
            pts = sorted((float(s), float(v)) for s, v in nodes)
            if pts[0] != (0.0, 0.0):
                raise ValueError("grid must start at the node (0, 0)")
            cleaned = [pts[0]]
            for s, v in pts[1:]:
                if s <= cleaned[-1][0]:
                    continue
                if v < cleaned[-1][1]:
                    raise ValueError("grid values must be nondecreasing")
                cleaned.append((s, v))
            cleaned = _convexify(cleaned)
            self._s = np.asarray([p[0] for p in cleaned])
            self._v = np.asarray([p[1] for p in cleaned])
            if self.cap is not None:
                if abs(self.cap - self._s[-1]) > 1e-12 * max(1.0, self.cap):
                    raise ValueError("cap must sit at the last grid node")
                self.cap = float(self._s[-1])
            else:
                last = self._segment_slope(-1)
                fs = last if final_slope is None else float(final_slope)
                if fs < last - CONVEXITY_TOL:
                    raise ValueError("final slope below the last segment slope")
                if fs <= 0 and self._v[-1] == 0:
                    raise ValueError("grid describes the constant zero function")
                self.final_slope = max(fs, last)
        elif kind == "custom":
            if evaluator is None:
                raise ValueError("custom kind needs an evaluator")
        else:
            raise ValueError(f"unknown kind {kind!r}")

    def __repr__(self):
        return f"OrliczFunction({self.label})"

    def _segment_slope(self, k):
        s, v = self._s, self._v
        if len(s) < 2:
            return 0.0
        if k == -1:
            k = len(s) - 2
        return (v[k + 1] - v[k]) / (s[k + 1] - s[k])

    def __call__(self, t):
        t = float(t)
        if t < 0:
            raise ValueError("Orlicz functions are defined on [0, inf)")
        if self.cap is not None and t > self.cap:
            return math.inf
        if self.kind == "power":
            return self.params["scale"] * t ** self.params["p"]
        if self.kind == "hinge":
            return max(t - self.params["theta"], 0.0)
        if self.kind == "grid":
            s, v = self._s, self._v
            if t >= s[-1]:
                if self.cap is not None:
                    return float(v[-1])
                return float(v[-1] + self.final_slope * (t - s[-1]))
            k = _bisect.bisect_right(s, t) - 1
            frac = (t - s[k]) / (s[k + 1] - s[k])
            return float(v[k] + frac * (v[k + 1] - v[k]))
        return self._evaluator(t)

    def eval_many(self, ts):
        """Vectorized evaluation (used by the norm bisection)."""
        ts = np.asarray(ts, dtype=float)
        if self.kind == "grid":
            out = np.interp(ts, self._s, self._v)
            over = ts > self._s[-1]
            if np.any(over):
                if self.cap is not None:
                    out = np.where(over, np.inf, out)
                else:
                    out = np.where(
                        over,
                        self._v[-1] + self.final_slope * (ts - self._s[-1]),
                        out)
            return out
        return np.asarray([self(t) for t in ts])

    def derivative_at(self, t):
        """Right-derivative where available, None when unknown."""
        t = float(t)
        if self.kind == "power":
            p, scale = self.params["p"], self.params["scale"]
            if t == 0.0:
                return 0.0 if p > 1 else scale
            return scale * p * t ** (p - 1)
        if self.kind == "hinge":
            return 0.0 if t < self.params["theta"] else 1.0
        if self.kind == "grid":
            s = self._s
            if t >= s[-1]:
                return math.inf if self.cap is not None else self.final_slope
            k = _bisect.bisect_right(s, t) - 1
            return self._segment_slope(k)
        if self._derivative is not None:
            return self._derivative(t)
        return None

    @property
    def sup_slope(self):
        """Limiting slope of M; the conjugate is +inf beyond it."""
        if self.kind == "power":
            return math.inf if self.params["p"] > 1 else self.params["scale"]
        if self.kind == "hinge":
            return 1.0
        if self.kind == "grid":
            return math.inf if self.cap is not None else self.final_slope
        if self.cap is not None:
            return math.inf
        return self.params.get("sup_slope", math.inf)

    def conjugate(self):
        return conjugate(self)

    def as_grid(self):
        """Piecewise-linear view of an already piecewise-linear function."""
        if self.kind == "grid":
            return self
        if self.kind == "hinge":
            theta = self.params["theta"]
            nodes = [(0.0, 0.0)] if theta == 0 else [(0.0, 0.0), (theta, 0.0)]
            return OrliczFunction("grid", nodes=nodes, final_slope=1.0,
                                  label=self.label)
        if self.kind == "power" and self.params["p"] == 1:
            return OrliczFunction("grid", nodes=[(0.0, 0.0)],
                                  final_slope=self.params["scale"],
                                  label=self.label)
        raise ValueError(f"{self.label} is not piecewise linear")

    def to_json_dict(self):
        if self.kind == "grid":
            grid = [[float(s), float(v)] for s, v in zip(self._s, self._v)]
            out = {"kind": "grid", "params": {}, "grid": grid, "cap": self.cap}
            if self.cap is None:
                out["params"]["final_slope"] = self.final_slope
            return out
        if self.kind in ("power", "hinge"):
            return {"kind": self.kind, "params": dict(self.params),
                    "grid": None, "cap": self.cap}
        raise ValueError("custom functions are not serializable")

    @classmethod
    def from_json_dict(cls, obj):
        kind = obj["kind"]
        if kind == "grid":
            params = obj.get("params") or {}
            return cls("grid", nodes=obj["grid"], cap=obj.get("cap"),
                       final_slope=params.get("final_slope"))
        return cls(kind, params=obj.get("params"), cap=obj.get("cap"))


def power(p, scale=1.0):
    """M(t) = scale * t**p."""
    return OrliczFunction("power", params={"p": p, "scale": scale},
                          label=f"{scale}*t^{p}")


def hinge(theta):
    """M(t) = max(t - theta, 0)."""
    return OrliczFunction("hinge", params={"theta": theta},
                          label=f"(t-{theta})+")


def from_grid(nodes, cap=None, final_slope=None, label="grid"):
    return OrliczFunction("grid", nodes=nodes, cap=cap,
                          final_slope=final_slope, label=label)


def _grid_dual(M):
    s, v = M._s, M._v
    nodes = [(0.0, 0.0)]
    for k in range(len(s) - 1):
        slope = M._segment_slope(k)
        if slope > nodes[-1][0]:
            nodes.append((slope, slope * s[k] - v[k]))
    if M.cap is not None:
        # +inf beyond the cap: the dual grows linearly with slope cap forever.
        return OrliczFunction("grid", nodes=nodes, final_slope=float(s[-1]),
                              label=f"conj({M.label})")
    fs = M.final_slope
    if fs > nodes[-1][0]:
        nodes.append((fs, fs * s[-1] - v[-1]))
    return OrliczFunction("grid", nodes=nodes, cap=fs,
                          label=f"conj({M.label})")


def _smooth_dual(M):
    cap = M.cap

    def argmax_t(x):
        if x <= 0:
            return 0.0
        if cap is not None:
            hi = cap
            d = M.derivative_at(hi)
            if d is not None and d < x:
                return hi
        else:
            hi = 1.0
            guard = 0
            while M.derivative_at(hi) < x:
                hi *= 2.0
                guard += 1
                if guard > 1024:
                    raise RuntimeError("derivative never reaches the slope")
        lo = 0.0
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            if M.derivative_at(mid) < x:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def evaluate(x):
        x = float(x)
        if x < 0:
            raise ValueError("conjugate evaluated at a negative point")
        t = argmax_t(x)
        return x * t - M(t)

    sup = M.sup_slope
    cap_out = sup if (sup is not None and math.isfinite(sup)) else None
    return OrliczFunction("custom", evaluator=evaluate, derivative=argmax_t,
                          cap=cap_out, label=f"conj({M.label})")


def _search_dual(M):
    cap = M.cap
    phi_ratio = (math.sqrt(5) - 1) / 2

    def evaluate(x):
        x = float(x)
        if x <= 0:
            return 0.0
        hi = cap if cap is not None else 1.0
        if cap is None:
            guard = 0
            while x * (2 * hi) - M(2 * hi) > x * hi - M(hi):
                hi *= 2.0
                guard += 1
                if guard > 1024:
                    raise RuntimeError("objective keeps increasing")
            hi *= 2.0
        lo = 0.0
        a, b = lo, hi
        c = b - phi_ratio * (b - a)
        d = a + phi_ratio * (b - a)
        fc = x * c - M(c)
        fd = x * d - M(d)
        for _ in range(200):
            if fc < fd:
                a, c, fc = c, d, fd
                d = a + phi_ratio * (b - a)
                fd = x * d - M(d)
            else:
                b, d, fd = d, c, fc
                c = b - phi_ratio * (b - a)
                fc = x * c - M(c)
        t = 0.5 * (a + b)
        return x * t - M(t)

    sup = M.sup_slope
    cap_out = sup if (sup is not None and math.isfinite(sup)) else None
    return OrliczFunction("custom", evaluator=evaluate, cap=cap_out,
                          label=f"conj({M.label})")


def conjugate(M):
    """Legendre transform sup_t (x t - M(t)), again an Orlicz function.

    Piecewise-linear inputs dualize exactly (node/slope exchange, caps and
    final slopes swap roles); differentiable closed forms are conjugated
    per query by monotone root-finding on M'(t) = x.
    """
    if M.kind == "grid":
        return _grid_dual(M)
    if M.kind == "hinge" or (M.kind == "power" and M.params["p"] == 1):
        return _grid_dual(M.as_grid())
    if M.kind == "power":
        return _smooth_dual(M)
    if M._derivative is not None:
        return _smooth_dual(M)
    return _search_dual(M)


def luxemburg_norm(M, x, rel_tol=LUXEMBURG_REL_TOL):
    """inf{lam > 0 : sum_i M(|x_i| / lam) <= 1} by bisection on lam.

    A cap on M acts as a feasibility boundary: coordinates beyond the cap
    make the sum infinite.  Returns 0.0 for the zero vector.
    """
    ax = np.abs(np.asarray(x, dtype=float))
    ax = ax[ax > 0]
    if ax.size == 0:
        return 0.0
    vector = M.kind == "grid"

    def phi(lam):
        ts = ax / lam
        if vector:
            return float(M.eval_many(ts).sum())
        total = 0.0
        for t in ts:
            val = M(t)
            if val == math.inf:
                return math.inf
            total += val
        return total

    hi = float(ax.max())
    if M.cap is not None:
        hi = max(hi, float(ax.max()) / M.cap)
    guard = 0
    while phi(hi) > 1.0:
        hi *= 2.0
        guard += 1
        if guard > 300:
            raise RuntimeError("failed to bracket the norm from above")
    lo = hi / 2.0
    guard = 0
    while phi(lo) <= 1.0:
        hi = lo
        lo /= 2.0
        guard += 1
        if guard > 2000:
            return hi
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if phi(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def satisfies_embedding_hypotheses(M):
    """Whether M is flagged as strictly convex, smooth and strictly 2-concave.

    Only the built-in power family carries a definite answer (True exactly
    for exponents strictly between 1 and 2); other functions return None and
    are accepted unvalidated.
    """
    if M.kind == "power":
        return 1 < M.params["p"] < 2
    if M.kind == "hinge":
        return False
    return None


class QuantileFunction:
    """Nonincreasing, non-negative function on [0, 1] with a finite integral.

    Step representations keep exact partial integrals; closed forms carry an
    exact antiderivative so no quadrature enters the norm constructions.
    """

    def __init__(self, kind, *, breakpoints=None, levels=None, value_fn=None,
                 integral_fn=None, label=None):
        self.kind = kind
        self.label = label or kind
        if kind == "step":
            bs = tuple(breakpoints)
            ls = tuple(levels)
            if len(bs) != len(ls) + 1 or bs[0] != 0 or bs[-1] != 1:
                raise ValueError("step breakpoints must run from 0 to 1")
            if any(bs[k] >= bs[k + 1] for k in range(len(ls))):
                raise ValueError("breakpoints must increase strictly")
            if any(l < 0 for l in ls):
                raise ValueError("levels must be non-negative")
            if any(ls[k] < ls[k + 1] for k in range(len(ls) - 1)):
                raise ValueError("levels must be nonincreasing")
            self.breakpoints = bs
            self.levels = ls
        elif kind == "closed":
            if value_fn is None or integral_fn is None:
                raise ValueError("closed kind needs value and integral callables")
            self._value_fn = value_fn
            self._integral_fn = integral_fn
        else:
            raise ValueError(f"unknown kind {kind!r}")

    def __repr__(self):
        return f"QuantileFunction({self.label})"

    @classmethod
    def step(cls, breakpoints, levels, label="step"):
        return cls("step", breakpoints=breakpoints, levels=levels, label=label)

    @classmethod
    def closed(cls, value_fn, integral_fn, label="closed"):
        return cls("closed", value_fn=value_fn, integral_fn=integral_fn,
                   label=label)

    def value(self, t):
        if t < 0:
            raise ValueError("quantile argument must be >= 0")
        if t >= 1:
            return 0.0
        if self.kind == "step":
            for k in range(len(self.levels)):
                if t < self.breakpoints[k + 1]:
                    return self.levels[k]
            return self.levels[-1]
        return self._value_fn(t)

    def integral(self, beta):
        """u(beta) = integral of the quantile over [0, min(beta, 1)]."""
        if beta <= 0:
            return 0.0
        if beta > 1:
            beta = 1
        if self.kind == "step":
            acc = 0
            for k, level in enumerate(self.levels):
                lo, hi = self.breakpoints[k], self.breakpoints[k + 1]
                if beta <= lo:
                    break
                acc = acc + level * ((hi if hi <= beta else beta) - lo)
            return acc
        return self._integral_fn(beta)

    @property
    def mean(self):
        return self.integral(1)

    def integral_inverse(self, s, tol=INVERSION_TOL):
        """Minimal beta with u(beta) >= s (bisection for closed forms)."""
        if s <= 0:
            return 0.0
        u_total = self.integral(1)
        if s > u_total:
            if s <= float(u_total) * (1 + 1e-9) + 1e-300:
                s = u_total
            else:
                raise ValueError("target exceeds the total integral")
        if self.kind == "step":
            acc = 0
            for k, level in enumerate(self.levels):
                lo, hi = self.breakpoints[k], self.breakpoints[k + 1]
                seg = level * (hi - lo)
                if acc + seg >= s:
                    if level == 0:
                        return lo
                    beta = lo + (s - acc) / level
                    return min(beta, hi)
                acc = acc + seg
            return 1.0
        lo, hi = 0.0, 1.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.integral(mid) >= s:
                hi = mid
            else:
                lo = mid
        return hi

    def tail_measure(self, y, tol=INVERSION_TOL):
        """Measure of {t in [0, 1] : X*(t) >= y}."""
        if y <= 0:
            return 1.0
        if self.kind == "step":
            acc = 0
            for k, level in enumerate(self.levels):
                if level >= y:
                    acc = acc + (self.breakpoints[k + 1] - self.breakpoints[k])
            return acc
        if self.value(1 - tol) >= y:
            return 1.0
        lo, hi = 0.0, 1.0
        if not self.value(lo + tol) >= y:
            return 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.value(mid) >= y:
                lo = mid
            else:
                hi = mid
        return lo

    def truncated_mean_above(self, y):
        """E[|X| ; |X| >= y] computed as the integral over the upper tail."""
        return self.integral(self.tail_measure(y))


def mstar_from_rv(xstar, ell, num_nodes=DEFAULT_GRID_NODES):
    """Dual function defined by M*(u(beta)) = beta / ell on [0, u(1)].

    The increasing map u(beta) = integral_0^beta X* is inverted through its
    graph: step quantiles yield the exact piecewise-linear dual, closed
    forms are anchored on a node set clustered at both endpoints.  Flat
    stretches of u resolve to the minimal preimage, and the result is capped
    at u(1) = E|X| (+inf beyond).
    """
    if not isinstance(ell, int) or ell < 1:
        raise ValueError("ell must be a positive integer")
    u_total = xstar.integral(1)
    if u_total <= 0:
        raise DegenerateQuantile("quantile function integrates to zero")
    if xstar.kind == "step":
        betas = list(xstar.breakpoints)
    else:
        half = max(num_nodes // 2, 8)
        low = np.geomspace(1e-9, 1.0, half)
        high = 1.0 - np.geomspace(1e-9, 0.5, half)
        probes = np.arange(1, 10) / 10.0
        betas = np.unique(np.concatenate(([0.0, 1.0], low, high, probes)))
    nodes = []
    last_s = -1.0
    for b in betas:
        s = float(xstar.integral(b))
        if s > last_s + 1e-15 * max(1.0, s) or not nodes:
            nodes.append((s, float(b) / ell))
            last_s = s
    return OrliczFunction("grid", nodes=nodes, cap=nodes[-1][0],
                          label=f"dual[{xstar.label},ell={ell}]")


def m_from_rv(dist, ell, s):
    """Double integral over t in [0, s] of the truncated mean above 1/(t ell).

    Accepts a distribution object carrying a ``quantile`` attribute or a
    QuantileFunction directly.  Agrees with conjugate(mstar_from_rv(...))
    up to grid tolerance.
    """
    q = getattr(dist, "quantile", dist)
    if not isinstance(ell, int) or ell < 1:
        raise ValueError("ell must be a positive integer")
    if s < 0:
        raise ValueError("s must be >= 0")
    if s == 0:
        return 0.0

    def integrand(t):
        if t <= 0:
            return 0.0
        return float(q.truncated_mean_above(1.0 / (t * ell)))

    points = None
    top = q.value(0)
    if math.isfinite(top) and top > 0:
        kink = 1.0 / (ell * top)
        if 0 < kink < s:
            points = [kink]
    val, _ = quad(integrand, 0.0, s, points=points, limit=200)
    return val


def _largest_feasible(Mstar, room, hi_start=1.0):
    """Largest t with Mstar(t) <= room (monotone bisection)."""
    if room <= 0:
        return 0.0
    hi = Mstar.cap if Mstar.cap is not None else hi_start
    if Mstar.cap is None:
        guard = 0
        while Mstar(hi) <= room:
            hi *= 2.0
            guard += 1
            if guard > 300:
                return hi
    elif Mstar(hi) <= room:
        return hi
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if Mstar(mid) <= room:
            lo = mid
        else:
            hi = mid
    return lo


def duality_gap(f, M, search_budget=20_000):
    """Certified bracket for sup{<f, g> : sum M*(|g_i|) <= 1}.

    Runs budgeted coordinate ascent from |f|-proportional starts over nested
    sparse supports and returns (best found value, 2 * ||f||_M).  The first
    component is a certified lower bound of the supremum; the second is its
    proven upper bound.
    """
    f = np.asarray(f, dtype=float)
    if f.size == 0 or not np.any(f):
        return 0.0, 0.0
    norm = luxemburg_norm(M, f)
    upper = 2.0 * norm
    mstar = conjugate(M)
    af = np.abs(f)
    budget = int(search_budget)

    def total(g):
        nonlocal budget
        budget -= 1
        tot = 0.0
        for gi in g:
            if gi == 0:
                continue
            val = mstar(gi)
            if val == math.inf:
                return math.inf
            tot += val
        return tot

    def max_scale(direction):
        lo, hi = 0.0, 1.0
        guard = 0
        while total(direction * hi) <= 1.0:
            lo = hi
            hi *= 2.0
            guard += 1
            if guard > 200 or hi > 1e15:
                return lo
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if total(direction * mid) <= 1.0:
                lo = mid
            else:
                hi = mid
        return lo

    order = np.argsort(-af)
    best = 0.0
    for k in range(1, f.size + 1):
        if budget <= 0:
            break
        mask = np.zeros(f.size, dtype=bool)
        mask[order[:k]] = True
        direction = np.where(mask, af, 0.0)
        if not np.any(direction):
            continue
        g = direction * max_scale(direction)
        for _ in range(3):
            if budget <= 0:
                break
            improved = False
            for i in order[:k]:
                rest = g.copy()
                rest[i] = 0.0
                room = 1.0 - total(rest)
                gi = _largest_feasible(mstar, room,
                                       hi_start=max(g[i], 1.0))
                if gi > g[i] * (1 + 1e-12) + 1e-300:
                    improved = True
                g[i] = max(g[i], gi)
            if not improved:
                break
        val = float(np.dot(af, g))
        best = max(best, val)
    if best > upper * (1 + 1e-9):
        raise BoundViolation(
            f"dual search value {best!r} exceeds 2*norm {upper!r}")
    return best, upper


@dataclass(frozen=True)
class SandwichReport:
    """Certified dilation placing a unit-ball point inside the convex body."""

    factor: float
    lambda_big: float
    lambda_small: float
    split_rank: int
    k_indices: tuple
    dual_sum: float


def sandwich_check(xstar, ell, n, z, tol=1e-9):
    """Constructive membership certificate with dilation factor <= 3.

    Splits the sorted point at dual value 1/n: small coordinates are
    dominated by the flat comparison point built from u(ell/n); large ones
    are rounded to integer grid points k_i/n <= M*(z_i) <= (k_i+1)/n of the
    generating hull.  Raises NotInBall when the dual values sum beyond 1.
    """
    if not isinstance(ell, int) or not 1 <= ell <= n:
        raise ValueError("need an integer 1 <= ell <= n")
    if len(z) != n:
        raise ValueError("point dimension must equal n")
    az = [abs(float(v)) for v in z]
    for i in range(n - 1):
        if az[i] < az[i + 1] - 1e-12 * max(1.0, az[i + 1]):
            raise ValueError("coordinates must be sorted by decreasing modulus")
    u_total = float(xstar.integral(1))
    if u_total <= 0:
        raise DegenerateQuantile("quantile function integrates to zero")
    if any(v > u_total * (1 + tol) + tol for v in az):
        raise NotInBall("a coordinate exceeds the dual-function domain")

    betas = [float(xstar.integral_inverse(min(v, u_total))) for v in az]
    dual_vals = [b / ell for b in betas]
    dual_sum = sum(dual_vals)
    if dual_sum > 1 + tol:
        raise NotInBall(f"dual values sum to {dual_sum!r} > 1")

    flat = float(xstar.integral(ell / n))
    lam_small = 0.0
    lam_big = 0.0
    rank = 0
    ks = []
    for v, m in zip(az, dual_vals):
        if m > (1.0 / n) * (1 + 1e-12):
            rank += 1
            k = max(1, math.floor(n * m))
            ks.append(k)
            anchor = float(xstar.integral(min(ell * k / n, 1.0)))
            lam_big = max(lam_big, v / anchor)
        elif v > 0:
            lam_small = max(lam_small, v / flat)
    return SandwichReport(
        factor=lam_big + lam_small,
        lambda_big=lam_big,
        lambda_small=lam_small,
        split_rank=rank,
        k_indices=tuple(ks),
        dual_sum=dual_sum,
    )
