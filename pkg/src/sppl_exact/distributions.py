"""Primitive one-dimensional distributions.

``DistR`` is a continuous CDF truncated to an interval, ``DistI`` a discrete
CDF whose atoms lie on the integers (or at a single point for ``Atomic``)
restricted to an interval, and ``DistS`` a finite weighting of strings.
CDF families are evaluated with ``scipy.special`` kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import outcomes as oc
from .outcomes import INF, Outcomes


def _fmt(x: float) -> float:
    # Parameter rounding used in structural keys.
    return float("%.12g" % x) if math.isfinite(x) else x


# ==============================================================================
# CDF families.

class Cdf:
    """A univariate CDF with survival function and quantiles.

    Continuous families provide ``pdf``; discrete families ``pmf``.
    Functions accept floats or numpy arrays.
    """

    name = "cdf"
    continuous = True
    integer = False

    def params(self) -> tuple:
        raise NotImplementedError

    def key(self) -> tuple:
        return (self.name,) + tuple(_fmt(p) for p in self.params())

    def __eq__(self, other):
        return type(self) is type(other) and self.params() == other.params()

    def __hash__(self):
        return hash((self.name,) + self.params())

    def __repr__(self):
        return "%s(%s)" % (type(self).__name__, ", ".join(repr(p) for p in self.params()))

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def isf(self, q):
        return self.ppf(1.0 - np.asarray(q))

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))


class Normal(Cdf):
    name = "normal"

    def __init__(self, loc=0.0, scale=1.0):
        if not scale > 0:
            raise ValueError("normal scale must be positive")
        self.loc, self.scale = float(loc), float(scale)

    def params(self):
        return (self.loc, self.scale)

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.loc) / self.scale)

    def sf(self, x):
        return special.ndtr(-(np.asarray(x, dtype=float) - self.loc) / self.scale)

    def ppf(self, q):
        return self.loc + self.scale * special.ndtri(q)

    def isf(self, q):
        return self.loc - self.scale * special.ndtri(q)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return np.exp(-0.5 * z * z) / (self.scale * math.sqrt(2 * math.pi))

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return -0.5 * z * z - math.log(self.scale * math.sqrt(2 * math.pi))

    def median(self):
        return self.loc


class Uniform(Cdf):
    name = "uniform"

    def __init__(self, a=0.0, b=1.0):
        if not a < b:
            raise ValueError("uniform needs a < b")
        self.a, self.b = float(a), float(b)

    def params(self):
        return (self.a, self.b)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def sf(self, x):
        return np.clip((self.b - np.asarray(x, dtype=float)) / (self.b - self.a), 0.0, 1.0)

    def ppf(self, q):
        return self.a + np.asarray(q) * (self.b - self.a)

    def isf(self, q):
        return self.b - np.asarray(q) * (self.b - self.a)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def median(self):
        return 0.5 * (self.a + self.b)


class Gamma(Cdf):
    name = "gamma"

    def __init__(self, a, scale=1.0):
        if not (a > 0 and scale > 0):
            raise ValueError("gamma shape and scale must be positive")
        self.a, self.scale = float(a), float(scale)

    def params(self):
        return (self.a, self.scale)

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return special.gammainc(self.a, x / self.scale)

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return special.gammaincc(self.a, x / self.scale)

    def ppf(self, q):
        return self.scale * special.gammaincinv(self.a, q)

    def isf(self, q):
        return self.scale * special.gammainccinv(self.a, q)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            y = x / self.scale
            out = special.xlogy(self.a - 1, y) - y - special.gammaln(self.a) - math.log(self.scale)
        return np.where(x < 0, -np.inf, out)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def median(self):
        return float(self.ppf(0.5))


class Beta(Cdf):
    name = "beta"

    def __init__(self, a, b):
        if not (a > 0 and b > 0):
            raise ValueError("beta parameters must be positive")
        self.a, self.b = float(a), float(b)

    def params(self):
        return (self.a, self.b)

    def cdf(self, x):
        return special.betainc(self.a, self.b, np.clip(np.asarray(x, dtype=float), 0.0, 1.0))

    def sf(self, x):
        return special.betainc(self.b, self.a, np.clip(1.0 - np.asarray(x, dtype=float), 0.0, 1.0))

    def ppf(self, q):
        return special.betaincinv(self.a, self.b, q)

    def isf(self, q):
        return 1.0 - special.betaincinv(self.b, self.a, q)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (special.xlogy(self.a - 1, x) + special.xlog1py(self.b - 1, -x)
                   - special.betaln(self.a, self.b))
        return np.where((x < 0) | (x > 1), -np.inf, out)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def median(self):
        return float(self.ppf(0.5))


class Discrete(Cdf):
    """Discrete family with atoms on the integers."""

    continuous = False
    integer = True
    support_lo = 0.0
    support_hi = INF

    def pmf(self, k):
        k = np.asarray(k, dtype=float)
        return np.where(k == np.floor(k), self.cdf(k) - self.cdf(k - 1), 0.0)

    def ppf(self, q):
        """Smallest integer k with q <= cdf(k), by vectorized bisection."""
        q0 = np.asarray(q, dtype=float)
        q = np.atleast_1d(q0)
        lo = np.full(q.shape, self.support_lo - 1)
        hi = np.full(q.shape, self.support_hi if math.isfinite(self.support_hi) else self.support_lo + 1)
        while True:
            short = self.cdf(hi) < q
            if not short.any() or math.isfinite(self.support_hi):
                break
            hi = np.where(short, 2 * hi + 1, hi)
        # Invariant: cdf(lo) < q <= cdf(hi).
        while True:
            gap = hi - lo > 1
            if not gap.any():
                break
            mid = np.floor((lo + hi) / 2)
            ok = self.cdf(mid) >= q
            hi = np.where(gap & ok, mid, hi)
            lo = np.where(gap & ~ok, mid, lo)
        return hi.reshape(q0.shape)


class Poisson(Discrete):
    name = "poisson"

    def __init__(self, mu):
        if not mu > 0:
            raise ValueError("poisson rate must be positive")
        self.mu = float(mu)

    def params(self):
        return (self.mu,)

    def cdf(self, x):
        k = np.floor(np.asarray(x, dtype=float))
        with np.errstate(invalid="ignore"):
            out = special.pdtr(np.maximum(k, 0), self.mu)
        return np.where(k < 0, 0.0, np.where(np.isinf(k) & (k > 0), 1.0, out))

    def sf(self, x):
        k = np.floor(np.asarray(x, dtype=float))
        with np.errstate(invalid="ignore"):
            out = special.pdtrc(np.maximum(k, 0), self.mu)
        return np.where(k < 0, 1.0, np.where(np.isinf(k) & (k > 0), 0.0, out))

    def pmf(self, k):
        k = np.asarray(k, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.exp(special.xlogy(k, self.mu) - self.mu - special.gammaln(k + 1))
        return np.where((k >= 0) & (k == np.floor(k)) & np.isfinite(k), out, 0.0)


class Binomial(Discrete):
    name = "binomial"

    def __init__(self, n, p):
        if int(n) != n or n < 0 or not 0 <= p <= 1:
            raise ValueError("binomial needs integer n >= 0 and p in [0, 1]")
        self.n, self.p = int(n), float(p)
        self.support_hi = float(self.n)

    def params(self):
        return (float(self.n), self.p)

    def cdf(self, x):
        k = np.floor(np.asarray(x, dtype=float))
        with np.errstate(invalid="ignore"):
            out = special.bdtr(np.clip(k, 0, self.n), self.n, self.p)
        return np.where(k < 0, 0.0, np.where(k >= self.n, 1.0, out))

    def sf(self, x):
        k = np.floor(np.asarray(x, dtype=float))
        with np.errstate(invalid="ignore"):
            out = special.bdtrc(np.clip(k, 0, self.n), self.n, self.p)
        return np.where(k < 0, 1.0, np.where(k >= self.n, 0.0, out))

    def pmf(self, k):
        k = np.asarray(k, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            logc = special.gammaln(self.n + 1) - special.gammaln(k + 1) - special.gammaln(self.n - k + 1)
            out = np.exp(logc + special.xlogy(k, self.p) + special.xlog1py(self.n - k, -self.p))
        return np.where((k >= 0) & (k <= self.n) & (k == np.floor(k)), out, 0.0)


class Bernoulli(Discrete):
    name = "bernoulli"

    def __init__(self, p):
        if not 0 <= p <= 1:
            raise ValueError("bernoulli p must lie in [0, 1]")
        self.p = float(p)
        self.support_hi = 1.0

    def params(self):
        return (self.p,)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, np.where(x < 1, 1.0 - self.p, 1.0))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 1.0, np.where(x < 1, self.p, 0.0))

    def pmf(self, k):
        k = np.asarray(k, dtype=float)
        return np.where(k == 0, 1.0 - self.p, np.where(k == 1, self.p, 0.0))


class Atomic(Cdf):
    """Point mass at ``loc``: the step CDF 1[loc <= r]."""

    name = "atomic"
    continuous = False

    def __init__(self, loc):
        if not math.isfinite(loc):
            raise ValueError("atom location must be finite")
        self.loc = float(loc)
        self.integer = self.loc == math.floor(self.loc)

    def params(self):
        return (self.loc,)

    def cdf(self, x):
        return np.where(np.asarray(x, dtype=float) >= self.loc, 1.0, 0.0)

    def sf(self, x):
        return np.where(np.asarray(x, dtype=float) >= self.loc, 0.0, 1.0)

    def pmf(self, k):
        return np.where(np.asarray(k, dtype=float) == self.loc, 1.0, 0.0)

    def ppf(self, q):
        return np.full(np.shape(q), self.loc)

    def isf(self, q):
        return np.full(np.shape(q), self.loc)


FAMILIES = {c.name: c for c in (Normal, Uniform, Gamma, Beta, Poisson, Binomial, Bernoulli, Atomic)}


def make_cdf(name: str, params) -> Cdf:
    return FAMILIES[name](*params)


# ==============================================================================
# Distributions.

class Distribution:
    __slots__ = ()


def _f(x) -> float:
    return float(np.asarray(x))


@dataclass(frozen=True, eq=False)
class DistR(Distribution):
    cdf: Cdf
    lo: float = -INF
    hi: float = INF

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not self.cdf.continuous:
            raise ValueError("DistR needs a continuous CDF")
        if not self.lo < self.hi or not self.mass_between(self.lo, self.hi) > 0:
            raise ValueError("DistR truncation must have positive measure")

    def mass_between(self, a: float, b: float) -> float:
        """F(b) - F(a), using the survival function in the upper tail."""
        if a >= b:
            return 0.0
        F = self.cdf
        fa = _f(F.cdf(a))
        if fa > 0.5:
            return max(_f(F.sf(a)) - _f(F.sf(b)), 0.0)
        return max(_f(F.cdf(b)) - fa, 0.0)

    def key(self):
        return ("R", self.cdf.key(), _fmt(self.lo), _fmt(self.hi))


@dataclass(frozen=True, eq=False)
class DistI(Distribution):
    """Discrete distribution restricted to the interval between lo and hi."""

    cdf: Cdf
    lo: float = -INF
    hi: float = INF
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if self.cdf.continuous:
            raise ValueError("DistI needs a discrete CDF")
        if not self.raw_mass(self.support) > 0:
            raise ValueError("DistI truncation must have positive mass")

    @property
    def support(self) -> Outcomes:
        return oc.interval(self.lo, self.hi, self.lo_open, self.hi_open)

    def _upper(self, r: float, strict: bool) -> float:
        """P(X < r) if strict else P(X <= r)."""
        F = self.cdf
        if r == INF:
            return 1.0
        if r == -INF:
            return 0.0
        if F.integer:
            # The adjusted endpoint: floor(r) - 1[r integer and bound strict].
            rt = math.floor(r) - (1 if (r == math.floor(r) and strict) else 0)
            return _f(F.cdf(rt))
        if strict:
            return _f(F.cdf(r)) - _f(F.pmf(r))
        return _f(F.cdf(r))

    def raw_mass(self, v: Outcomes) -> float:
        """Untruncated probability of the real part of v."""
        total = 0.0
        for lo, lo_open, hi, hi_open in oc.real_pieces(v):
            if lo == hi:
                total += _f(self.cdf.pmf(lo))
            else:
                total += max(self._upper(hi, hi_open) - self._upper(lo, not lo_open), 0.0)
        return total

    def key(self):
        return ("I", self.cdf.key(), _fmt(self.lo), _fmt(self.hi), self.lo_open, self.hi_open)


@dataclass(frozen=True, eq=False)
class DistS(Distribution):
    """Weighted strings; weights are normalized and zero weights dropped."""

    weights: tuple  # of (string, weight)

    def __post_init__(self):
        pairs = {}
        for s, w in self.weights:
            if not isinstance(s, str):
                raise TypeError("DistS outcomes must be strings")
            if w < 0:
                raise ValueError("DistS weights must be nonnegative")
            pairs[s] = pairs.get(s, 0.0) + float(w)
        total = sum(pairs.values())
        if not total > 0:
            raise ValueError("DistS needs positive total weight")
        items = tuple(sorted((s, w / total) for s, w in pairs.items() if w > 0))
        object.__setattr__(self, "weights", items)

    @classmethod
    def from_normalized(cls, weights):
        """Rebuild from already-normalized weights without rescaling them."""
        d = object.__new__(cls)
        object.__setattr__(d, "weights", tuple(sorted((str(s), float(w)) for s, w in weights if w > 0)))
        return d

    def key(self):
        return ("S",) + tuple((s, _fmt(w)) for s, w in self.weights)


def atom(r) -> Distribution:
    """Point mass at a real or a string."""
    if isinstance(r, str):
        return DistS(((r, 1.0),))
    r = float(r)
    return DistI(Atomic(r), r - 0.5, r, True, False)


def is_atom(d: Distribution):
    """The single outcome of a point-mass distribution, or None."""
    if isinstance(d, DistS) and len(d.weights) == 1:
        return d.weights[0][0]
    if isinstance(d, DistI) and isinstance(d.cdf, Atomic):
        return d.cdf.loc
    return None


# ==============================================================================
# Valuation.

def dist_prob(d: Distribution, v: Outcomes) -> float:
    """Probability that a draw from d lands in v."""
    if isinstance(d, DistS):
        ss, sc = oc.string_set(v)
        ss = set(ss)
        # Sum the included weights directly so an empty selection is exactly 0.
        return min(math.fsum(w for s, w in d.weights if (s in ss) != sc), 1.0)
    if isinstance(d, DistR):
        total = 0.0
        for lo, _, hi, _ in oc.real_pieces(v):
            a, b = max(lo, d.lo), min(hi, d.hi)
            if a < b:
                total += d.mass_between(a, b)
        return min(total / d.mass_between(d.lo, d.hi), 1.0)
    if isinstance(d, DistI):
        z = d.raw_mass(d.support)
        num = d.raw_mass(oc.intersection([oc.real_part(v), d.support]))
        return min(num / z, 1.0)
    raise TypeError("unknown distribution %r" % (d,))


def dist_logprob(d: Distribution, v: Outcomes) -> float:
    p = dist_prob(d, v)
    return math.log(p) if p > 0 else -INF


def dist_density(d: Distribution, o) -> tuple:
    """Generalized density as a (degree, value) pair."""
    deg, logv = dist_logdensity(d, o)
    return deg, (math.exp(logv) if logv > -INF else 0.0)


def dist_logdensity(d: Distribution, o) -> tuple:
    if isinstance(d, DistR):
        if isinstance(o, str):
            return 1, -INF
        o = float(o)
        if not d.lo <= o <= d.hi:
            return 1, -INF
        lp = _f(d.cdf.logpdf(o))
        return 1, lp - math.log(d.mass_between(d.lo, d.hi))
    if isinstance(o, str):
        w = dist_prob(d, oc.strings(o))
    else:
        w = dist_prob(d, oc.points(o))
    return (0, math.log(w)) if w > 0 else (1, -INF)


def dist_sample(d: Distribution, u: float):
    """Inverse-CDF draw from d given a uniform number u in [0, 1)."""
    return dist_sample_array(d, np.array([u]))[0]


def dist_sample_array(d: Distribution, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if isinstance(d, DistS):
        cum = np.cumsum([w for _, w in d.weights])
        idx = np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)
        labels = np.array([s for s, _ in d.weights], dtype=object)
        return labels[idx]
    F = d.cdf
    if isinstance(d, DistR):
        flo = _f(F.cdf(d.lo))
        if flo > 0.5:
            slo, shi = _f(F.sf(d.lo)), _f(F.sf(d.hi))
            x = F.isf(slo - u * (slo - shi))
        else:
            fhi = _f(F.cdf(d.hi))
            x = F.ppf(flo + u * (fhi - flo))
        return np.clip(np.asarray(x, dtype=float), d.lo, d.hi)
    if isinstance(F, Atomic):
        return np.full(u.shape, F.loc)
    # Discrete: invert between the mass below the support and the mass up to hi.
    below = d._upper(d.lo, not d.lo_open)
    upto = d._upper(d.hi, d.hi_open)
    q = below + u * (upto - below)
    q = np.clip(q, np.nextafter(below, INF), upto)
    x = np.asarray(F.ppf(q), dtype=float)
    lo_int, hi_int = d.lo, d.hi
    if math.isfinite(d.lo) and (d.lo_open or d.lo != math.floor(d.lo)):
        lo_int = math.floor(d.lo) + 1
    if math.isfinite(d.hi) and (d.hi_open or d.hi != math.ceil(d.hi)):
        hi_int = math.ceil(d.hi) - 1
    return np.clip(x, lo_int, hi_int)
