"""Univariate transforms and the symbolic preimage solver.

A transform is a chain of primitive real functions ending in one
``Identity`` terminal.  ``preimg(t, v)`` returns the exact set of inputs that
``t`` maps into ``v``; it recurses from the outermost operation inward, each
step mapping a set of outputs to the set of inputs of that operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import outcomes as oc
from .outcomes import EMPTY, INF, FiniteReal, Outcomes


class UndefinedError(ValueError):
    """A transform was applied outside its domain."""


class TransformError(ValueError):
    """An expression cannot be represented as a univariate transform."""


class Transform:
    __slots__ = ()

    # Arithmetic builds transforms; comparisons build events.
    def __add__(self, other):
        return t_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return t_add(self, t_neg(other))

    def __rsub__(self, other):
        return t_add(t_neg(self), other)

    def __mul__(self, other):
        return t_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return t_div(self, other)

    def __rtruediv__(self, other):
        return t_div(other, self)

    def __pow__(self, other):
        return t_pow(self, other)

    def __rpow__(self, other):
        return t_pow(other, self)

    def __neg__(self):
        return t_neg(self)

    def __abs__(self):
        return Abs(self)

    def __lt__(self, r):
        return _cmp(self, "<", r)

    def __le__(self, r):
        return _cmp(self, "<=", r)

    def __gt__(self, r):
        return _cmp(self, ">", r)

    def __ge__(self, r):
        return _cmp(self, ">=", r)

    def __lshift__(self, v):
        from .events import Containment
        return Containment(self, v)

    def eq(self, value):
        from .events import Containment
        if isinstance(value, str):
            return Containment(self, oc.strings(value))
        return Containment(self, oc.points(value))

    def ne(self, value):
        from .events import negate
        return negate(self.eq(value))


def _cmp(t, op, r):
    from .events import Containment
    r = float(r)
    if op == "<":
        v = oc.interval(-INF, r, True, True)
    elif op == "<=":
        v = oc.interval(-INF, r, True, False)
    elif op == ">":
        v = oc.interval(r, INF, True, True)
    else:
        v = oc.interval(r, INF, False, True)
    return Containment(t, v)


@dataclass(frozen=True, eq=True)
class Identity(Transform):
    var: str


@dataclass(frozen=True, eq=True)
class Reciprocal(Transform):
    inner: Transform


@dataclass(frozen=True, eq=True)
class Abs(Transform):
    inner: Transform


@dataclass(frozen=True, eq=True)
class Root(Transform):
    inner: Transform
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("Root degree must be a positive integer")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True, eq=True)
class Exp(Transform):
    inner: Transform
    base: float = math.e

    def __post_init__(self):
        if not self.base > 0:
            raise ValueError("Exp base must be positive")
        object.__setattr__(self, "base", float(self.base))


@dataclass(frozen=True, eq=True)
class Log(Transform):
    inner: Transform
    base: float = math.e

    def __post_init__(self):
        if not self.base > 0 or self.base == 1:
            raise ValueError("Log base must be positive and not 1")
        object.__setattr__(self, "base", float(self.base))


@dataclass(frozen=True, eq=True)
class Poly(Transform):
    inner: Transform
    coeffs: tuple

    def __post_init__(self):
        cs = [float(c) for c in self.coeffs]
        if not cs:
            raise ValueError("Poly needs at least one coefficient")
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))


@dataclass(frozen=True, eq=True)
class Piecewise(Transform):
    pieces: tuple  # of (Transform, Event)

    def __post_init__(self):
        from .events import eval_event, vars_of
        pieces = tuple((t, e) for t, e in self.pieces)
        if not pieces:
            raise ValueError("Piecewise needs at least one piece")
        names = set()
        for t, e in pieces:
            names |= vars_of(t) | vars_of(e)
        if len(names) != 1:
            raise TransformError("Piecewise pieces must share one variable")
        (x,) = names
        guards = [eval_event(e, x) for _, e in pieces]
        for i in range(len(guards)):
            for j in range(i + 1, len(guards)):
                if not oc.is_empty(oc.intersection([guards[i], guards[j]])):
                    raise ValueError("Piecewise guards must be disjoint")
        object.__setattr__(self, "pieces", pieces)


# ==============================================================================
# Structure.

def vars_of_transform(t: Transform) -> frozenset:
    if isinstance(t, Identity):
        return frozenset([t.var])
    if isinstance(t, Piecewise):
        from .events import vars_of
        out = frozenset()
        for ti, ei in t.pieces:
            out |= vars_of_transform(ti) | vars_of(ei)
        return out
    return vars_of_transform(t.inner)


def the_var(t: Transform) -> str:
    names = vars_of_transform(t)
    if len(names) != 1:
        raise TransformError("transform must have exactly one variable")
    return next(iter(names))


def substitute(t: Transform, x: str, s: Transform) -> Transform:
    """Replace the terminal Identity(x) in t by s."""
    if isinstance(t, Identity):
        return s if t.var == x else t
    if isinstance(t, Piecewise):
        from .events import subs
        return Piecewise(tuple((substitute(ti, x, s), subs(ei, x, s)) for ti, ei in t.pieces))
    if isinstance(t, Poly):
        return Poly(substitute(t.inner, x, s), t.coeffs)
    if isinstance(t, Root):
        return Root(substitute(t.inner, x, s), t.n)
    if isinstance(t, (Exp, Log)):
        return type(t)(substitute(t.inner, x, s), t.base)
    return type(t)(substitute(t.inner, x, s))


# ==============================================================================
# Valuation.

def _horner(coeffs, x):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def evaluate(t: Transform, r):
    """Apply t to outcome r, raising UndefinedError outside the domain."""
    if isinstance(t, Identity):
        return r
    if isinstance(t, Piecewise):
        from .events import eval_event
        for ti, ei in t.pieces:
            if oc.contains(eval_event(ei, the_var(t)), r):
                return evaluate(ti, r)
        raise UndefinedError("no Piecewise guard contains %r" % (r,))
    x = evaluate(t.inner, r)
    if isinstance(x, str):
        raise UndefinedError("numeric transform applied to a string")
    x = float(x)
    if isinstance(t, Reciprocal):
        if x == 0:
            raise UndefinedError("reciprocal of zero")
        return 1.0 / x
    if isinstance(t, Abs):
        return abs(x)
    if isinstance(t, Root):
        if x < 0:
            raise UndefinedError("root of a negative number")
        return math.sqrt(x) if t.n == 2 else x ** (1.0 / t.n)
    if isinstance(t, Exp):
        try:
            return t.base ** x
        except OverflowError:
            return INF
    if isinstance(t, Log):
        if x <= 0:
            raise UndefinedError("log of a non-positive number")
        return math.log(x) / math.log(t.base)
    if isinstance(t, Poly):
        return _horner(t.coeffs, x)
    raise TypeError("unknown transform %r" % (t,))


def evaluate_array(t: Transform, env: dict) -> np.ndarray:
    """Vectorized valuation; env maps variable names to arrays. NaN marks undefined."""
    if isinstance(t, Identity):
        return env[t.var]
    if isinstance(t, Piecewise):
        from .events import eval_event
        x = the_var(t)
        base = env[x]
        out = np.full(len(base), np.nan)
        for ti, ei in t.pieces:
            mask = oc.contains_array(eval_event(ei, x), base)
            if mask.any():
                vals = np.asarray(evaluate_array(ti, env), dtype=object if base.dtype == object else float)
                out[mask] = np.asarray(vals[mask], dtype=float)
        return out
    x = env_numeric(evaluate_array(t.inner, env))
    with np.errstate(all="ignore"):
        if isinstance(t, Reciprocal):
            return np.where(x == 0, np.nan, 1.0 / np.where(x == 0, 1.0, x))
        if isinstance(t, Abs):
            return np.abs(x)
        if isinstance(t, Root):
            y = np.sqrt(x) if t.n == 2 else np.power(x, 1.0 / t.n)
            return np.where(x < 0, np.nan, y)
        if isinstance(t, Exp):
            return np.power(t.base, x)
        if isinstance(t, Log):
            return np.where(x <= 0, np.nan, np.log(np.where(x <= 0, 1.0, x)) / math.log(t.base))
        if isinstance(t, Poly):
            acc = np.zeros_like(x)
            for c in reversed(t.coeffs):
                acc = acc * x + c
            return acc
    raise TypeError("unknown transform %r" % (t,))


def env_numeric(x) -> np.ndarray:
    x = np.asarray(x)
    if x.dtype != object:
        return x.astype(float)
    return np.array([v if isinstance(v, (int, float)) and not isinstance(v, bool) else
                     (float(v) if isinstance(v, bool) else np.nan) for v in x], dtype=float)


# ==============================================================================
# Polynomials.

def _strip(coeffs: Sequence[float]) -> list:
    cs = [float(c) for c in coeffs]
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    return cs


def _newton(cs, x, iters=60):
    dcs = [i * c for i, c in enumerate(cs)][1:]
    for _ in range(iters):
        f = _horner(cs, x)
        if f == 0:
            break
        df = _horner(dcs, x) if dcs else 0.0
        if df == 0:
            break
        nx = x - f / df
        if abs(_horner(cs, nx)) >= abs(f):
            break
        x = nx
    return x


def roots(coeffs: Sequence[float]) -> list:
    """All distinct real roots of the polynomial, ascending.

    Closed forms for degree <= 2; companion-matrix eigenvalues polished by
    Newton iteration for higher degrees.
    """
    cs = _strip(coeffs)
    if all(c == 0 for c in cs):
        raise ValueError("the zero polynomial has no isolated roots")
    deg = len(cs) - 1
    if deg == 0:
        found = []
    elif deg == 1:
        found = [-cs[0] / cs[1]]
    elif deg == 2:
        c, b, a = cs
        disc = b * b - 4 * a * c
        if disc < 0:
            found = []
        elif disc == 0:
            found = [-b / (2 * a)]
        else:
            q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
            found = [q / a, c / q] if q != 0 else [0.0]
    else:
        scale = sum(abs(c) for c in cs)
        found = []
        for z in np.roots(cs[::-1]):
            if abs(z.imag) > 1e-6 * max(1.0, abs(z.real)):
                continue
            x = _newton(cs, float(z.real))
            mag = sum(abs(c) * abs(x) ** i for i, c in enumerate(cs))
            if abs(_horner(cs, x)) <= 1e-8 * max(mag, scale * 1e-8):
                found.append(x)
    found = sorted(found)
    out = []
    for x in found:
        if out and abs(x - out[-1]) <= 1e-9 * max(1.0, abs(x)):
            continue
        out.append(x + 0.0)
    return out


def poly_lim(coeffs: Sequence[float]) -> tuple:
    """Limits of the polynomial at -inf and +inf."""
    cs = _strip(coeffs)
    deg = len(cs) - 1
    if deg == 0:
        return (cs[0], cs[0])
    lead = cs[-1]
    pos = INF if lead > 0 else -INF
    neg = pos if deg % 2 == 0 else -pos
    return (neg, pos)


def poly_solve(r: float, coeffs: Sequence[float]) -> Outcomes:
    """The set {x : p(x) = r}; for infinite r the sentinel set of limits."""
    cs = _strip(coeffs)
    if math.isinf(r):
        if len(cs) == 1:
            return EMPTY
        lo, hi = poly_lim(cs)
        hits = [x for x, lim in ((-INF, lo), (INF, hi)) if lim == r]
        return FiniteReal(tuple(hits)) if hits else EMPTY
    if len(cs) == 1:
        return oc.reals() if cs[0] == r else EMPTY
    shifted = [cs[0] - r] + cs[1:]
    return oc.points(*roots(shifted))


def poly_lte(strict: bool, r: float, coeffs: Sequence[float]) -> Outcomes:
    """The set {x : p(x) < r} (strict) or {x : p(x) <= r}."""
    cs = _strip(coeffs)
    if r == INF:
        return oc.reals()
    if r == -INF:
        return EMPTY
    if len(cs) == 1:
        ok = cs[0] < r if strict else cs[0] <= r
        return oc.reals() if ok else EMPTY
    shifted = [cs[0] - r] + cs[1:]
    xs = roots(shifted)
    bounds = [-INF] + xs + [INF]
    pieces = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if lo == -INF and hi == INF:
            mid = 0.0
        elif lo == -INF:
            mid = hi - max(1.0, abs(hi))
        elif hi == INF:
            mid = lo + max(1.0, abs(lo))
        else:
            mid = 0.5 * (lo + hi)
        if _horner(shifted, mid) < 0:
            pieces.append((lo, True, hi, True))
    if not strict:
        pieces.extend((x, False, x, False) for x in xs)
    return oc.from_pieces(pieces)


# ==============================================================================
# Domains, generalized inverses, and preimages.

_NONZERO = oc.Union((oc.Interval(-INF, True, 0.0, True), oc.Interval(0.0, True, INF, True)))
_NONNEG = oc.Interval(0.0, False, INF, True)
_POS = oc.Interval(0.0, True, INF, True)


def _op_domain(t: Transform) -> Outcomes:
    if isinstance(t, Reciprocal):
        return _NONZERO
    if isinstance(t, Root):
        return _NONNEG
    if isinstance(t, Log):
        return _POS
    return oc.reals()


def domainof(t: Transform) -> Outcomes:
    """The exact set of inputs on which t is defined."""
    if isinstance(t, Identity):
        return oc.full()
    if isinstance(t, Piecewise):
        from .events import eval_event
        x = the_var(t)
        return oc.union([oc.intersection([domainof(ti), eval_event(ei, x)])
                         for ti, ei in t.pieces])
    return preimg(t.inner, _op_domain(t))


def _op_finv(t: Transform, r: float) -> Outcomes:
    """Inputs y of the outermost operation of t with op(y) = r (sentinels kept)."""
    if isinstance(t, Reciprocal):
        if r == 0:
            return FiniteReal((-INF, INF))
        return oc.points(1.0 / r) if math.isfinite(r) else EMPTY
    if isinstance(t, Abs):
        if r < 0:
            return EMPTY
        return FiniteReal((-r, r))
    if isinstance(t, Root):
        if r < 0:
            return EMPTY
        return FiniteReal((r ** t.n,))
    if isinstance(t, Exp):
        if t.base == 1:
            return oc.reals() if r == 1 else EMPTY
        if r <= 0 or math.isinf(r):
            return EMPTY
        return FiniteReal((math.log(r) / math.log(t.base),))
    if isinstance(t, Log):
        if math.isinf(r):
            return EMPTY
        try:
            return FiniteReal((t.base ** r,))
        except OverflowError:
            return EMPTY
    if isinstance(t, Poly):
        return poly_solve(r, t.coeffs)
    raise TypeError("unknown transform %r" % (t,))


def finv(t: Transform, r: float) -> Outcomes:
    """The generalized inverse {r' : t(r') = r}, with infinite sentinels."""
    if isinstance(t, Identity):
        return FiniteReal((r,)) if not isinstance(r, str) else oc.strings(r)
    if isinstance(t, Piecewise):
        return preimg(t, oc.points(r))
    ys = _op_finv(t, r)
    if oc.is_empty(ys):
        return EMPTY
    if isinstance(ys, FiniteReal):
        if isinstance(t.inner, Identity):
            return ys
        return oc.union([finv(t.inner, y) for y in ys.reals])
    return preimg(t.inner, ys)


def _op_preimage_piece(t: Transform, p: tuple) -> Outcomes:
    """Inputs y with op(y) inside the real piece p = (a, ao, b, bo)."""
    a, ao, b, bo = p
    if a == b:
        ys = _op_finv(t, a)
        if isinstance(ys, FiniteReal):
            return oc.points(*[y for y in ys.reals if math.isfinite(y)])
        return ys
    if isinstance(t, Poly):
        upper = poly_lte(bo, b, t.coeffs)
        lower = poly_lte(not ao, a, t.coeffs)
        return oc.difference(upper, lower)
    if isinstance(t, Reciprocal):
        out = []
        for q in oc.real_pieces(oc.intersection([oc.from_pieces([p]), _POS])):
            lo = 0.0 if q[2] == INF else 1.0 / q[2]
            hi = INF if q[0] == 0 else 1.0 / q[0]
            out.append((lo, q[3] or q[2] == INF, hi, q[1] or q[0] == 0))
        neg = oc.Interval(-INF, True, 0.0, True)
        for q in oc.real_pieces(oc.intersection([oc.from_pieces([p]), neg])):
            lo = -INF if q[2] == 0 else 1.0 / q[2]
            hi = 0.0 if q[0] == -INF else 1.0 / q[0]
            out.append((lo, q[3] or q[2] == 0, hi, q[1] or q[0] == -INF))
        return oc.from_pieces([o for o in out if o[0] < o[2] or (o[0] == o[2] and not o[1] and not o[3])])
    # Remaining operations have range within [0, inf) or (0, inf).
    if isinstance(t, (Abs, Root)):
        q = oc.real_pieces(oc.intersection([oc.from_pieces([p]), _NONNEG]))
        if not q:
            return EMPTY
        a, ao, b, bo = q[0]
        if isinstance(t, Root):
            hi = INF if b == INF else b ** t.n
            return oc.from_pieces([(a ** t.n, ao, hi, bo)])
        pieces = [(a, ao, b, bo), (-b, bo, -a, ao)]
        return oc.from_pieces(pieces)
    if isinstance(t, Exp):
        if t.base == 1:
            return oc.reals() if oc.contains(oc.from_pieces([p]), 1.0) else EMPTY
        q = oc.real_pieces(oc.intersection([oc.from_pieces([p]), _POS]))
        if not q:
            return EMPTY
        a, ao, b, bo = q[0]
        lb = math.log(t.base)
        lo = (-INF if a == 0 else math.log(a)) / lb
        hi = (INF if b == INF else math.log(b)) / lb
        if t.base < 1:
            lo, hi = hi, lo
            ao, bo = bo, ao
        return oc.interval(lo, hi, ao or math.isinf(lo), bo or math.isinf(hi))
    if isinstance(t, Log):
        def power(x):
            try:
                return t.base ** x
            except OverflowError:
                return INF
        lo, hi = power(a), power(b)
        lo_open, hi_open = ao, bo
        if t.base < 1:
            lo, hi = hi, lo
            lo_open, hi_open = hi_open, lo_open
        if lo == 0:
            lo_open = True
        return oc.interval(lo, hi, lo_open, hi_open)
    raise TypeError("unknown transform %r" % (t,))


def preimg(t: Transform, v: Outcomes) -> Outcomes:
    """The exact set {r : t(r) in v}; strings survive only under Identity."""
    if isinstance(t, Identity):
        return v
    if isinstance(t, Piecewise):
        from .events import eval_event
        x = the_var(t)
        return oc.union([oc.intersection([preimg(ti, v), eval_event(ei, x)])
                         for ti, ei in t.pieces])
    parts = [_op_preimage_piece(t, p) for p in oc.real_pieces(v)]
    ys = oc.union(parts)
    if oc.is_empty(ys):
        return EMPTY
    return oc.real_part(preimg(t.inner, ys))


# ==============================================================================
# Arithmetic over transforms (the expression builder used by the parser).

def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def as_poly(t: Transform) -> tuple:
    if isinstance(t, Poly):
        return t.inner, list(t.coeffs)
    return t, [0.0, 1.0]


def make_poly(base: Transform, coeffs: Sequence[float]) -> Transform:
    cs = _strip(coeffs)
    if len(cs) == 2 and cs[0] == 0 and cs[1] == 1:
        return base
    return Poly(base, tuple(cs))


def _padd(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0.0) + (b[i] if i < len(b) else 0.0) for i in range(n)]


def _pmul(a, b):
    out = [0.0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def t_add(a, b):
    if _is_num(a) and _is_num(b):
        return a + b
    if _is_num(a):
        a, b = b, a
    base, cs = as_poly(a)
    if _is_num(b):
        cs[0] += b
        return make_poly(base, cs)
    base2, cs2 = as_poly(b)
    if base != base2:
        raise TransformError("cannot add transforms over different bases")
    return make_poly(base, _padd(cs, cs2))


def t_neg(a):
    if _is_num(a):
        return -a
    return t_mul(a, -1.0)


def t_mul(a, b):
    if _is_num(a) and _is_num(b):
        return a * b
    if _is_num(a):
        a, b = b, a
    base, cs = as_poly(a)
    if _is_num(b):
        return make_poly(base, [c * b for c in cs])
    base2, cs2 = as_poly(b)
    if base != base2:
        raise TransformError("cannot multiply transforms over different bases")
    return make_poly(base, _pmul(cs, cs2))


def t_div(a, b):
    if _is_num(a) and _is_num(b):
        return a / b
    if _is_num(b):
        return t_mul(a, 1.0 / b)
    if _is_num(a):
        return t_mul(Reciprocal(b), float(a))
    raise TransformError("cannot divide a transform by a transform")


def _root_degree(p: float):
    if p <= 0 or p >= 1:
        return None
    n = round(1.0 / p)
    if n >= 2 and abs(1.0 / p - n) < 1e-9:
        return n
    return None


def t_pow(a, b):
    if _is_num(a) and _is_num(b):
        return a ** b
    if _is_num(b):
        if float(b).is_integer():
            n = int(b)
            if n >= 0:
                base, cs = as_poly(a)
                out = [1.0]
                for _ in range(n):
                    out = _pmul(out, cs)
                return make_poly(base, out)
            return Reciprocal(t_pow(a, -n))
        n = _root_degree(float(b))
        if n is not None:
            return Root(a, n)
        raise TransformError("unsupported exponent %r" % (b,))
    if _is_num(a):
        return Exp(b, float(a))
    raise TransformError("cannot raise a transform to a transform power")
