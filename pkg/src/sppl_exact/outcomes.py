"""Symbolic sets over the mixed outcome space Real + String.

Five constructors describe every set the engine manipulates: ``Empty``,
``FiniteStr`` (optionally complemented), ``FiniteReal``, ``Interval`` and a
disjoint ``Union`` of the others.  Boundary flags follow the strict-bound
convention: ``lo_open=True`` means the endpoint is excluded.

All set operations go through one internal representation, a sorted list of
real pieces plus a string part, and rebuild a canonical value at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union as TUnion

import numpy as np

INF = math.inf

Outcome = TUnion[float, str]


class Outcomes:
    """Base class of the five set constructors."""

    __slots__ = ()

    def __contains__(self, o) -> bool:
        return contains(self, o)

    def __or__(self, other: "Outcomes") -> "Outcomes":
        return union([self, other])

    def __and__(self, other: "Outcomes") -> "Outcomes":
        return intersection([self, other])

    def __invert__(self) -> "Outcomes":
        return complement(self)


@dataclass(frozen=True, repr=False)
class Empty(Outcomes):
    def __repr__(self):
        return "Empty()"


EMPTY = Empty()


@dataclass(frozen=True)
class FiniteStr(Outcomes):
    strings: tuple
    complemented: bool = False

    def __post_init__(self):
        strings = tuple(sorted(set(self.strings)))
        if not all(isinstance(s, str) for s in strings):
            raise TypeError("FiniteStr members must be strings")
        if not strings and not self.complemented:
            raise ValueError("FiniteStr needs a member unless complemented")
        object.__setattr__(self, "strings", strings)


@dataclass(frozen=True)
class FiniteReal(Outcomes):
    # Infinite entries are only produced as sentinels by finv/poly_solve and
    # are never members of the set.
    reals: tuple

    def __post_init__(self):
        reals = tuple(sorted(set(float(r) for r in self.reals)))
        if not reals:
            raise ValueError("FiniteReal needs at least one member")
        if any(math.isnan(r) for r in reals):
            raise ValueError("FiniteReal members must not be NaN")
        object.__setattr__(self, "reals", reals)


@dataclass(frozen=True)
class Interval(Outcomes):
    lo: float
    lo_open: bool
    hi: float
    hi_open: bool

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not lo < hi:
            raise ValueError("Interval requires lo < hi, got %r, %r" % (lo, hi))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        # Infinite endpoints are never members.
        object.__setattr__(self, "lo_open", bool(self.lo_open or lo == -INF))
        object.__setattr__(self, "hi_open", bool(self.hi_open or hi == INF))


@dataclass(frozen=True)
class Union(Outcomes):
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if len(members) < 2:
            raise ValueError("Union needs at least two members")
        for m in members:
            if isinstance(m, (Union, Empty)) or not isinstance(m, Outcomes):
                raise ValueError("invalid Union member %r" % (m,))
        object.__setattr__(self, "members", members)


# ==============================================================================
# Convenience constructors.

def interval(lo, hi, lo_open=False, hi_open=False) -> Outcomes:
    """Canonical set for an interval; degenerate input collapses."""
    lo, hi = float(lo), float(hi)
    if lo < hi:
        return Interval(lo, lo_open, hi, hi_open)
    if lo == hi and not lo_open and not hi_open and math.isfinite(lo):
        return FiniteReal((lo,))
    return EMPTY


def reals() -> Interval:
    return Interval(-INF, True, INF, True)


def strings(*items) -> Outcomes:
    return FiniteStr(tuple(items)) if items else EMPTY


def points(*items) -> Outcomes:
    items = [float(r) for r in items if math.isfinite(float(r))]
    return FiniteReal(tuple(items)) if items else EMPTY


def full() -> Outcomes:
    """The whole outcome space Real + String."""
    return Union((FiniteStr((), True), reals()))


# ==============================================================================
# Internal representation: real pieces and string part.
# A piece is (lo, lo_open, hi, hi_open) with lo <= hi; points have lo == hi.

def _pieces(v: Outcomes) -> list:
    if isinstance(v, Interval):
        return [(v.lo, v.lo_open, v.hi, v.hi_open)]
    if isinstance(v, FiniteReal):
        return [(r, False, r, False) for r in v.reals if math.isfinite(r)]
    if isinstance(v, Union):
        out = []
        for m in v.members:
            out.extend(_pieces(m))
        return out
    return []


def _strpart(v: Outcomes) -> tuple:
    if isinstance(v, FiniteStr):
        return (frozenset(v.strings), v.complemented)
    if isinstance(v, Union):
        for m in v.members:
            if isinstance(m, FiniteStr):
                return (frozenset(m.strings), m.complemented)
    return (frozenset(), False)


def _touch(a, b) -> bool:
    """True if sorted pieces a, b (a.lo <= b.lo) overlap or are adjacent."""
    if b[0] < a[2]:
        return True
    if b[0] == a[2]:
        return not (a[3] and b[1])
    return False


def _merge(pieces: Iterable) -> list:
    items = sorted(pieces, key=lambda p: (p[0], p[1]))
    out = []
    for p in items:
        if out and _touch(out[-1], p):
            lo, lo_open, hi, hi_open = out[-1]
            if p[2] > hi:
                hi, hi_open = p[2], p[3]
            elif p[2] == hi:
                hi_open = hi_open and p[3]
            out[-1] = (lo, lo_open, hi, hi_open)
        else:
            out.append(p)
    return out


def _intersect2(xs: list, ys: list) -> list:
    out = []
    for a in xs:
        for b in ys:
            if a[0] > b[0] or (a[0] == b[0] and a[1]):
                lo, lo_open = a[0], a[1]
            else:
                lo, lo_open = b[0], b[1]
            if a[2] < b[2] or (a[2] == b[2] and a[3]):
                hi, hi_open = a[2], a[3]
            else:
                hi, hi_open = b[2], b[3]
            if lo < hi or (lo == hi and not lo_open and not hi_open):
                out.append((lo, lo_open, hi, hi_open))
    return _merge(out)


def _complement_pieces(ps: list) -> list:
    out = []
    lo, lo_open = -INF, True
    for p in ps:
        hi, hi_open = p[0], not p[1]
        if lo < hi or (lo == hi and not lo_open and not hi_open):
            out.append((lo, lo_open, hi, hi_open))
        lo, lo_open = p[2], not p[3]
    if lo < INF:
        out.append((lo, lo_open, INF, True))
    return out


def _str_union(a, b):
    (sa, ca), (sb, cb) = a, b
    if not ca and not cb:
        return (sa | sb, False)
    if ca and cb:
        return (sa & sb, True)
    if ca:
        return (sa - sb, True)
    return (sb - sa, True)


def _str_intersect(a, b):
    (sa, ca), (sb, cb) = a, b
    if not ca and not cb:
        return (sa & sb, False)
    if ca and cb:
        return (sa | sb, True)
    if ca:
        return (sb - sa, False)
    return (sa - sb, False)


def _build(ps: list, sp: tuple) -> Outcomes:
    members = []
    ss, sc = sp
    if ss or sc:
        members.append(FiniteStr(tuple(ss), sc))
    ps = _merge(ps)
    pts = [p[0] for p in ps if p[0] == p[2]]
    if pts:
        members.append(FiniteReal(tuple(pts)))
    for p in ps:
        if p[0] < p[2]:
            members.append(Interval(*p))
    if not members:
        return EMPTY
    if len(members) == 1:
        return members[0]
    return Union(tuple(members))


# ==============================================================================
# Public operations.

def contains(v: Outcomes, o) -> bool:
    if isinstance(o, str):
        ss, sc = _strpart(v)
        return (o in ss) != sc
    o = float(o)
    if not math.isfinite(o):
        return False
    for lo, lo_open, hi, hi_open in _pieces(v):
        if (lo < o or (lo == o and not lo_open)) and (o < hi or (o == hi and not hi_open)):
            return True
    return False


def contains_array(v: Outcomes, values: np.ndarray) -> np.ndarray:
    """Vectorized membership over an array of outcomes."""
    values = np.asarray(values)
    if values.dtype == object:
        return np.fromiter((contains(v, o) if o is not None else False for o in values),
                           dtype=bool, count=len(values))
    x = values.astype(float)
    mask = np.zeros(x.shape, dtype=bool)
    with np.errstate(invalid="ignore"):
        for lo, lo_open, hi, hi_open in _pieces(v):
            left = (x > lo) if lo_open else (x >= lo)
            right = (x < hi) if hi_open else (x <= hi)
            mask |= left & right
    return mask & np.isfinite(x)


def union(vs: Sequence[Outcomes]) -> Outcomes:
    ps, sp = [], (frozenset(), False)
    for v in vs:
        ps.extend(_pieces(v))
        sp = _str_union(sp, _strpart(v))
    return _build(ps, sp)


def intersection(vs: Sequence[Outcomes]) -> Outcomes:
    vs = list(vs)
    if not vs:
        return full()
    ps = _merge(_pieces(vs[0]))
    sp = _strpart(vs[0])
    for v in vs[1:]:
        ps = _intersect2(ps, _merge(_pieces(v)))
        sp = _str_intersect(sp, _strpart(v))
    return _build(ps, sp)


def complement(v: Outcomes) -> Outcomes:
    """Complement computed separately on the real and string components.

    A set with no string component complements to a purely real set and vice
    versa; only Empty complements to the full space.
    """
    if isinstance(v, Empty):
        return full()
    ps = _merge(_pieces(v))
    ss, sc = _strpart(v)
    has_real = bool(ps)
    has_str = bool(ss) or sc
    new_ps = _complement_pieces(ps) if has_real else []
    new_sp = (ss, not sc) if has_str else (frozenset(), False)
    return _build(new_ps, new_sp)


def difference(v: Outcomes, w: Outcomes) -> Outcomes:
    """Exact set difference v minus w, independent of complement's sort rule."""
    ps = _intersect2(_merge(_pieces(v)), _complement_pieces(_merge(_pieces(w))))
    sp = _str_intersect(_strpart(v), (_strpart(w)[0], not _strpart(w)[1]))
    return _build(ps, sp)


def is_empty(v: Outcomes) -> bool:
    return isinstance(v, Empty)


def real_part(v: Outcomes) -> Outcomes:
    return _build(_pieces(v), (frozenset(), False))


def string_part(v: Outcomes) -> Outcomes:
    return _build([], _strpart(v))


def real_pieces(v: Outcomes) -> list:
    """Sorted disjoint real pieces (lo, lo_open, hi, hi_open) of v."""
    return _merge(_pieces(v))


def string_set(v: Outcomes) -> tuple:
    """The (strings, complemented) pair describing the string component."""
    ss, sc = _strpart(v)
    return tuple(sorted(ss)), sc


def from_pieces(ps: Iterable, strs: tuple = (frozenset(), False)) -> Outcomes:
    return _build(list(ps), (frozenset(strs[0]), strs[1]))


def members(v: Outcomes) -> tuple:
    """Non-Union members of v (empty tuple for Empty)."""
    if isinstance(v, Empty):
        return ()
    if isinstance(v, Union):
        return v.members
    return (v,)
