"""Events over transformed variables and their preprocessing.

Events are containment literals ``t in v`` closed under conjunction and
disjunction.  ``normalize`` eliminates transforms via preimages and yields a
solved DNF; ``disjoin`` further makes its clauses pairwise disjoint so that
probabilities add and conditioning can split into a Sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import outcomes as oc
from .outcomes import EMPTY, Outcomes
from .transforms import (Identity, Transform, UndefinedError, evaluate,
                         evaluate_array, preimg, substitute, vars_of_transform)


class ScopeError(ValueError):
    """An event mentions variables outside the expected scope."""


class Event:
    __slots__ = ()

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return negate(self)


@dataclass(frozen=True)
class Containment(Event):
    transform: Transform
    outcomes: Outcomes


@dataclass(frozen=True)
class Conjunction(Event):
    events: tuple

    def __post_init__(self):
        if len(self.events) < 2:
            raise ValueError("Conjunction needs at least two events")


@dataclass(frozen=True)
class Disjunction(Event):
    events: tuple

    def __post_init__(self):
        if len(self.events) < 2:
            raise ValueError("Disjunction needs at least two events")


def conj(*events: Event) -> Event:
    """Flattened conjunction; a single argument is returned unchanged."""
    out = []
    for e in events:
        out.extend(e.events if isinstance(e, Conjunction) else (e,))
    return out[0] if len(out) == 1 else Conjunction(tuple(out))


def disj(*events: Event) -> Event:
    out = []
    for e in events:
        out.extend(e.events if isinstance(e, Disjunction) else (e,))
    return out[0] if len(out) == 1 else Disjunction(tuple(out))


def literal(x: str, v: Outcomes) -> Containment:
    return Containment(Identity(x), v)


# ==============================================================================
# Structure and valuation.

def vars_of(e) -> frozenset:
    if isinstance(e, Transform):
        return vars_of_transform(e)
    if isinstance(e, Containment):
        return vars_of_transform(e.transform)
    out = frozenset()
    for sub in e.events:
        out |= vars_of(sub)
    return out


def eval_event(e: Event, x: str) -> Outcomes:
    """The set of values of x satisfying e, with other variables ignored."""
    if isinstance(e, Containment):
        if vars_of_transform(e.transform) == {x}:
            return preimg(e.transform, e.outcomes)
        return EMPTY
    parts = [eval_event(sub, x) for sub in e.events]
    if isinstance(e, Conjunction):
        return oc.intersection(parts)
    return oc.union(parts)


def satisfies(e: Event, assignment: dict) -> bool:
    """Point evaluation of e at a full assignment of its variables."""
    if isinstance(e, Containment):
        (x,) = vars_of_transform(e.transform)
        try:
            value = evaluate(e.transform, assignment[x])
        except UndefinedError:
            return False
        return oc.contains(e.outcomes, value)
    if isinstance(e, Conjunction):
        return all(satisfies(sub, assignment) for sub in e.events)
    return any(satisfies(sub, assignment) for sub in e.events)


def satisfies_array(e: Event, env: dict) -> np.ndarray:
    """Vectorized ``satisfies`` over columns of samples."""
    if isinstance(e, Containment):
        t = e.transform
        if isinstance(t, Identity):
            return oc.contains_array(e.outcomes, env[t.var])
        return oc.contains_array(e.outcomes, evaluate_array(t, env))
    masks = [satisfies_array(sub, env) for sub in e.events]
    if isinstance(e, Conjunction):
        return np.logical_and.reduce(masks)
    return np.logical_or.reduce(masks)


# ==============================================================================
# Negation and DNF.

def _literals_of(x_transform: Transform, v: Outcomes) -> list:
    return [Containment(x_transform, m) for m in oc.members(v)]


def negate(e: Event) -> Event:
    if isinstance(e, Containment):
        lits = _literals_of(e.transform, oc.complement(e.outcomes))
        if not lits:
            return Containment(e.transform, EMPTY)
        return disj(*lits)
    if isinstance(e, Conjunction):
        return disj(*[negate(sub) for sub in e.events])
    return conj(*[negate(sub) for sub in e.events])


def _dnf_clauses(e: Event) -> list:
    if isinstance(e, Containment):
        return [(e,)]
    if isinstance(e, Disjunction):
        out = []
        for sub in e.events:
            out.extend(_dnf_clauses(sub))
        return out
    out = [()]
    for sub in e.events:
        out = [a + b for a in out for b in _dnf_clauses(sub)]
    return out


def clauses_to_event(clauses: Iterable[tuple]) -> Event:
    return disj(*[conj(*c) for c in clauses])


def dnf(e: Event) -> Event:
    """Disjunctive normal form by distributing conjunction over disjunction."""
    return clauses_to_event(_dnf_clauses(e))


def dnf_clauses(e: Event) -> list:
    """DNF of e as a list of clauses, each a tuple of literals."""
    return _dnf_clauses(e)


# ==============================================================================
# Solved DNF. A clause is a dict mapping variable to a non-Union Outcomes,
# kept in insertion order; an Empty value marks an unsatisfiable clause.

def _merge_clauses(a: dict, b: dict) -> list:
    """Conjoin two solved clauses, splitting on any Union intersections."""
    merged = dict(a)
    split = []
    for x, v in b.items():
        if x in merged:
            w = oc.intersection([merged[x], v])
            ms = oc.members(w)
            if len(ms) > 1:
                split.append((x, ms))
                merged[x] = w
            else:
                merged[x] = ms[0] if ms else EMPTY
        else:
            merged[x] = v
    if not split:
        return [merged]
    out = [merged]
    for x, ms in split:
        out = [dict(c, **{x: m}) for c in out for m in ms]
    return out


def normalize_clauses(e: Event) -> list:
    """Solved DNF of e as a list of clause dicts."""
    if isinstance(e, Containment):
        (x,) = vars_of_transform(e.transform)
        v = preimg(e.transform, e.outcomes)
        ms = oc.members(v)
        if not ms:
            return [{x: EMPTY}]
        return [{x: m} for m in ms]
    if isinstance(e, Disjunction):
        out = []
        for sub in e.events:
            out.extend(normalize_clauses(sub))
        return out
    out = [{}]
    for sub in e.events:
        nxt = []
        for c in out:
            for d in normalize_clauses(sub):
                nxt.extend(_merge_clauses(c, d))
        out = nxt
    return out


def clause_to_event(c: dict) -> Event:
    return conj(*[literal(x, v) for x, v in c.items()])


def clause_from_event(e: Event) -> dict:
    """Inverse of clause_to_event for a solved clause."""
    lits = e.events if isinstance(e, Conjunction) else (e,)
    out = {}
    for lit in lits:
        if not isinstance(lit, Containment) or not isinstance(lit.transform, Identity):
            raise ValueError("not a solved clause: %r" % (e,))
        x = lit.transform.var
        if x in out or isinstance(lit.outcomes, oc.Union):
            raise ValueError("not a solved clause: %r" % (e,))
        out[x] = lit.outcomes
    return out


def normalize(e: Event) -> Event:
    return disj(*[clause_to_event(c) for c in normalize_clauses(e)])


def _is_empty_clause(c: dict) -> bool:
    return any(isinstance(v, oc.Empty) for v in c.values())


def _values_disjoint(v, w) -> bool:
    if isinstance(v, oc.Interval) and isinstance(w, oc.Interval):
        if v.hi < w.lo or w.hi < v.lo:
            return True
        if v.hi == w.lo:
            return v.hi_open or w.lo_open
        if w.hi == v.lo:
            return w.hi_open or v.lo_open
        return False
    return oc.is_empty(oc.intersection([v, w]))


def clauses_disjoint(a: dict, b: dict) -> bool:
    if _is_empty_clause(a) or _is_empty_clause(b):
        return True
    for x, v in a.items():
        if x in b and _values_disjoint(v, b[x]):
            return True
    return False


def disjoint_p(e1: Event, e2: Event) -> bool:
    """Whether two solved clauses are syntactically disjoint."""
    return clauses_disjoint(clause_from_event(e1), clause_from_event(e2))


def _negate_clause(d: dict) -> list:
    """Negation of a solved clause as pairwise-disjoint solved clauses.

    The k-th clause falsifies the k-th literal and satisfies all earlier ones.
    """
    out = []
    prefix = {}
    for x, v in d.items():
        for m in oc.members(oc.complement(v)):
            out.append({**prefix, x: m})
        prefix[x] = v
    return out


def _subsumed(c: dict, d: dict) -> bool:
    """Whether clause c denotes a subset of clause d."""
    return all(x in c and oc.is_empty(oc.difference(c[x], v)) for x, v in d.items())


def disjoin_clauses(clauses: list) -> list:
    """Rewrite solved clauses into pairwise-disjoint solved clauses."""
    live = [c for c in clauses if not _is_empty_clause(c)]
    if not live:
        return clauses[:1]
    kept = []
    for c in live:
        if not any(_subsumed(c, d) for d in kept):
            kept.append(c)
    out = []
    for i, c in enumerate(kept):
        overlapping = [d for d in kept[:i] if not clauses_disjoint(c, d)]
        if not overlapping:
            out.append(c)
            continue
        # c intersected with the negation of each overlapping earlier clause,
        # expanded to DNF with unsatisfiable clauses pruned.  Since each
        # negation is itself a disjoint family, the pieces are pairwise
        # disjoint and the recursive disjoin step has nothing left to split.
        pieces = [c]
        for d in overlapping:
            nxt = []
            for p in pieces:
                if clauses_disjoint(p, d):
                    nxt.append(p)
                    continue
                for n in _negate_clause(d):
                    for q in _merge_clauses(p, n):
                        if not _is_empty_clause(q):
                            nxt.append(q)
            pieces = nxt
        out.extend(pieces)
    return out


def disjoin(e: Event) -> Event:
    cs = disjoin_clauses(normalize_clauses(e))
    return disj(*[clause_to_event(c) for c in cs])


# ==============================================================================
# Substitution.

def subs(e: Event, x: str, t: Transform) -> Event:
    """Replace variable x by transform t throughout e."""
    if isinstance(e, Containment):
        if x not in vars_of_transform(e.transform):
            return e
        return Containment(substitute(e.transform, x, t), e.outcomes)
    parts = [subs(sub, x, t) for sub in e.events]
    return conj(*parts) if isinstance(e, Conjunction) else disj(*parts)


def subsenv(e: Event, env) -> Event:
    """Rewrite e over the leaf variable of an environment.

    ``env`` is an ordered sequence of (name, transform) pairs whose first
    entry is the leaf variable mapped to its Identity.
    """
    items = list(env.items()) if isinstance(env, dict) else list(env)
    for name, t in reversed(items[1:]):
        e = subs(e, name, t)
    leaf = items[0][0]
    extra = vars_of(e) - {leaf}
    if extra:
        raise ScopeError("variables %s are not defined in the environment" % sorted(extra))
    return e
