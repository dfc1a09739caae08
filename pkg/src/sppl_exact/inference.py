"""Exact conditioning of sum-product expressions.

``condition`` handles positive-probability events and returns a new SPE
whose distribution is the posterior.  ``condition0`` handles conjunctions of
equality constraints that may have probability zero, using the generalized
density to decide which Sum branches survive.
"""

from __future__ import annotations

import math

from . import outcomes as oc
from .distributions import Atomic, DistI, DistR, DistS, atom, is_atom
from .events import (Event, ScopeError, conj, disjoin_clauses, clause_to_event, eval_event,
                     literal, normalize_clauses, subsenv)
from .spe import (INF, Leaf, Product, QueryCache, Sum, UnsupportedEventError,
                  _check_scope, _logdensity, _logprob, _node, equality_assignment,
                  group_literals, make_leaf, make_product, make_sum, options)
from .transforms import UndefinedError


class ZeroProbabilityError(ValueError):
    """Conditioning on an event with probability zero."""


class ZeroDensityError(ZeroProbabilityError):
    """Conditioning on an equality constraint with density zero."""


class ConditionContext(QueryCache):
    """Memo tables and visit instrumentation for one conditioning call."""

    def __init__(self, memoize: bool = True):
        super().__init__(memoize)
        self.visited = set()
        self.invocations = 0


# ==============================================================================
# Leaf conditioning.

def _integer_range(lo, lo_open, hi, hi_open):
    """First and last integers in a piece (infinite ends stay infinite)."""
    a = lo if not math.isfinite(lo) else (
        math.floor(lo) + 1 if lo_open and lo == math.floor(lo) else math.ceil(lo))
    b = hi if not math.isfinite(hi) else (
        math.ceil(hi) - 1 if hi_open and hi == math.ceil(hi) else math.floor(hi))
    return a, b


def _condition_leaf(node: Leaf, v) -> "Node":
    d = node.dist
    if isinstance(d, DistS):
        ss, sc = oc.string_set(v)
        keep = [(s, w) for s, w in d.weights if (s in ss) != sc]
        return make_leaf(node.var, DistS(tuple(keep)), node.env)
    children, weights = [], []
    if isinstance(d, DistR):
        for lo, _, hi, _ in oc.real_pieces(v):
            a, b = max(lo, d.lo), min(hi, d.hi)
            mass = d.mass_between(a, b) if a < b else 0.0
            if mass > 0:
                children.append(make_leaf(node.var, DistR(d.cdf, a, b), node.env))
                weights.append(mass)
    else:
        region = oc.intersection([oc.real_part(v), d.support])
        for piece in oc.real_pieces(region):
            mass = d.raw_mass(oc.from_pieces([piece]))
            if not mass > 0:
                continue
            lo, lo_open, hi, hi_open = piece
            if isinstance(d.cdf, Atomic):
                dist = atom(d.cdf.loc)
            elif lo == hi:
                dist = atom(lo)
            else:
                a, b = _integer_range(*piece) if d.cdf.integer else (-INF, INF)
                a = max(a, getattr(d.cdf, "support_lo", -INF))
                b = min(b, getattr(d.cdf, "support_hi", INF))
                if a == b:
                    dist = atom(a)
                else:
                    dist = DistI(d.cdf, lo, hi, lo_open, hi_open)
            if is_atom(dist) is not None and not isinstance(d.cdf, Atomic):
                # Point masses are stored in one canonical form so that
                # identical atoms intern to a single node.
                dist = atom(is_atom(dist))
            children.append(make_leaf(node.var, dist, node.env))
            weights.append(mass)
    if not children:
        raise ZeroProbabilityError("event has probability zero at leaf %s" % node.var)
    return make_sum(children, weights)


# ==============================================================================
# condition.

def _scaled(lws: list, ws: list = None) -> list:
    """Weights proportional to w * exp(lw); the prior weights w multiply
    directly so that an event of probability one leaves them exact."""
    top = max(lws)
    ws = ws or [1.0] * len(lws)
    return [w * math.exp(lw - top) for w, lw in zip(ws, lws)]


def _condition(node, e: Event, ctx: ConditionContext):
    ctx.invocations += 1
    ctx.visited.add(id(node))
    key = (id(node), e)
    if ctx.memoize:
        hit = ctx.condition.get(key)
        if hit is not None:
            return hit
    if isinstance(node, Leaf):
        result = _condition_leaf(node, eval_event(subsenv(e, node.env), node.var))
    elif isinstance(node, Sum):
        kids, ws, lws = [], [], []
        for c, w in zip(node.children, node.weights):
            if not w > 0:
                continue
            lp = _logprob(c, e, ctx)
            if lp > -INF:
                kids.append(_condition(c, e, ctx))
                ws.append(w)
                lws.append(lp)
        if not kids:
            raise ZeroProbabilityError("event has probability zero")
        result = make_sum(kids, _scaled(lws, ws))
    else:
        clauses = disjoin_clauses(normalize_clauses(e))
        if len(clauses) == 1:
            result = _condition_clause(node, clauses[0], ctx)
        else:
            kids, lws = [], []
            for c in clauses:
                ce = clause_to_event(c)
                lp = _logprob(node, ce, ctx)
                if lp > -INF:
                    kids.append(_condition_clause(node, c, ctx))
                    lws.append(lp)
            if not kids:
                raise ZeroProbabilityError("event has probability zero")
            result = make_sum(kids, _scaled(lws))
    if ctx.memoize:
        ctx.condition[key] = result
    return result


def _condition_clause(node: Product, clause: dict, ctx: ConditionContext):
    lits = [literal(x, v) for x, v in clause.items()]
    groups = group_literals(node, lits)
    kids = []
    for i, c in enumerate(node.children):
        kids.append(_condition(c, conj(*groups[i]), ctx) if i in groups else c)
    return make_product(kids)


def condition(root, e: Event, ctx: ConditionContext = None):
    """Posterior SPE given a positive-probability event."""
    node = _node(root)
    _check_scope(node, e)
    if ctx is None:
        ctx = ConditionContext(options().memoize)
    if _logprob(node, e, ctx) == -INF:
        raise ZeroProbabilityError("cannot condition on an event with probability zero")
    return _condition(node, e, ctx)


def visit_count_probe(root, e: Event) -> int:
    """Number of distinct nodes visited while conditioning root on e."""
    ctx = ConditionContext(options().memoize)
    condition(root, e, ctx)
    return len(ctx.visited)


# ==============================================================================
# condition0.

def _condition0(node, asg: dict, ctx: ConditionContext):
    names = frozenset(asg) & node.scope
    if not names:
        return node
    key = (id(node), names)
    if ctx.memoize:
        hit = ctx.condition.get(key)
        if hit is not None:
            return hit
    if isinstance(node, Leaf):
        if names - {node.var}:
            raise UnsupportedEventError("equality constraints on transformed variables")
        value = asg[node.var]
        if isinstance(node.dist, DistR):
            if isinstance(value, str):
                raise UndefinedError("string constraint on a real-valued variable %s" % node.var)
            result = make_leaf(node.var, atom(value), node.env)
        else:
            v = oc.strings(value) if isinstance(value, str) else oc.points(value)
            result = _condition_leaf(node, v)
    elif isinstance(node, Sum):
        parts = []
        for c, w in zip(node.children, node.weights):
            if w > 0:
                d, lv = _logdensity(c, asg, ctx)
                if lv > -INF:
                    parts.append((c, w, d, lv))
        if not parts:
            raise ZeroDensityError("constraint has density zero")
        dstar = min(d for _, _, d, _ in parts)
        live = [(c, w, lv) for c, w, d, lv in parts if d == dstar]
        result = make_sum([_condition0(c, asg, ctx) for c, _, _ in live],
                          _scaled([lv for _, _, lv in live], [w for _, w, _ in live]))
    else:
        result = make_product([_condition0(c, asg, ctx) for c in node.children])
    if ctx.memoize:
        ctx.condition[key] = result
    return result


def condition0(root, e) -> "Node":
    """Posterior SPE given equality constraints on non-transformed variables."""
    node = _node(root)
    asg = equality_assignment(e)
    extra = set(asg) - node.scope
    if extra:
        raise ScopeError("variables %s are not in scope" % sorted(extra))
    ctx = ConditionContext(options().memoize)
    _, lv = _logdensity(node, asg, ctx)
    if lv == -INF:
        raise ZeroDensityError("constraint has density zero")
    return _condition0(node, asg, ctx)
