"""Reverse translation: render an SPE as a program in the source language."""

from __future__ import annotations

import itertools
import math
import re

from .. import outcomes as oc
from ..distributions import Atomic, DistI, DistR, DistS
from ..events import Conjunction, Containment, Disjunction
from ..spe import Leaf, SpeGraph, Sum, reachable
from ..transforms import Abs, Exp, Identity, Log, Piecewise, Poly, Reciprocal, Root

_ARRAY = re.compile(r"^([A-Za-z_]\w*)\[(\d+)\]$")


def _num(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return repr(int(x))
    return repr(x)


def transform_source(t) -> str:
    if isinstance(t, Identity):
        return t.var
    if isinstance(t, Poly):
        inner = transform_source(t.inner)
        cs = t.coeffs
        if all(c == 0 for c in cs[1:]):
            return "(0 * %s + %s)" % (inner, _num(cs[0]))
        terms = []
        for k, c in enumerate(cs):
            if c == 0:
                continue
            if k == 0:
                terms.append(_num(c))
            elif k == 1:
                terms.append("%s*%s" % (_num(c), inner))
            else:
                terms.append("%s*%s**%d" % (_num(c), inner, k))
        return "(%s)" % " + ".join(terms)
    if isinstance(t, Reciprocal):
        return "(1 / %s)" % transform_source(t.inner)
    if isinstance(t, Abs):
        return "abs(%s)" % transform_source(t.inner)
    if isinstance(t, Root):
        if t.n == 2:
            return "sqrt(%s)" % transform_source(t.inner)
        return "(%s ** (1 / %d))" % (transform_source(t.inner), t.n)
    if isinstance(t, Exp):
        if t.base == math.e:
            return "exp(%s)" % transform_source(t.inner)
        return "(%s ** %s)" % (_num(t.base), transform_source(t.inner))
    if isinstance(t, Log):
        if t.base == math.e:
            return "log(%s)" % transform_source(t.inner)
        return "log(%s, %s)" % (transform_source(t.inner), _num(t.base))
    if isinstance(t, Piecewise):
        return "piecewise(%s)" % ", ".join(
            "(%s, %s)" % (transform_source(f), event_source(e)) for f, e in t.pieces)
    raise TypeError("cannot render transform %r" % (t,))


def _outcome_source(ts: str, v) -> str:
    parts = []
    for m in oc.members(v):
        if isinstance(m, oc.FiniteStr):
            items = "[%s]" % ", ".join(repr(s) for s in m.strings)
            parts.append("(%s not in %s)" % (ts, items) if m.complemented else "(%s in %s)" % (ts, items))
        elif isinstance(m, oc.FiniteReal):
            parts.append("(%s in [%s])" % (ts, ", ".join(_num(r) for r in m.reals)))
        else:
            bounds = []
            if m.lo > -math.inf:
                bounds.append("%s %s %s" % (ts, ">" if m.lo_open else ">=", _num(m.lo)))
            if m.hi < math.inf:
                bounds.append("%s %s %s" % (ts, "<" if m.hi_open else "<=", _num(m.hi)))
            parts.append("(%s)" % " and ".join(bounds) if bounds else "(%s > -inf)" % ts)
    if not parts:
        return "(%s in [])" % ts
    return parts[0] if len(parts) == 1 else "(%s)" % " or ".join(parts)


def event_source(e) -> str:
    if isinstance(e, Containment):
        return _outcome_source(transform_source(e.transform), e.outcomes)
    sep = " and " if isinstance(e, Conjunction) else " or "
    return "(%s)" % sep.join(event_source(x) for x in e.events)


def dist_source(d) -> str:
    if isinstance(d, DistS):
        return "choice({%s})" % ", ".join("%r: %s" % (s, repr(w)) for s, w in d.weights)
    F = d.cdf
    if isinstance(F, Atomic):
        return "atom(%s)" % _num(F.loc)
    names = {"normal": ("loc", "scale"), "uniform": ("a", "b"), "gamma": ("a", "scale"),
             "beta": ("a", "b"), "poisson": ("mu",), "binomial": ("n", "p"), "bernoulli": ("p",)}
    keys = names[F.name]
    return "%s(%s)" % (F.name, ", ".join("%s=%s" % (k, repr(float(v)) if k != "n" else _num(v))
                                         for k, v in zip(keys, F.params())))


def _truncation(d, x: str):
    if isinstance(d, DistS) or (isinstance(d, DistI) and isinstance(d.cdf, Atomic)):
        return None
    lo_open = d.lo_open if isinstance(d, DistI) else False
    hi_open = d.hi_open if isinstance(d, DistI) else False
    bounds = []
    if d.lo > -math.inf:
        bounds.append("%s %s %s" % (x, ">" if lo_open else ">=", repr(d.lo)))
    if d.hi < math.inf:
        bounds.append("%s %s %s" % (x, "<" if hi_open else "<=", repr(d.hi)))
    return " and ".join(bounds) if bounds else None


def spe_to_sppl(g) -> str:
    """Program text whose translation denotes the same distribution as g.

    Each Sum introduces a fresh string-valued selector variable; probabilities
    of events over the original variables are preserved.
    """
    root = g.root if isinstance(g, SpeGraph) else g
    names = set()
    for n in reachable(root):
        names |= n.scope
    arrays = {}
    for name in names:
        m = _ARRAY.match(name)
        if m:
            arrays[m.group(1)] = max(arrays.get(m.group(1), 0), int(m.group(2)) + 1)
    counter = itertools.count()

    def fresh():
        while True:
            b = "b_%d" % next(counter)
            if b not in names:
                return b

    header = ["%s = array(%d)" % (a, size) for a, size in sorted(arrays.items())]

    def emit(node, depth):
        """Lines for node and the selector variables they introduce."""
        pad = "    " * depth
        if isinstance(node, Leaf):
            out = ["%s%s ~ %s" % (pad, node.var, dist_source(node.dist))]
            trunc = _truncation(node.dist, node.var)
            if trunc:
                out.append("%scondition(%s)" % (pad, trunc))
            for name, t in node.env[1:]:
                out.append("%s%s = %s" % (pad, name, transform_source(t)))
            return out, []
        if isinstance(node, Sum):
            b = fresh()
            z = sum(node.weights)
            table = ", ".join("'%d': %r" % (i, w / z) for i, w in enumerate(node.weights))
            out = ["%s%s ~ choice({%s})" % (pad, b, table)]
            arms = [emit(c, depth + 1) for c in node.children]
            selectors = [x for _, sel in arms for x in sel]
            for i, (body, sel) in enumerate(arms):
                out.append("%s%s %s == '%d':" % (pad, "if" if i == 0 else "elif", b, i))
                out.extend(body)
                # Every branch must define the same variables.
                inner = "    " * (depth + 1)
                out.extend("%s%s ~ atom('0')" % (inner, x) for x in selectors if x not in sel)
            return out, [b] + selectors
        out, selectors = [], []
        for c in node.children:
            body, sel = emit(c, depth)
            out.extend(body)
            selectors.extend(sel)
        return out, selectors

    lines, _ = emit(root, 0)
    return "\n".join(header + lines) + "\n"
