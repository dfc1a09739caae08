"""Random generators shared by the property tests and the acceptance suite."""

import math

import numpy as np

from sppl_exact import outcomes as oc
from sppl_exact.distributions import (Beta, Binomial, DistI, DistR, DistS, Gamma, Normal,
                                      Poisson, Uniform, atom)
from sppl_exact.events import Containment, conj, disj, dnf_clauses, literal, negate
from sppl_exact.spe import make_leaf, make_product, make_sum, prob
from sppl_exact.transforms import Abs, Exp, Identity, Poly

# Variable name -> kind.  "W" is derived from "Y" through a leaf environment.
KINDS = {"X": "real", "N": "int", "S": "str", "Y": "real"}
STRINGS = ("a", "b", "c", "d")


def _round(x, digits=3):
    return float(round(float(x), digits))


# ==============================================================================
# Outcomes.

def random_interval(rng, lo=-4.0, hi=4.0, grid=False):
    if grid:
        a, b = sorted(rng.choice(np.arange(int(lo), int(hi) + 1), size=2, replace=False))
        a, b = float(a), float(b)
    else:
        a, b = sorted(_round(x, 2) for x in rng.uniform(lo, hi, size=2))
        if a == b:
            b = a + 0.5
    r = rng.random()
    if r < 0.15:
        a = -math.inf
    elif r < 0.3:
        b = math.inf
    return oc.interval(a, b, bool(rng.random() < 0.5) or a == -math.inf,
                       bool(rng.random() < 0.5) or b == math.inf)


def _random_outcomes(rng, kind):
    if kind == "int":
        r = rng.random()
        if r < 0.4:
            return oc.points(*sorted(set(int(x) for x in rng.integers(0, 7, size=3))))
        return random_interval(rng, -1, 8, grid=r < 0.7)
    r = rng.random()
    if r < 0.2:
        return oc.union([random_interval(rng), random_interval(rng)])
    return random_interval(rng)


def random_outcomes(rng, kind):
    """Outcomes for a variable kind: "real", "int", "str" or a tuple of strings."""
    if kind == "str":
        kind = STRINGS
    if isinstance(kind, tuple):
        k = int(rng.integers(1, min(len(kind), 3) + 1))
        items = tuple(rng.choice(kind, size=k, replace=False))
        return oc.FiniteStr(items, bool(rng.random() < 0.3))
    return _random_outcomes(rng, kind)


# ==============================================================================
# SPEs.

def random_dist(rng, kind):
    if kind == "str":
        k = int(rng.integers(1, 5))
        items = rng.choice(STRINGS, size=k, replace=False)
        return DistS(tuple((str(s), _round(rng.uniform(0.1, 1))) for s in items))
    if kind == "int":
        r = rng.random()
        if r < 0.35:
            F = Poisson(_round(rng.uniform(0.5, 5)))
        elif r < 0.7:
            F = Binomial(int(rng.integers(1, 7)), _round(rng.uniform(0.1, 0.9)))
        else:
            return atom(int(rng.integers(0, 6)))
        if rng.random() < 0.3:
            return DistI(F, 1, 6, False, bool(rng.random() < 0.5))
        return DistI(F)
    r = rng.random()
    if r < 0.4:
        F = Normal(_round(rng.uniform(-2, 2)), _round(rng.uniform(0.5, 2)))
        if rng.random() < 0.3:
            return DistR(F, _round(rng.uniform(-3, 0)), _round(rng.uniform(0.5, 3)))
        return DistR(F)
    if r < 0.6:
        a = _round(rng.uniform(-3, 2))
        b = _round(a + rng.uniform(0.5, 3))
        return DistR(Uniform(a, b), a, b)
    if r < 0.75:
        return DistR(Gamma(_round(rng.uniform(1, 3)), _round(rng.uniform(0.5, 1.5))), 0, math.inf)
    if r < 0.85:
        return DistR(Beta(_round(rng.uniform(1, 3)), _round(rng.uniform(1, 3))), 0, 1)
    return atom(_round(rng.uniform(-2, 2), 1))


def random_env(rng, var):
    if var != "Y" or rng.random() < 0.3:
        return None
    x = Identity(var)
    r = rng.random()
    if r < 0.4:
        t = Poly(x, (1.0, 0.0, 1.0))
    elif r < 0.7:
        t = Exp(x)
    else:
        t = Abs(Poly(x, (-0.5, 1.0)))
    return ((var, x), ("W", t))


def random_leaf(rng, var, with_env=True):
    env = random_env(rng, var) if with_env else None
    if with_env and var == "Y" and env is None:
        env = ((var, Identity(var)), ("W", Poly(Identity(var), (0.0, 2.0))))
    return make_leaf(var, random_dist(rng, KINDS[var]), env)


def random_spe(rng, names=None, depth=2, with_env=True):
    """A random well-formed SPE over a subset of KINDS (plus W when Y is present)."""
    if names is None:
        k = int(rng.integers(1, 5))
        names = sorted(rng.choice(sorted(KINDS), size=k, replace=False))
    names = list(names)
    if depth == 0:
        return make_product([random_leaf(rng, x, with_env) for x in names])
    r = rng.random()
    if len(names) > 1 and r < 0.45:
        order = list(rng.permutation(names))
        cut = int(rng.integers(1, len(order)))
        groups = [sorted(order[:cut]), sorted(order[cut:])]
        return make_product([random_spe(rng, g, depth - 1, with_env) for g in groups])
    if r < 0.85:
        k = int(rng.integers(2, 4))
        kids = [random_spe(rng, names, depth - 1, with_env) for _ in range(k)]
        return make_sum(kids, [_round(w) for w in rng.uniform(0.1, 1.0, size=k)])
    return make_product([random_leaf(rng, x, with_env) for x in names])


def random_literal(rng, names, kinds=None):
    x = str(rng.choice(names))
    kind = (kinds or KINDS).get(x, "real")
    if kind == "real" and rng.random() < 0.25:
        ix = Identity(x)
        r = rng.random()
        if r < 0.4:
            return Containment(Poly(ix, (0.0, 0.0, 1.0)), random_interval(rng, 0, 6))
        if r < 0.7:
            return Containment(Abs(ix), random_interval(rng, 0, 3))
        return Containment(Poly(ix, (1.0, -2.0)), random_interval(rng))
    return literal(x, random_outcomes(rng, kind))



def random_event(rng, names, depth=2, max_clauses=4, kinds=None):
    """A random event whose DNF has at most max_clauses clauses."""
    while True:
        e = _random_event(rng, list(names), depth, kinds)
        if len(dnf_clauses(e)) <= max_clauses:
            return e


def _random_event(rng, names, depth, kinds):
    r = rng.random()
    if depth == 0 or r < 0.35:
        return random_literal(rng, names, kinds)
    k = int(rng.integers(2, 4))
    parts = [_random_event(rng, names, depth - 1, kinds) for _ in range(k)]
    if r < 0.65:
        e = conj(*parts)
    else:
        e = disj(*parts)
    return negate(e) if rng.random() < 0.15 else e


def positive_event(rng, root, names, depth=2, tries=200, floor=1e-6, kinds=None):
    for _ in range(tries):
        e = random_event(rng, names, depth, kinds=kinds)
        if prob(root, e) > floor:
            return e
    raise RuntimeError("no positive-probability event found")


# ==============================================================================
# Rectangle unions.

def random_boxes(rng, m, h):
    """A disjunction of m boxes over h variables with integer endpoints in [0, 10]."""
    names = ["V%d" % i for i in range(h)]
    clauses = []
    for _ in range(m):
        k = int(rng.integers(1, h + 1))
        chosen = sorted(rng.choice(names, size=k, replace=False))
        lits = []
        for x in chosen:
            a, b = sorted(rng.choice(np.arange(0, 11), size=2, replace=False))
            lits.append(literal(str(x), oc.interval(float(a), float(b),
                                                     bool(rng.random() < 0.5),
                                                     bool(rng.random() < 0.5))))
        clauses.append(conj(*lits))
    return disj(*clauses) if m > 1 else clauses[0], names


def box_probes(rng, names, n):
    """Probe points mixing continuous draws with exact grid endpoints."""
    pts = []
    for i in range(n):
        if i % 2:
            pts.append({x: float(rng.integers(-1, 12)) for x in names})
        else:
            pts.append({x: float(rng.uniform(-1, 11)) for x in names})
    return pts


# ==============================================================================
# Programs.

def _real_dist(rng):
    r = rng.random()
    if r < 0.4:
        return "normal(%s, %s)" % (_round(rng.uniform(-2, 2), 2), _round(rng.uniform(0.5, 2), 2))
    if r < 0.7:
        a = _round(rng.uniform(-2, 1), 2)
        return "uniform(%s, %s)" % (a, _round(a + rng.uniform(0.5, 3), 2))
    if r < 0.85:
        return "gamma(%s, %s)" % (_round(rng.uniform(1, 3), 2), _round(rng.uniform(0.5, 1.5), 2))
    return "beta(%s, %s)" % (_round(rng.uniform(1, 3), 2), _round(rng.uniform(1, 3), 2))


def _str_dist(rng):
    k = int(rng.integers(1, 4))
    items = rng.choice(STRINGS, size=k, replace=False)
    if k == 1:
        return "atom('%s')" % items[0]
    return "choice({%s})" % ", ".join("'%s': %s" % (s, _round(rng.uniform(0.1, 1), 2)) for s in items)


def _int_dist(rng):
    r = rng.random()
    if r < 0.5:
        return "poisson(%s)" % _round(rng.uniform(0.5, 4), 2)
    if r < 0.8:
        return "binomial(%d, %s)" % (int(rng.integers(1, 6)), _round(rng.uniform(0.1, 0.9), 2))
    return "bernoulli(p=%s)" % _round(rng.uniform(0.1, 0.9), 2)


PROGRAM_KINDS = {"X": "real", "N": "int", "S": "str", "Y": "real", "W": "real"}


def random_program(rng):
    """Program text over X, N, S, Y, W with branching on X and N."""
    lines = ["X ~ %s" % _real_dist(rng), "N ~ %s" % _int_dist(rng)]
    c1 = _round(rng.uniform(-1, 1), 2)
    c2 = int(rng.integers(0, 3))
    arms = ["if X > %s:" % c1, "elif N <= %d:" % c2, "else:"]
    k = int(rng.integers(2, 4))
    if k == 2:
        arms = [arms[0], arms[2]]
    for head in arms:
        lines.append(head)
        lines.append("    S ~ %s" % _str_dist(rng))
        lines.append("    Y ~ %s" % _real_dist(rng))
    r = rng.random()
    if r < 0.4:
        lines.append("W = Y**2 + %s" % _round(rng.uniform(-1, 1), 2))
    elif r < 0.7:
        lines.append("W = 2*Y - 1")
    else:
        lines.append("W = exp(Y)")
    if rng.random() < 0.3:
        lines.append("condition(X > %s)" % _round(rng.uniform(-3, -1), 2))
    return "\n".join(lines) + "\n"
