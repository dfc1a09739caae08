"""Sum-product expressions: graph nodes, construction, and queries.

Nodes are immutable.  The builders ``make_leaf``, ``make_sum`` and
``make_product`` flatten nested nodes of the same kind and, when enabled,
intern structurally identical nodes (deduplication) and hoist children that
are common to every branch of a Sum (factorization).  Raw constructors
``Leaf``, ``Sum`` and ``Product`` perform no checks so that ``validate`` can
report malformed graphs.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
import sys
import weakref
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from . import outcomes as oc
from .distributions import (DistI, DistR, DistS, Distribution, dist_logdensity,
                            dist_logprob, dist_sample_array)
from .events import (Containment, Event, ScopeError, conj, disjoin_clauses,
                     dnf_clauses, eval_event, literal, normalize_clauses, subsenv, vars_of)
from .transforms import Identity, Transform, evaluate_array, vars_of_transform

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

INF = math.inf


class UnsupportedEventError(ValueError):
    """The event is outside the class a query supports."""


# ==============================================================================
# Options.

@dataclass(frozen=True)
class Options:
    dedup: bool = True
    factorize: bool = True
    memoize: bool = True
    max_clauses: int = 20
    # Disjunctions with more clauses than this are summed over disjoined
    # clauses instead of expanded by inclusion-exclusion.
    ie_limit: int = 6


_OPTIONS = contextvars.ContextVar("spe_options", default=Options())


def options() -> Options:
    return _OPTIONS.get()


@contextlib.contextmanager
def configure(**kwargs):
    """Temporarily override construction and query options."""
    token = _OPTIONS.set(replace(_OPTIONS.get(), **kwargs))
    try:
        yield _OPTIONS.get()
    finally:
        _OPTIONS.reset(token)


# ==============================================================================
# Nodes.

class Node:
    __slots__ = ("scope", "__weakref__")


class Leaf(Node):
    __slots__ = ("var", "dist", "env")

    def __init__(self, var: str, dist: Distribution, env=None):
        self.var = var
        self.dist = dist
        if env is None:
            env = ((var, Identity(var)),)
        self.env = tuple(env.items()) if isinstance(env, dict) else tuple(env)
        self.scope = frozenset(name for name, _ in self.env)

    def __repr__(self):
        return "Leaf(%r, %r)" % (self.var, self.dist)


class Sum(Node):
    __slots__ = ("children", "weights")

    def __init__(self, children: Sequence[Node], weights: Sequence[float]):
        self.children = tuple(children)
        self.weights = tuple(float(w) for w in weights)
        self.scope = self.children[0].scope if self.children else frozenset()

    def __repr__(self):
        return "Sum(%d children)" % len(self.children)


class Product(Node):
    __slots__ = ("children",)

    def __init__(self, children: Sequence[Node]):
        self.children = tuple(children)
        scope = frozenset()
        for c in self.children:
            scope |= c.scope
        self.scope = scope

    def __repr__(self):
        return "Product(%d children)" % len(self.children)


def children_of(node: Node) -> tuple:
    return () if isinstance(node, Leaf) else node.children


# ==============================================================================
# Interning and builders.

_INTERN: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()


def _intern(key, build):
    if not options().dedup:
        return build()
    node = _INTERN.get(key)
    if node is None:
        node = build()
        _INTERN[key] = node
    return node


def dist_key(d: Distribution) -> tuple:
    return d.key()


def make_leaf(var: str, dist: Distribution, env=None) -> Leaf:
    if env is None:
        env = ((var, Identity(var)),)
    env = tuple(env.items()) if isinstance(env, dict) else tuple(env)
    return _intern(("L", var, dist.key(), env), lambda: Leaf(var, dist, env))


def _product_key(c: Node):
    return min(c.scope) if c.scope else ""


def make_product(children: Iterable[Node]) -> Node:
    flat = []
    for c in children:
        flat.extend(c.children if isinstance(c, Product) else (c,))
    if not flat:
        raise ValueError("Product needs at least one child")
    if len(flat) == 1:
        return flat[0]
    seen = set()
    for c in flat:
        if seen & c.scope:
            raise ValueError("Product children must have disjoint scopes")
        seen |= c.scope
    flat.sort(key=_product_key)
    return _intern(("P",) + tuple(id(c) for c in flat), lambda: Product(flat))


def _sum_parts(node: Node) -> list:
    return list(node.children) if isinstance(node, Product) else [node]


def make_sum(children: Sequence[Node], weights: Sequence[float]) -> Node:
    pairs = []
    for c, w in zip(children, weights):
        w = float(w)
        if w < 0 or math.isnan(w):
            raise ValueError("Sum weights must be nonnegative")
        if w == 0:
            continue
        if isinstance(c, Sum):
            z = sum(c.weights)
            pairs.extend((cc, w * cw / z) for cc, cw in zip(c.children, c.weights) if cw > 0)
        else:
            pairs.append((c, w))
    if not pairs:
        raise ValueError("Sum needs positive total weight")
    merged = {}
    order = []
    for c, w in pairs:
        if id(c) in merged:
            merged[id(c)] = (c, merged[id(c)][1] + w)
        else:
            merged[id(c)] = (c, w)
            order.append(id(c))
    items = [merged[k] for k in order]
    if len(items) == 1:
        return items[0][0]
    scope = items[0][0].scope
    if any(c.scope != scope for c, _ in items):
        raise ValueError("Sum children must have identical scopes")
    if options().factorize:
        parts = [_sum_parts(c) for c, _ in items]
        common_ids = set(id(p) for p in parts[0])
        for ps in parts[1:]:
            common_ids &= set(id(p) for p in ps)
        if common_ids:
            rests = [[p for p in ps if id(p) not in common_ids] for ps in parts]
            if all(rests):
                common = [p for p in parts[0] if id(p) in common_ids]
                inner = make_sum([make_product(r) for r in rests], [w for _, w in items])
                return make_product(common + [inner])
    cs = [c for c, _ in items]
    ws = [w for _, w in items]
    z = sum(ws)
    key = ("S",) + tuple(id(c) for c in cs) + tuple(float("%.12g" % (w / z)) for w in ws)
    return _intern(key, lambda: Sum(cs, ws))


# ==============================================================================
# Graph utilities.

def reachable(root: Node) -> list:
    """Distinct nodes reachable from root, children before parents."""
    out, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(children_of(node)):
            if id(c) not in seen:
                stack.append((c, False))
    return out


def node_count(root: Node) -> int:
    return len(reachable(_node(root)))


def tree_size(root: Node) -> int:
    """Number of nodes when every shared reference is counted separately."""
    size = {}
    for node in reachable(_node(root)):
        size[id(node)] = 1 + sum(size[id(c)] for c in children_of(node))
    return size[id(_node(root))]


def scope(node: Node) -> frozenset:
    return _node(node).scope


class SpeGraph:
    """A rooted SPE with stable node identities for the reachable nodes."""

    def __init__(self, root: Node):
        self.root = root
        self.nodes = reachable(root)
        self.ids = {id(n): i for i, n in enumerate(self.nodes)}

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def tree_size(self) -> int:
        return tree_size(self.root)

    @property
    def scope(self) -> frozenset:
        return self.root.scope

    def __repr__(self):
        return "SpeGraph(%d nodes, scope=%s)" % (self.node_count, sorted(self.scope))


def _node(x) -> Node:
    return x.root if isinstance(x, SpeGraph) else x


# ==============================================================================
# Well-formedness.

@dataclass(frozen=True)
class Violation:
    node: Node
    condition: str
    message: str


def validate(root) -> list:
    """All definedness violations in the graph (empty list when well formed)."""
    root = _node(root)
    out = []
    # Acyclicity by colored DFS over node identities.
    color = {}
    stack = [(root, iter(children_of(root)))]
    color[id(root)] = 1
    while stack:
        node, it = stack[-1]
        child = next(it, None)
        if child is None:
            color[id(node)] = 2
            stack.pop()
            continue
        c = color.get(id(child), 0)
        if c == 1:
            out.append(Violation(child, "acyclic", "cycle through %r" % (child,)))
            return out
        if c == 0:
            color[id(child)] = 1
            stack.append((child, iter(children_of(child))))
    for node in reachable(root):
        if isinstance(node, Leaf):
            env = node.env
            if not env or env[0] != (node.var, Identity(node.var)):
                if dict(env).get(node.var) != Identity(node.var):
                    out.append(Violation(node, "C1", "environment must map %s to itself" % node.var))
            defined = set()
            for name, t in env:
                if name == node.var:
                    defined.add(name)
                    continue
                missing = vars_of_transform(t) - defined
                if missing or name in defined:
                    out.append(Violation(node, "C2", "environment entry %s is not topologically ordered" % name))
                defined.add(name)
        elif isinstance(node, Product):
            seen = set()
            for c in node.children:
                if seen & c.scope:
                    out.append(Violation(node, "C3", "Product children share variables %s" % sorted(seen & c.scope)))
                    break
                seen |= c.scope
        elif isinstance(node, Sum):
            if len(node.children) != len(node.weights) or not node.children:
                out.append(Violation(node, "C5", "Sum weights do not match its children"))
                continue
            if any(c.scope != node.children[0].scope for c in node.children):
                out.append(Violation(node, "C4", "Sum children have different scopes"))
            if any(w < 0 or math.isnan(w) for w in node.weights) or not sum(node.weights) > 0:
                out.append(Violation(node, "C5", "Sum weights must be nonnegative with positive total"))
    return out


# ==============================================================================
# Probability.

def _logsumexp(xs: Sequence[float]) -> float:
    xs = [x for x in xs if x > -INF]
    if not xs:
        return -INF
    m = max(xs)
    return m + math.log(sum(math.exp(x - m) for x in xs))


def _child_for(node: Node, x: str) -> int:
    for i, c in enumerate(node.children):
        if x in c.scope:
            return i
    raise ScopeError("variable %s is not in scope" % x)


def group_literals(node: Node, literals: Iterable[Containment]) -> dict:
    """Map child index of a Product to the literals over its scope."""
    groups = {}
    for lit in literals:
        (x,) = vars_of_transform(lit.transform)
        groups.setdefault(_child_for(node, x), []).append(lit)
    return groups


class QueryCache:
    """Per-query memo tables keyed by node identity and event."""

    def __init__(self, memoize: bool = True):
        self.memoize = memoize
        self.prob = {}
        self.density = {}
        self.condition = {}


def _logprob(node: Node, e: Event, cache: QueryCache) -> float:
    key = (id(node), e)
    if cache.memoize:
        hit = cache.prob.get(key)
        if hit is not None:
            return hit
    if isinstance(node, Leaf):
        v = eval_event(subsenv(e, node.env), node.var)
        result = dist_logprob(node.dist, v)
    elif isinstance(node, Sum):
        lz = math.log(sum(node.weights))
        result = _logsumexp([math.log(w) - lz + _logprob(c, e, cache)
                             for c, w in zip(node.children, node.weights) if w > 0])
    else:
        clauses = dnf_clauses(e)
        if len(clauses) == 1:
            result = _logprob_clause(node, clauses[0], cache)
        elif len(clauses) <= options().ie_limit:
            result = _inclusion_exclusion(node, clauses, cache)
        else:
            result = _disjoint_sum(node, e, cache)
    if cache.memoize:
        cache.prob[key] = result
    return result


def _logprob_clause(node: Node, literals: tuple, cache: QueryCache) -> float:
    total = 0.0
    for i, lits in group_literals(node, literals).items():
        lp = _logprob(node.children[i], conj(*lits), cache)
        if lp == -INF:
            return -INF
        total += lp
    return total


def _inclusion_exclusion(node: Node, clauses: list, cache: QueryCache) -> float:
    n = len(clauses)
    if n > options().max_clauses:
        raise UnsupportedEventError(
            "disjunction with %d clauses exceeds the inclusion-exclusion limit %d"
            % (n, options().max_clauses))
    masks = sorted(range(1, 2 ** n), key=lambda m: (bin(m).count("1"), m))
    zeros = []
    terms = []
    for m in masks:
        # Supersets of a zero-probability subset have probability zero.
        if any(m & z == z for z in zeros):
            continue
        lits = tuple(lit for j in range(n) if m >> j & 1 for lit in clauses[j])
        lp = _logprob_clause(node, lits, cache)
        if lp == -INF:
            zeros.append(m)
            continue
        sign = 1.0 if bin(m).count("1") % 2 == 1 else -1.0
        terms.append((sign, lp))
    if not terms:
        return -INF
    top = max(lp for _, lp in terms)
    total = sum(s * math.exp(lp - top) for s, lp in terms)
    if total <= 0:
        return -INF
    return top + math.log(total)


def _disjoint_sum(node: Node, e: Event, cache: QueryCache) -> float:
    """Log probability as a sum over pairwise-disjoint solved clauses."""
    lps = []
    for c in disjoin_clauses(normalize_clauses(e)):
        lits = tuple(literal(x, v) for x, v in c.items())
        lps.append(_logprob_clause(node, lits, cache))
    return _logsumexp(lps)


def _check_scope(node: Node, e: Event):
    extra = vars_of(e) - node.scope
    if extra:
        raise ScopeError("event variables %s are not in scope" % sorted(extra))


def logprob(root, e: Event, cache: QueryCache = None) -> float:
    node = _node(root)
    _check_scope(node, e)
    if cache is None:
        cache = QueryCache(options().memoize)
    return _logprob(node, e, cache)


def prob(root, e: Event, cache: QueryCache = None) -> float:
    """Probability of event e under the SPE."""
    lp = logprob(root, e, cache)
    return min(math.exp(lp), 1.0) if lp > -INF else 0.0


# ==============================================================================
# Density.

def equality_assignment(e) -> dict:
    """Read a conjunction of single-outcome identity literals as an assignment."""
    if isinstance(e, dict):
        return dict(e)
    lits = e.events if hasattr(e, "events") and not isinstance(e, Containment) else (e,)
    out = {}
    for lit in lits:
        if not isinstance(lit, Containment) or not isinstance(lit.transform, Identity):
            raise UnsupportedEventError("density needs identity equality literals")
        v = lit.outcomes
        if isinstance(v, oc.FiniteReal) and len(v.reals) == 1:
            value = v.reals[0]
        elif isinstance(v, oc.FiniteStr) and len(v.strings) == 1 and not v.complemented:
            value = v.strings[0]
        else:
            raise UnsupportedEventError("density needs single-outcome literals")
        if lit.transform.var in out:
            raise UnsupportedEventError("variable %s constrained twice" % lit.transform.var)
        out[lit.transform.var] = value
    return out


def _logdensity(node: Node, assignment: dict, cache: QueryCache) -> tuple:
    names = frozenset(assignment) & node.scope
    key = (id(node), names)
    if cache.memoize:
        hit = cache.density.get(key)
        if hit is not None:
            return hit
    if isinstance(node, Leaf):
        if names - {node.var}:
            raise UnsupportedEventError("density on transformed variables %s" % sorted(names - {node.var}))
        result = dist_logdensity(node.dist, assignment[node.var]) if names else (0, 0.0)
    elif isinstance(node, Sum):
        lz = math.log(sum(node.weights))
        parts = [(_logdensity(c, assignment, cache), w) for c, w in zip(node.children, node.weights) if w > 0]
        live = [(d, lv, w) for (d, lv), w in parts if lv > -INF]
        if not live:
            result = (min(d for (d, _), _ in parts), -INF)
        else:
            dstar = min(d for d, _, _ in live)
            result = (dstar, _logsumexp([math.log(w) - lz + lv for d, lv, w in live if d == dstar]))
    else:
        deg, total = 0, 0.0
        for c in node.children:
            if c.scope & names:
                d, lv = _logdensity(c, assignment, cache)
                deg += d
                total += lv
        result = (deg, total)
    if cache.memoize:
        cache.density[key] = result
    return result


def logdensity(root, e, cache: QueryCache = None) -> tuple:
    node = _node(root)
    assignment = equality_assignment(e)
    extra = set(assignment) - node.scope
    if extra:
        raise ScopeError("variables %s are not in scope" % sorted(extra))
    if cache is None:
        cache = QueryCache(options().memoize)
    return _logdensity(node, assignment, cache)


def density(root, e) -> tuple:
    """Generalized density (degree, value) at an equality assignment."""
    deg, lv = logdensity(root, e)
    return deg, (math.exp(lv) if lv > -INF else 0.0)


# ==============================================================================
# Simulation.

def _sample(node: Node, n: int, rng: np.random.Generator) -> dict:
    if isinstance(node, Leaf):
        out = {node.var: dist_sample_array(node.dist, rng.random(n))}
        for name, t in node.env[1:]:
            out[name] = np.asarray(evaluate_array(t, out))
        return out
    if isinstance(node, Product):
        out = {}
        for c in node.children:
            out.update(_sample(c, n, rng))
        return out
    w = np.asarray(node.weights, dtype=float)
    idx = rng.choice(len(w), size=n, p=w / w.sum())
    parts = []
    for j, c in enumerate(node.children):
        pos = np.flatnonzero(idx == j)
        if len(pos):
            parts.append((pos, _sample(c, len(pos), rng)))
    out = {}
    for name in node.scope:
        cols = [s[name] for _, s in parts]
        dtype = object if any(np.asarray(col).dtype == object for col in cols) else float
        arr = np.empty(n, dtype=dtype)
        for (pos, _), col in zip(parts, cols):
            arr[pos] = col
        out[name] = arr
    return out


def sample(root, n: int, rng=None) -> dict:
    """Draw n joint samples; returns a column array per variable."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    node = _node(root)
    if n == 0:
        return {name: np.empty(0) for name in node.scope}
    return _sample(node, n, rng)


def simulate(root, vars=None, rng=None) -> dict:
    """One joint sample restricted to ``vars`` (all variables by default)."""
    cols = sample(root, 1, rng)
    names = sorted(cols) if vars is None else list(vars)
    out = {}
    for name in names:
        v = cols[name][0]
        out[name] = v if isinstance(v, str) else float(v)
    return out
