"""Forward translation of commands into sum-product expressions."""

from __future__ import annotations

import ast
import itertools
import math
import time
import warnings
from dataclasses import dataclass, field

from .. import outcomes as oc
from ..distributions import (Beta, Bernoulli, Binomial, DistI, DistR, DistS, Gamma,
                             Normal, Poisson, Uniform, atom)
from ..events import Containment, Event, conj, disj, disjoin, negate, vars_of
from ..inference import ZeroProbabilityError, condition, condition0
from ..spe import (Leaf, Product, SpeGraph, Sum, UnsupportedEventError, configure,
                   equality_assignment, make_leaf, make_product, make_sum, node_count,
                   prob, reachable, tree_size)
from ..transforms import (Abs, Exp, Identity, Log, Piecewise, Root, Transform,
                          TransformError, evaluate, substitute, t_add, t_div, t_mul,
                          t_neg, t_pow, vars_of_transform)
from .parser import (DISTRIBUTIONS, ArrayRef, Assign, Command, Condition, Constrain, For, IfElse,
                     NotConstant, ParseError, RestrictionError, Sample, Sequence, Skip,
                     Switch, Violation, _is_call, check_restrictions, const_eval,
                     desugar_switch, parse, random_refs, target_name)


class TranslationError(ValueError):
    """A program cannot be translated into an SPE."""


class TranslationWarning(UserWarning):
    """A branch was dropped because its test has probability zero."""


@dataclass
class State:
    spe: object = None
    consts: dict = field(default_factory=dict)

    @property
    def scope(self) -> frozenset:
        return self.spe.scope if self.spe is not None else frozenset()


# ==============================================================================
# Expressions.

def _is_distribution(e) -> bool:
    return isinstance(e, ast.Call) and isinstance(e.func, ast.Name) and e.func.id in DISTRIBUTIONS


def _num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _var_name(node, state: State):
    if isinstance(node, (ast.Name, ast.Subscript)):
        try:
            name = target_name(node, state.consts)
        except ParseError:
            return None
        if name in state.scope:
            return name
    return None


def to_transform(node: ast.expr, state: State):
    """A univariate transform or a constant for an arithmetic expression."""
    name = _var_name(node, state)
    if name is not None:
        return Identity(name)
    if not random_refs(node, state.consts, state.scope):
        try:
            return const_eval(node, state.consts)
        except NotConstant as exc:
            raise TranslationError("unknown name %s (line %s)" % (exc, getattr(node, "lineno", "?"))) from None
    try:
        if isinstance(node, ast.BinOp):
            a, b = to_transform(node.left, state), to_transform(node.right, state)
            op = type(node.op)
            if op is ast.Add:
                return t_add(a, b)
            if op is ast.Sub:
                return t_add(a, t_neg(b))
            if op is ast.Mult:
                return t_mul(a, b)
            if op is ast.Div:
                return t_div(a, b)
            if op is ast.Pow:
                return t_pow(a, b)
        if isinstance(node, ast.UnaryOp):
            a = to_transform(node.operand, state)
            if isinstance(node.op, ast.USub):
                return t_neg(a)
            if isinstance(node.op, ast.UAdd):
                return a
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            f = node.func.id
            if f == "piecewise":
                pieces = []
                for arg in node.args:
                    if not isinstance(arg, ast.Tuple) or len(arg.elts) != 2:
                        raise TranslationError("piecewise takes (expression, event) pairs")
                    t = to_transform(arg.elts[0], state)
                    e = to_event(arg.elts[1], state)
                    if _num(t) or isinstance(e, bool):
                        raise TranslationError("piecewise pieces must depend on the variable")
                    pieces.append((t, e))
                return Piecewise(tuple(pieces))
            args = [to_transform(a, state) for a in node.args]
            if f == "sqrt" and len(args) == 1:
                return Root(args[0], 2)
            if f == "cbrt" and len(args) == 1:
                return Root(args[0], 3)
            if f == "exp" and len(args) == 1:
                return Exp(args[0])
            if f == "log" and len(args) in (1, 2):
                return Log(args[0]) if len(args) == 1 else Log(args[0], float(args[1]))
            if f == "abs" and len(args) == 1:
                return Abs(args[0])
    except TransformError as exc:
        refs = random_refs(node, state.consts, state.scope)
        rule = "R3" if len(refs) > 1 else "transform"
        raise TranslationError("%s: %s (line %s)" % (rule, exc, getattr(node, "lineno", "?"))) from None
    raise TranslationError("unsupported expression %s (line %s)"
                           % (ast.unparse(node), getattr(node, "lineno", "?")))


def _value_set(values) -> oc.Outcomes:
    if isinstance(values, (str, int, float)):
        values = [values]
    strs = [v for v in values if isinstance(v, str)]
    nums = [float(v) for v in values if not isinstance(v, str)]
    return oc.union([oc.strings(*strs), oc.points(*nums)])


def _flip(op):
    return {ast.Lt: ast.Gt, ast.LtE: ast.GtE, ast.Gt: ast.Lt, ast.GtE: ast.LtE,
            ast.Eq: ast.Eq, ast.NotEq: ast.NotEq}[op]


def _compare(t, op, c) -> Event:
    if op is ast.In or op is ast.NotIn:
        e = Containment(t, _value_set(c))
        return negate(e) if op is ast.NotIn else e
    if op is ast.Eq or op is ast.NotEq:
        e = t.eq(c)
        return negate(e) if op is ast.NotEq else e
    if isinstance(c, str):
        raise TranslationError("order comparison against a string")
    return {ast.Lt: t.__lt__, ast.LtE: t.__le__, ast.Gt: t.__gt__, ast.GtE: t.__ge__}[op](c)


def to_event(node: ast.expr, state: State):
    """An Event, or a bool for tests that do not involve random variables."""
    if not random_refs(node, state.consts, state.scope):
        try:
            return bool(const_eval(node, state.consts))
        except NotConstant as exc:
            raise TranslationError("unknown name %s (line %s)" % (exc, getattr(node, "lineno", "?"))) from None
    if isinstance(node, ast.BoolOp):
        parts = [to_event(v, state) for v in node.values]
        if isinstance(node.op, ast.And):
            if any(p is False for p in parts):
                return False
            parts = [p for p in parts if p is not True]
            return conj(*parts) if parts else True
        if any(p is True for p in parts):
            return True
        parts = [p for p in parts if p is not False]
        return disj(*parts) if parts else False
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
        e = to_event(node.operand, state)
        return (not e) if isinstance(e, bool) else negate(e)
    if isinstance(node, ast.Compare):
        events = []
        left = node.left
        for op, right in zip(node.ops, node.comparators):
            a = to_transform(left, state) if random_refs(left, state.consts, state.scope) else const_eval(left, state.consts)
            b = to_transform(right, state) if random_refs(right, state.consts, state.scope) else const_eval(right, state.consts)
            opt = type(op)
            if isinstance(a, Transform) and isinstance(b, Transform):
                raise TranslationError("R3: comparison between random expressions (line %s)" % node.lineno)
            if isinstance(a, Transform):
                events.append(_compare(a, opt, b))
            elif isinstance(b, Transform):
                if opt in (ast.In, ast.NotIn):
                    raise TranslationError("membership test needs a variable on the left")
                events.append(_compare(b, _flip(opt), a))
            elif not const_eval(ast.Compare(left=ast.Constant(a), ops=[op], comparators=[ast.Constant(b)]), {}):
                return False
            left = right
        return conj(*events) if events else True
    name = _var_name(node, state)
    if name is not None:
        return negate(Identity(name).eq(0))
    raise TranslationError("unsupported event %s (line %s)" % (ast.unparse(node), getattr(node, "lineno", "?")))


# ==============================================================================
# Distributions.

_ALIASES = {
    "normal": (Normal, ("loc", "scale"), {"mu": "loc", "mean": "loc", "sigma": "scale", "std": "scale"}),
    "uniform": (Uniform, ("a", "b"), {"low": "a", "high": "b", "loc": "a"}),
    "gamma": (Gamma, ("a", "scale"), {"k": "a", "shape": "a"}),
    "beta": (Beta, ("a", "b"), {}),
    "poisson": (Poisson, ("mu",), {"lam": "mu", "rate": "mu"}),
    "binomial": (Binomial, ("n", "p"), {}),
    "bernoulli": (Bernoulli, ("p",), {}),
}


def _params(call: ast.Call, names, aliases, consts) -> dict:
    out = {}
    for name, a in zip(names, call.args):
        out[name] = const_eval(a, consts)
    if len(call.args) > len(names):
        raise TranslationError("too many arguments to %s" % call.func.id)
    for k in call.keywords:
        key = aliases.get(k.arg, k.arg)
        if key not in names:
            raise TranslationError("unknown parameter %s for %s" % (k.arg, call.func.id))
        out[key] = const_eval(k.value, consts)
    return out


def _choice_node(name: str, table: dict):
    if not isinstance(table, dict) or not table:
        raise TranslationError("choice needs a nonempty dict of outcome weights")
    strs = [(k, w) for k, w in table.items() if isinstance(k, str)]
    nums = [(k, w) for k, w in table.items() if not isinstance(k, str)]
    kids, weights = [], []
    if strs and sum(w for _, w in strs) > 0:
        kids.append(make_leaf(name, DistS(tuple(strs))))
        weights.append(sum(w for _, w in strs))
    for k, w in nums:
        if w > 0:
            kids.append(make_leaf(name, atom(k)))
            weights.append(w)
    if not kids:
        raise TranslationError("choice needs positive total weight")
    return make_sum(kids, weights)


def dist_node(name: str, expr: ast.expr, consts: dict):
    """Leaf (or mixture of leaves) for a distribution expression."""
    if isinstance(expr, ast.Constant) or (isinstance(expr, ast.UnaryOp) and isinstance(expr.operand, ast.Constant)):
        return make_leaf(name, atom(const_eval(expr, consts)))
    if not isinstance(expr, ast.Call) or not isinstance(expr.func, ast.Name):
        raise TranslationError("expected a distribution for %s" % name)
    f = expr.func.id
    try:
        if f in ("choice", "discrete"):
            if len(expr.args) != 1:
                raise TranslationError("choice takes one dict argument")
            return _choice_node(name, const_eval(expr.args[0], consts))
        if f in ("atom", "atomic"):
            args = [const_eval(a, consts) for a in expr.args] + [const_eval(k.value, consts) for k in expr.keywords]
            if len(args) != 1:
                raise TranslationError("atom takes one value")
            return make_leaf(name, atom(args[0]))
        if f not in _ALIASES:
            raise TranslationError("unknown distribution %s" % f)
        cls, names, aliases = _ALIASES[f]
        params = _params(expr, names, aliases, consts)
        cdf = cls(**params)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, TranslationError):
            raise
        raise TranslationError("bad parameters for %s (line %s): %s" % (f, expr.lineno, exc)) from None
    if cdf.continuous:
        return make_leaf(name, DistR(cdf))
    return make_leaf(name, DistI(cdf))


# ==============================================================================
# SPE edits.

def add_transform(node, source: str, name: str, t: Transform):
    """Add ``name = t`` to the environment of the leaves owning ``source``."""
    memo = {}

    def go(n):
        hit = memo.get(id(n))
        if hit is not None:
            return hit
        if isinstance(n, Leaf):
            env = dict(n.env)
            tt = t if source == n.var else substitute(t, source, env[source])
            out = make_leaf(n.var, n.dist, n.env + ((name, tt),))
        elif isinstance(n, Sum):
            out = make_sum([go(c) for c in n.children], n.weights)
        else:
            out = make_product([go(c) if source in c.scope else c for c in n.children])
        memo[id(n)] = out
        return out

    return go(node)


def finite_support(node, name: str):
    """Sorted support of a variable with finitely many values, else None."""
    values = set()
    for n in reachable(node):
        if not isinstance(n, Leaf) or name not in n.scope:
            continue
        d = n.dist
        if isinstance(d, DistS):
            base = [s for s, _ in d.weights]
        elif isinstance(d, DistI):
            lo, hi = d.lo, d.hi
            if d.cdf.name == "atomic":
                base = [d.cdf.loc]
            else:
                lo, hi = max(lo, d.cdf.support_lo), min(hi, d.cdf.support_hi)
                if not (math.isfinite(lo) and math.isfinite(hi)):
                    return None
                ks = range(math.ceil(lo), math.floor(hi) + 1)
                base = [float(k) for k in ks if oc.contains(d.support, k) and d.cdf.pmf(k) > 0]
        else:
            return None
        if name == n.var:
            values.update(base)
        else:
            t = dict(n.env)[name]
            for b in base:
                try:
                    values.add(evaluate(t, b))
                except Exception:
                    pass
    return sorted(values, key=lambda v: (isinstance(v, str), v))


# ==============================================================================
# Commands.

class Translator:
    def __init__(self):
        self.stats = {"branches_dropped": 0}

    def run(self, c: Command, state: State) -> State:
        if isinstance(c, Sequence):
            for x in c.commands:
                state = self.run(x, state)
            return state
        if isinstance(c, Skip):
            return state
        if isinstance(c, Sample):
            return self.sample(c.target, c.expr, state, c.line)
        if isinstance(c, Assign):
            return self.assign(c, state)
        if isinstance(c, Condition):
            return self.condition(c, state)
        if isinstance(c, Constrain):
            return self.constrain(c, state)
        if isinstance(c, For):
            try:
                items = list(const_eval(c.iter, state.consts))
            except (NotConstant, TypeError):
                raise TranslationError("loop bounds must be constant (line %d)" % c.line) from None
            for v in items:
                state.consts[c.var] = v
                state = self.run(c.body, state)
            return state
        if isinstance(c, Switch):
            return self.run(desugar_switch(c, state.consts), state)
        if isinstance(c, IfElse):
            arms = [(lambda st, b=b: self.run(b, st)) for _, b in c.branches]
            tests = [to_event(t, state) for t, _ in c.branches]
            orelse = (lambda st: self.run(c.orelse, st)) if c.orelse else None
            return self.ifelse(list(zip(tests, arms)), orelse, state, c.line)
        raise TranslationError("unsupported command %r" % (c,))

    # -- sampling and assignment ---------------------------------------------

    def _fresh(self, name, state, line):
        if name in state.scope:
            raise RestrictionError([Violation("R1", line, "variable %s is already defined" % name)])

    def sample(self, target, expr, state: State, line: int) -> State:
        name = target_name(target, state.consts)
        self._fresh(name, state, line)
        is_dist = _is_distribution(expr)
        refs = random_refs(expr, state.consts, state.scope)
        if is_dist and refs:
            return self._expand_parameters(target, expr, sorted(refs), state, line)
        if is_dist or not refs:
            node = dist_node(name, expr, state.consts)
            spe = node if state.spe is None else make_product([state.spe, node])
            return State(spe, state.consts)
        return self.transform(name, expr, state, line)

    def transform(self, name, expr, state: State, line: int) -> State:
        t = to_transform(expr, state)
        if not isinstance(t, Transform):
            raise TranslationError("expected an expression of a random variable (line %d)" % line)
        xs = vars_of_transform(t)
        if len(xs) != 1:
            raise RestrictionError([Violation("R3", line, "transform of several variables")])
        (source,) = xs
        return State(add_transform(state.spe, source, name, t), state.consts)

    def _expand_parameters(self, target, expr, refs, state: State, line: int) -> State:
        supports = []
        for r in refs:
            s = finite_support(state.spe, r)
            if s is None:
                raise RestrictionError([Violation(
                    "R4", line, "parameter depends on %s, which lacks finite support" % r)])
            supports.append(s)
        arms = []
        for combo in itertools.product(*supports):
            test = conj(*[Identity(r).eq(v) for r, v in zip(refs, combo)])

            def arm(st, combo=combo):
                consts = dict(st.consts)
                consts.update({r: (int(v) if _num(v) and float(v).is_integer() else v)
                               for r, v in zip(refs, combo)})
                node = dist_node(target_name(target, st.consts), expr, consts)
                return State(make_product([st.spe, node]), st.consts)

            arms.append((test, arm))
        return self.ifelse(arms, None, state, line)

    def assign(self, c: Assign, state: State) -> State:
        e = c.expr
        if _is_call(e, "array"):
            name = target_name(c.target, state.consts)
            try:
                size = int(const_eval(e.args[0], state.consts))
            except (NotConstant, IndexError):
                raise TranslationError("array size must be constant (line %d)" % c.line) from None
            state.consts[name] = ArrayRef(name, size)
            return state
        refs = random_refs(e, state.consts, state.scope)
        is_dist = _is_distribution(e)
        if refs or is_dist:
            return self.sample(c.target, e, state, c.line)
        name = target_name(c.target, state.consts)
        if name in state.scope:
            raise RestrictionError([Violation("R1", c.line, "variable %s is already defined" % name)])
        try:
            state.consts[name] = const_eval(e, state.consts)
        except NotConstant as exc:
            raise TranslationError("unknown name %s (line %d)" % (exc, c.line)) from None
        return state

    # -- conditioning -------------------------------------------------------

    def condition(self, c: Condition, state: State) -> State:
        e = to_event(c.expr, state)
        if e is True:
            return state
        if e is False or state.spe is None:
            raise ZeroProbabilityError("condition is unsatisfiable (line %d)" % c.line)
        try:
            asg = equality_assignment(e)
        except UnsupportedEventError:
            asg = None
        if asg is not None:
            try:
                return State(condition0(state.spe, asg), state.consts)
            except UnsupportedEventError:
                pass
        return State(condition(state.spe, e), state.consts)

    def constrain(self, c: Constrain, state: State) -> State:
        e = c.expr
        if isinstance(e, ast.Dict):
            asg = {}
            for k, v in zip(e.keys, e.values):
                name = _var_name(k, state)
                if name is None:
                    raise TranslationError("constrain keys must be variables (line %d)" % c.line)
                asg[name] = const_eval(v, state.consts)
        else:
            asg = equality_assignment(to_event(e, state))
        return State(condition0(state.spe, asg), state.consts)

    # -- branching ----------------------------------------------------------

    def ifelse(self, arms, orelse, state: State, line: int) -> State:
        """Translate an if/elif/else chain given (event-or-bool, body) arms."""
        live = []
        for test, body in arms:
            if test is False:
                continue
            if test is True:
                orelse = body
                break
            live.append((test, body))
        if not live:
            return (orelse or (lambda st: st))(state)
        if state.spe is None:
            raise TranslationError("branch test on undefined variables (line %d)" % line)
        missing = set().union(*[vars_of(t) for t, _ in live]) - state.scope
        if missing:
            raise TranslationError("branch test uses undefined variables %s (line %d)" % (sorted(missing), line))
        events = []
        negs = []
        for test, body in live:
            events.append((disjoin(conj(*negs, test)) if negs else test, body, True))
            negs.append(negate(test))
        events.append((disjoin(conj(*negs)), orelse or (lambda st: st), orelse is not None))
        kids, weights = [], []
        for e, body, explicit in events:
            p = prob(state.spe, e)
            if p <= 0:
                self.stats["branches_dropped"] += 1
                if explicit:
                    warnings.warn("branch at line %d has probability zero and is dropped" % line,
                                  TranslationWarning, stacklevel=2)
                continue
            sub = body(State(condition(state.spe, e), dict(state.consts)))
            kids.append(sub.spe)
            weights.append(p)
        if not kids:
            raise TranslationError("every branch has probability zero (line %d)" % line)
        try:
            spe = make_sum(kids, weights)
        except ValueError as exc:
            raise RestrictionError([Violation("R2", line, "branches define different variables: %s" % exc)]) from None
        return State(spe, state.consts)


# ==============================================================================
# Entry points.

def _as_command(program) -> Command:
    return parse(program) if isinstance(program, str) else program


def translate(program, optimize: bool = True, consts: dict = None) -> SpeGraph:
    """Translate a program (text or commands) into an SPE graph."""
    c = _as_command(program)
    violations = check_restrictions(c, consts)
    if violations:
        raise RestrictionError(violations)
    t0 = time.perf_counter()
    translator = Translator()
    with configure(dedup=optimize, factorize=optimize, memoize=optimize):
        state = translator.run(c, State(None, dict(consts or {})))
    if state.spe is None:
        raise TranslationError("program defines no random variables")
    g = SpeGraph(state.spe)
    g.stats = dict(translator.stats, seconds=time.perf_counter() - t0,
                   node_count=g.node_count, tree_size=tree_size(g.root), optimized=optimize)
    return g


def optimize(g) -> SpeGraph:
    """Rebuild a graph with factorization and deduplication enabled."""
    root = g.root if isinstance(g, SpeGraph) else g
    memo = {}
    with configure(dedup=True, factorize=True):
        for n in reachable(root):
            if isinstance(n, Leaf):
                out = make_leaf(n.var, n.dist, n.env)
            elif isinstance(n, Sum):
                out = make_sum([memo[id(c)] for c in n.children], n.weights)
            else:
                out = make_product([memo[id(c)] for c in n.children])
            memo[id(n)] = out
    result = SpeGraph(memo[id(root)])
    result.stats = {
        "node_count_before": node_count(root), "node_count_after": result.node_count,
        "tree_size_before": tree_size(root), "tree_size_after": tree_size(result.root),
    }
    return result
