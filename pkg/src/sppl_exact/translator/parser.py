"""Source language front end: parsing into commands and static checks.

The surface syntax is Python-like.  A few constructs are rewritten before
handing the text to Python's ``ast`` module:

  ``x ~ E``                          sample (or transform) statement
  ``switch x cases (v in values):``  switch macro
  ``condition`` followed by an indented event on the next lines
"""

from __future__ import annotations

import ast
import io
import math
import re
import tokenize
from dataclasses import dataclass, field
from typing import Optional


class ParseError(SyntaxError):
    """Malformed program text, with line and column when known."""


class RestrictionError(ValueError):
    """A program violates one of the restrictions R1-R4."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


# ==============================================================================
# Commands.

@dataclass
class Command:
    line: int = field(default=0, kw_only=True)


@dataclass
class Sample(Command):
    target: ast.expr
    expr: ast.expr


@dataclass
class Assign(Command):
    target: ast.expr
    expr: ast.expr


@dataclass
class Condition(Command):
    expr: ast.expr


@dataclass
class Constrain(Command):
    expr: ast.expr


@dataclass
class IfElse(Command):
    branches: list  # of (test expr, Sequence)
    orelse: Optional["Sequence"] = None


@dataclass
class For(Command):
    var: str
    iter: ast.expr
    body: "Sequence"


@dataclass
class Switch(Command):
    subject: ast.expr
    var: str
    values: ast.expr
    body: "Sequence"


@dataclass
class Skip(Command):
    pass


@dataclass
class Sequence(Command):
    commands: list


# ==============================================================================
# Preprocessing.

_SWITCH = re.compile(r"^(\s*)switch\s+(.+?)\s+cases\s*\(\s*([A-Za-z_]\w*)\s+in\s+(.+)\)\s*:\s*(#.*)?$")
_CONDITION = re.compile(r"^(\s*)(condition|constrain)\b\s*(.*)$")


def _strip_comments(text: str) -> str:
    lines = text.split("\n")
    try:
        toks = list(tokenize.generate_tokens(io.StringIO(text).readline))
    except (tokenize.TokenError, IndentationError):
        return text
    for tok in reversed(toks):
        if tok.type == tokenize.COMMENT:
            row, col = tok.start
            lines[row - 1] = lines[row - 1][:col].rstrip()
    return "\n".join(lines)


def _indent(line: str) -> int:
    return len(line) - len(line.lstrip())


def _rewrite_lines(text: str) -> str:
    lines = text.split("\n")
    out = []
    i = 0
    while i < len(lines):
        line = lines[i]
        m = _SWITCH.match(line)
        if m:
            ind, subject, var, values = m.group(1), m.group(2), m.group(3), m.group(4)
            out.append("%sfor %s in __switch__(%s, %s):" % (ind, var, subject, values))
            i += 1
            continue
        m = _CONDITION.match(line)
        if m:
            ind, word, rest = m.groups()
            parts = [rest] if rest.strip() else []
            j = i + 1
            # Continuation lines: deeper indentation, or an unfinished expression.
            while j < len(lines) and lines[j].strip() and (
                    _indent(lines[j]) > len(ind) or not parts or _unbalanced(" ".join(parts))):
                parts.append(lines[j].strip())
                j += 1
            body = " ".join(parts)
            out.append("%s%s(%s)" % (ind, word, body))
            out.extend([""] * (j - i - 1))
            i = j
            continue
        out.append(line)
        i += 1
    return "\n".join(out)


def _unbalanced(s: str) -> bool:
    depth = 0
    for ch in s:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
    return depth > 0


def _rewrite_tilde(text: str) -> str:
    """Turn a binary ``~`` into ``|=`` so sampling parses as an augmented assignment."""
    lines = text.split("\n")
    try:
        toks = list(tokenize.generate_tokens(io.StringIO(text).readline))
    except (tokenize.TokenError, IndentationError) as exc:
        raise ParseError(str(exc)) from None
    edits = []
    prev = None
    for tok in toks:
        if tok.type == tokenize.OP and tok.string == "~" and prev is not None and (
                prev.type in (tokenize.NAME, tokenize.NUMBER, tokenize.STRING)
                or prev.string in (")", "]")):
            edits.append(tok.start)
        if tok.type not in (tokenize.NL, tokenize.COMMENT):
            prev = tok
    for row, col in reversed(edits):
        s = lines[row - 1]
        lines[row - 1] = s[:col] + "|=" + s[col + 1:]
    return "\n".join(lines)


def preprocess(text: str) -> str:
    return _rewrite_tilde(_rewrite_lines(_strip_comments(text)))


# ==============================================================================
# Parsing.

def _is_call(node, *names) -> bool:
    return isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in names


def _convert_body(stmts) -> Sequence:
    return Sequence([_convert(s) for s in stmts], line=stmts[0].lineno if stmts else 0)


def _convert(s) -> Command:
    line = s.lineno
    if isinstance(s, ast.AugAssign) and isinstance(s.op, ast.BitOr):
        return Sample(s.target, s.value, line=line)
    if isinstance(s, ast.Assign):
        if len(s.targets) != 1:
            raise ParseError("chained assignment is not supported (line %d)" % line)
        return Assign(s.targets[0], s.value, line=line)
    if isinstance(s, ast.Expr):
        v = s.value
        if _is_call(v, "condition"):
            if len(v.args) != 1 or v.keywords:
                raise ParseError("condition takes one event (line %d)" % line)
            return Condition(v.args[0], line=line)
        if _is_call(v, "constrain"):
            if len(v.args) != 1 or v.keywords:
                raise ParseError("constrain takes one argument (line %d)" % line)
            return Constrain(v.args[0], line=line)
        raise ParseError("expression statement is not a command (line %d)" % line)
    if isinstance(s, ast.If):
        branches = [(s.test, _convert_body(s.body))]
        orelse = s.orelse
        while len(orelse) == 1 and isinstance(orelse[0], ast.If):
            branches.append((orelse[0].test, _convert_body(orelse[0].body)))
            orelse = orelse[0].orelse
        return IfElse(branches, _convert_body(orelse) if orelse else None, line=line)
    if isinstance(s, ast.For):
        if not isinstance(s.target, ast.Name) or s.orelse:
            raise ParseError("for loops need a single loop variable (line %d)" % line)
        if _is_call(s.iter, "__switch__"):
            subject, values = s.iter.args
            return Switch(subject, s.target.id, values, _convert_body(s.body), line=line)
        return For(s.target.id, s.iter, _convert_body(s.body), line=line)
    if isinstance(s, ast.Pass):
        return Skip(line=line)
    raise ParseError("unsupported statement %s (line %d)" % (type(s).__name__, line))


def parse(text: str) -> Sequence:
    """Parse program text into a command sequence."""
    if not text.strip():
        raise ParseError("empty program")
    src = preprocess(text)
    try:
        tree = ast.parse(src)
    except SyntaxError as exc:
        err = ParseError("%s (line %s, column %s)" % (exc.msg, exc.lineno, exc.offset))
        err.lineno, err.offset = exc.lineno, exc.offset
        raise err from None
    if not tree.body:
        raise ParseError("empty program")
    return _convert_body(tree.body)


def parse_expr(text: str) -> ast.expr:
    """Parse an event or expression in the program grammar."""
    try:
        return ast.parse(text.strip(), mode="eval").body
    except SyntaxError as exc:
        raise ParseError("%s (column %s)" % (exc.msg, exc.offset)) from None


# ==============================================================================
# Constant evaluation.

class NotConstant(Exception):
    """The expression depends on a random variable or an unknown name."""


@dataclass(frozen=True)
class ArrayRef:
    name: str
    size: int


_BINOPS = {
    ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b, ast.Div: lambda a, b: a / b,
    ast.FloorDiv: lambda a, b: a // b, ast.Mod: lambda a, b: a % b,
    ast.Pow: lambda a, b: a ** b,
}
_CMPOPS = {
    ast.Eq: lambda a, b: a == b, ast.NotEq: lambda a, b: a != b,
    ast.Lt: lambda a, b: a < b, ast.LtE: lambda a, b: a <= b,
    ast.Gt: lambda a, b: a > b, ast.GtE: lambda a, b: a >= b,
    ast.In: lambda a, b: a in b, ast.NotIn: lambda a, b: a not in b,
}
_NAMES = {"True": True, "False": False, "None": None, "inf": math.inf}
_FUNCS = {
    "range": range, "len": len, "abs": abs, "min": min, "max": max,
    "sqrt": math.sqrt, "exp": math.exp, "log": math.log, "int": int, "float": float,
}


def const_eval(node: ast.expr, consts: dict):
    """Evaluate an expression built from literals and bound constants."""
    if isinstance(node, ast.Constant):
        return node.value
    if isinstance(node, ast.Name):
        if node.id in consts:
            return consts[node.id]
        if node.id in _NAMES:
            return _NAMES[node.id]
        raise NotConstant(node.id)
    if isinstance(node, (ast.List, ast.Tuple)):
        return [const_eval(e, consts) for e in node.elts]
    if isinstance(node, ast.Dict):
        return {const_eval(k, consts): const_eval(v, consts) for k, v in zip(node.keys, node.values)}
    if isinstance(node, ast.Subscript):
        base = const_eval(node.value, consts)
        if isinstance(base, ArrayRef):
            raise NotConstant(base.name)
        return base[const_eval(node.slice, consts)]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](const_eval(node.left, consts), const_eval(node.right, consts))
    if isinstance(node, ast.UnaryOp):
        v = const_eval(node.operand, consts)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.UAdd):
            return +v
        if isinstance(node.op, ast.Not):
            return not v
    if isinstance(node, ast.Compare):
        left = const_eval(node.left, consts)
        for op, right in zip(node.ops, node.comparators):
            r = const_eval(right, consts)
            if not _CMPOPS[type(op)](left, r):
                return False
            left = r
        return True
    if isinstance(node, ast.BoolOp):
        vals = [const_eval(v, consts) for v in node.values]
        return all(vals) if isinstance(node.op, ast.And) else any(vals)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS \
            and node.func.id not in consts:
        if node.keywords:
            raise NotConstant(node.func.id)
        return _FUNCS[node.func.id](*[const_eval(a, consts) for a in node.args])
    raise NotConstant(ast.dump(node))


def is_constant(node: ast.expr, consts: dict) -> bool:
    try:
        const_eval(node, consts)
        return True
    except NotConstant:
        return False
    except Exception:
        return True


# ==============================================================================
# Switch desugaring.

class _Subst(ast.NodeTransformer):
    def __init__(self, name, value):
        self.name, self.value = name, value

    def visit_Name(self, node):
        if node.id == self.name and isinstance(node.ctx, ast.Load):
            return ast.copy_location(_literal(self.value), node)
        return node


def _literal(value) -> ast.expr:
    return ast.parse(repr(value), mode="eval").body


def substitute_command(c: Command, name: str, value) -> Command:
    """Syntactic replacement of a name by a constant throughout a command."""
    def expr(e):
        import copy
        return _Subst(name, value).visit(copy.deepcopy(e))

    if isinstance(c, Sequence):
        return Sequence([substitute_command(x, name, value) for x in c.commands], line=c.line)
    if isinstance(c, Sample):
        return Sample(expr(c.target), expr(c.expr), line=c.line)
    if isinstance(c, Assign):
        return Assign(expr(c.target), expr(c.expr), line=c.line)
    if isinstance(c, Condition):
        return Condition(expr(c.expr), line=c.line)
    if isinstance(c, Constrain):
        return Constrain(expr(c.expr), line=c.line)
    if isinstance(c, IfElse):
        return IfElse([(expr(t), substitute_command(b, name, value)) for t, b in c.branches],
                      substitute_command(c.orelse, name, value) if c.orelse else None, line=c.line)
    if isinstance(c, For):
        if c.var == name:
            return For(c.var, expr(c.iter), c.body, line=c.line)
        return For(c.var, expr(c.iter), substitute_command(c.body, name, value), line=c.line)
    if isinstance(c, Switch):
        body = c.body if c.var == name else substitute_command(c.body, name, value)
        return Switch(expr(c.subject), c.var, expr(c.values), body, line=c.line)
    return c


def desugar_switch(c: Command, consts: dict = None) -> Command:
    """Expand switch macros into if/elif chains, innermost first."""
    consts = consts or {}
    if isinstance(c, Sequence):
        return Sequence([desugar_switch(x, consts) for x in c.commands], line=c.line)
    if isinstance(c, IfElse):
        return IfElse([(t, desugar_switch(b, consts)) for t, b in c.branches],
                      desugar_switch(c.orelse, consts) if c.orelse else None, line=c.line)
    if isinstance(c, For):
        return For(c.var, c.iter, desugar_switch(c.body, consts), line=c.line)
    if isinstance(c, Switch):
        try:
            values = list(const_eval(c.values, consts))
        except (NotConstant, TypeError):
            raise ParseError("switch values must be a constant list (line %d)" % c.line) from None
        if not values:
            raise ParseError("switch needs at least one value (line %d)" % c.line)
        body = desugar_switch(c.body, consts)
        branches = []
        for v in values:
            op = ast.In() if isinstance(v, (list, tuple, range)) else ast.Eq()
            test = ast.Compare(left=c.subject, ops=[op], comparators=[_literal(v)])
            branches.append((test, substitute_command(body, c.var, v)))
        return IfElse(branches, None, line=c.line)
    return c


# ==============================================================================
# Restrictions.

@dataclass(frozen=True)
class Violation:
    rule: str
    line: int
    message: str

    def __str__(self):
        return "%s (line %d): %s" % (self.rule, self.line, self.message)


DISTRIBUTIONS = {"normal", "uniform", "gamma", "beta", "poisson", "binomial",
                 "bernoulli", "choice", "atom", "atomic", "discrete"}
FINITE_DISTRIBUTIONS = {"bernoulli", "binomial", "choice", "atom", "atomic", "discrete"}
TRANSFORM_FUNCS = {"sqrt", "cbrt", "exp", "log", "abs", "piecewise"}


def target_name(node: ast.expr, consts: dict) -> str:
    """Variable name of an assignment target, mangling array elements."""
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.Subscript):
        base = target_name(node.value, consts)
        try:
            idx = const_eval(node.slice, consts)
        except NotConstant:
            raise ParseError("array index must be constant (line %d)" % node.lineno) from None
        arr = consts.get(base)
        if isinstance(arr, ArrayRef) and not 0 <= idx < arr.size:
            raise ParseError("index %r out of bounds for %s (line %d)" % (idx, base, node.lineno))
        return "%s[%s]" % (base, idx)
    raise ParseError("invalid assignment target (line %d)" % getattr(node, "lineno", 0))


def random_refs(node: ast.expr, consts: dict, randoms) -> set:
    """Names of random variables referenced by an expression."""
    out = set()

    def walk(n):
        if isinstance(n, (ast.Name, ast.Subscript)):
            try:
                name = target_name(n, consts)
            except ParseError:
                name = None
            if name is not None and name in randoms:
                out.add(name)
                return
        if isinstance(n, ast.Call):
            for a in n.args:
                walk(a)
            for k in n.keywords:
                walk(k.value)
            return
        for child in ast.iter_child_nodes(n):
            walk(child)

    walk(node)
    return out


def _is_distribution(node) -> bool:
    return isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in DISTRIBUTIONS


class _Checker:
    def __init__(self):
        self.violations = []

    def flag(self, rule, line, msg):
        v = Violation(rule, line, msg)
        if v not in self.violations:
            self.violations.append(v)

    def run(self, c: Command, consts: dict, defined: dict) -> None:
        """defined maps variable name to whether it has finite support."""
        if isinstance(c, Sequence):
            for x in c.commands:
                self.run(x, consts, defined)
        elif isinstance(c, (Sample, Assign)):
            self.assign(c, consts, defined)
        elif isinstance(c, (Condition, Constrain, Skip)):
            pass
        elif isinstance(c, For):
            try:
                items = list(const_eval(c.iter, consts))
            except (NotConstant, TypeError):
                self.flag("R4", c.line, "loop bounds must be constant")
                return
            for v in items:
                self.run(c.body, dict(consts, **{c.var: v}), defined)
        elif isinstance(c, Switch):
            try:
                self.run(desugar_switch(c, consts), consts, defined)
            except ParseError as exc:
                self.flag("R4", c.line, str(exc))
        elif isinstance(c, IfElse):
            self.ifelse(c, consts, defined)

    def ifelse(self, c: IfElse, consts, defined):
        # An omitted else is only checked during translation, where it is
        # dropped when its probability is zero (as for desugared switches).
        arms = [b for _, b in c.branches] + ([c.orelse] if c.orelse else [])
        tests = [t for t, _ in c.branches]
        # Static tests select a single arm.
        for k, t in enumerate(tests):
            if is_constant(t, consts) and not random_refs(t, consts, defined):
                try:
                    taken = bool(const_eval(t, consts))
                except Exception:
                    break
                if taken:
                    self.run(arms[k], consts, defined)
                    return
                continue
            break
        else:
            if c.orelse:
                self.run(c.orelse, consts, defined)
            return
        results = []
        for arm in arms:
            d = dict(defined)
            self.run(arm, dict(consts), d)
            results.append(d)
        names = [set(d) for d in results]
        if any(n != names[0] for n in names):
            diff = sorted(set.union(*names) - set.intersection(*names))
            self.flag("R2", c.line, "branches define different variables: %s" % ", ".join(diff))
        for d in results:
            for k, fin in d.items():
                defined[k] = defined.get(k, True) and fin

    def assign(self, c, consts, defined):
        try:
            name = target_name(c.target, consts)
        except ParseError as exc:
            self.flag("R4", c.line, str(exc))
            return
        e = c.expr
        if isinstance(c, Assign) and not random_refs(e, consts, defined) and not _is_distribution(e):
            # Constant definition or array declaration.
            if name in defined:
                self.flag("R1", c.line, "variable %s is already defined" % name)
                return
            if _is_call(e, "array"):
                try:
                    consts[name] = ArrayRef(name, int(const_eval(e.args[0], consts)))
                except (NotConstant, IndexError):
                    self.flag("R4", c.line, "array size must be constant")
                return
            try:
                consts[name] = const_eval(e, consts)
            except Exception:
                pass
            return
        if name in defined:
            self.flag("R1", c.line, "variable %s is already defined" % name)
        if _is_distribution(e):
            for a in list(e.args) + [k.value for k in e.keywords]:
                for r in random_refs(a, consts, defined):
                    if not defined[r]:
                        self.flag("R4", c.line, "parameter depends on %s, which lacks finite support" % r)
            defined[name] = e.func.id in FINITE_DISTRIBUTIONS
            return
        refs = random_refs(e, consts, defined)
        if len(refs) > 1:
            self.flag("R3", c.line, "transform of several variables: %s" % ", ".join(sorted(refs)))
            defined[name] = False
            return
        if not refs:
            # A constant sampled as an atom.
            defined[name] = True
            return
        (r,) = refs
        defined[name] = defined[r]


def check_restrictions(c: Command, consts: dict = None) -> list:
    """Static check of R1-R4 after unrolling loops; returns violations."""
    checker = _Checker()
    checker.run(c, dict(consts or {}), {})
    return checker.violations
