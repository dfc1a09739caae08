"""Staged command-line workflow: translate, condition, query.

    sppl-exact translate --program model.sppl --spe-out prior.json --stats
    sppl-exact condition --spe-in prior.json --event "X > 0" --spe-out post.json
    sppl-exact query --spe-in post.json --query "prob(Y < 1)"

Exit codes: 0 ok, 1 usage, 2 translation error, 3 zero-probability condition.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import sys
import time
import warnings

import numpy as np

from . import serialize
from .events import ScopeError
from .inference import ZeroProbabilityError, condition, condition0
from .spe import (SpeGraph, UnsupportedEventError, density, equality_assignment, prob,
                  sample, tree_size)
from .translator import (ParseError, RestrictionError, State, TranslationError, parse_expr,
                         to_event, translate)
from .translator.parser import NotConstant, const_eval, target_name
from .transforms import UndefinedError

EXIT_OK, EXIT_USAGE, EXIT_TRANSLATE, EXIT_ZERO = 0, 1, 2, 3


class UsageError(Exception):
    """Bad command-line input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    return x if isinstance(x, str) else format(float(x), ".17g")


# ==============================================================================
# Events and queries.

def parse_event(text: str, g: SpeGraph):
    try:
        node = parse_expr(text)
    except ParseError as exc:
        raise UsageError("malformed event %r: %s" % (text, exc)) from None
    return event_from_ast(node, g)


def event_from_ast(node, g: SpeGraph):
    try:
        e = to_event(node, State(g.root, {}))
    except (TranslationError, ParseError) as exc:
        raise UsageError(str(exc)) from None
    if isinstance(e, bool):
        raise UsageError("event does not mention any variable")
    return e


def condition_any(g: SpeGraph, e) -> SpeGraph:
    """condition, or condition0 for conjunctions of equalities."""
    try:
        asg = equality_assignment(e)
    except UnsupportedEventError:
        asg = None
    if asg is not None:
        try:
            return SpeGraph(condition0(g.root, asg))
        except UnsupportedEventError:
            pass
    return SpeGraph(condition(g.root, e))


def _assignment(node, g: SpeGraph) -> dict:
    if isinstance(node, ast.Dict):
        out = {}
        for k, v in zip(node.keys, node.values):
            try:
                name = k.value if isinstance(k, ast.Constant) and isinstance(k.value, str) else target_name(k, {})
            except ParseError as exc:
                raise UsageError(str(exc)) from None
            out[name] = const_eval(v, {})
        return out
    try:
        return equality_assignment(event_from_ast(node, g))
    except UnsupportedEventError as exc:
        raise UsageError(str(exc)) from None


def simulate_table(g: SpeGraph, names, n: int, seed) -> str:
    cols = sample(g.root, n, np.random.default_rng(seed))
    names = list(names) if names else sorted(g.scope)
    missing = [x for x in names if x not in cols]
    if missing:
        raise UsageError("unknown variables %s" % ", ".join(missing))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for i in range(n):
        w.writerow([_fmt(cols[x][i]) for x in names])
    return buf.getvalue()


def run_query(g: SpeGraph, text: str, args, out) -> SpeGraph:
    """Run one query; returns the graph for subsequent queries."""
    try:
        node = parse_expr(text)
    except ParseError as exc:
        raise UsageError("malformed query %r: %s" % (text, exc)) from None
    if not (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)):
        raise UsageError("query must look like verb(arguments): %r" % text)
    verb = node.func.id
    if verb == "prob":
        if len(node.args) != 1:
            raise UsageError("prob takes one event")
        out.write(_fmt(prob(g.root, event_from_ast(node.args[0], g))) + "\n")
    elif verb == "density":
        if len(node.args) != 1:
            raise UsageError("density takes one assignment")
        deg, val = density(g.root, _assignment(node.args[0], g))
        out.write("%d %s\n" % (deg, _fmt(val)))
    elif verb in ("condition", "constrain"):
        if len(node.args) != 1:
            raise UsageError("%s takes one argument" % verb)
        if verb == "condition":
            g = condition_any(g, event_from_ast(node.args[0], g))
        else:
            g = SpeGraph(condition0(g.root, _assignment(node.args[0], g)))
        if args.spe_out:
            serialize.save(g, args.spe_out)
    elif verb == "simulate":
        try:
            names = [target_name(a, {}) for a in node.args]
        except ParseError as exc:
            raise UsageError(str(exc)) from None
        table = simulate_table(g, names, args.samples, args.seed)
        if args.out:
            serialize.write_atomic(args.out, table)
        else:
            out.write(table)
    else:
        raise UsageError("unknown query verb %r" % verb)
    return g


# ==============================================================================
# Commands.

def cmd_translate(args, out) -> None:
    with open(args.program) as fh:
        text = fh.read()
    t0 = time.perf_counter()
    g = translate(text, optimize=not args.no_optimize)
    seconds = time.perf_counter() - t0
    if args.spe_out:
        serialize.save(g, args.spe_out)
    if args.stats:
        out.write("nodes_pre_dedup %d\n" % tree_size(g.root))
        out.write("nodes %d\n" % g.node_count)
        out.write("seconds %s\n" % _fmt(seconds))


def cmd_condition(args, out) -> None:
    g = serialize.load(args.spe_in)
    t0 = time.perf_counter()
    post = condition_any(g, parse_event(args.event, g))
    seconds = time.perf_counter() - t0
    serialize.save(post, args.spe_out)
    if args.stats:
        out.write("nodes_in %d\n" % g.node_count)
        out.write("nodes_out %d\n" % post.node_count)
        out.write("seconds %s\n" % _fmt(seconds))


def cmd_query(args, out) -> None:
    g = serialize.load(args.spe_in)
    for q in args.query:
        g = run_query(g, q, args, out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sppl-exact", description="Exact inference over sum-product expressions.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    t = sub.add_parser("translate", help="translate a program into an SPE file")
    t.add_argument("--program", required=True)
    t.add_argument("--spe-out")
    t.add_argument("--no-optimize", action="store_true", help="disable factorization, deduplication and memoization")
    t.add_argument("--stats", action="store_true", help="print node counts and wall time")
    c = sub.add_parser("condition", help="condition an SPE file on an event")
    c.add_argument("--spe-in", required=True)
    c.add_argument("--event", required=True)
    c.add_argument("--spe-out", required=True)
    c.add_argument("--stats", action="store_true")
    q = sub.add_parser("query", help="query an SPE file")
    q.add_argument("--spe-in", required=True)
    q.add_argument("--query", required=True, action="append",
                   help="prob(E), density(E), condition(E), constrain(E), simulate(X, ...)")
    q.add_argument("--samples", type=int, default=10)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", help="output file for simulate")
    q.add_argument("--spe-out", help="output file for condition and constrain")
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: translate, condition or query")
        if getattr(args, "samples", 1) < 0:
            raise UsageError("--samples must be nonnegative")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            {"translate": cmd_translate, "condition": cmd_condition, "query": cmd_query}[args.command](args, out)
    except UsageError as exc:
        err.write("usage error: %s\n" % exc)
        return EXIT_USAGE
    except (ParseError, RestrictionError, TranslationError) as exc:
        err.write("translation error: %s\n" % exc)
        return EXIT_TRANSLATE
    except ZeroProbabilityError as exc:
        err.write("zero probability: %s\n" % exc)
        return EXIT_ZERO
    except (ScopeError, UnsupportedEventError, UndefinedError, NotConstant) as exc:
        err.write("usage error: %s\n" % exc)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        err.write("error: %s\n" % exc)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
