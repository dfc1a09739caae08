"""JSON persistence of SPE graphs with explicit shared references.

The file holds a node table in children-before-parents order; Sum and
Product entries refer to children by table index, so nodes shared in memory
stay shared after loading.  Infinite floats are written as "inf"/"-inf".
"""

from __future__ import annotations

import json
import math
import os
import tempfile

from . import outcomes as oc
from .distributions import DistI, DistR, DistS, make_cdf
from .events import Conjunction, Containment, Disjunction
from .spe import Leaf, Product, SpeGraph, Sum, reachable
from .transforms import Abs, Exp, Identity, Log, Piecewise, Poly, Reciprocal, Root

FORMAT = "sppl-exact-spe"
VERSION = 1


def _f(x: float):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _unf(x) -> float:
    return float(x)


# ==============================================================================
# Encoding.

def outcomes_to_json(v) -> dict:
    if isinstance(v, oc.Empty):
        return {"type": "empty"}
    if isinstance(v, oc.FiniteStr):
        return {"type": "strings", "strings": list(v.strings), "complemented": v.complemented}
    if isinstance(v, oc.FiniteReal):
        return {"type": "reals", "values": [_f(r) for r in v.reals]}
    if isinstance(v, oc.Interval):
        return {"type": "interval", "lo": _f(v.lo), "lo_open": v.lo_open,
                "hi": _f(v.hi), "hi_open": v.hi_open}
    return {"type": "union", "members": [outcomes_to_json(m) for m in v.members]}


def transform_to_json(t) -> dict:
    if isinstance(t, Identity):
        return {"op": "id", "var": t.var}
    if isinstance(t, Poly):
        return {"op": "poly", "inner": transform_to_json(t.inner), "coeffs": list(t.coeffs)}
    if isinstance(t, Reciprocal):
        return {"op": "reciprocal", "inner": transform_to_json(t.inner)}
    if isinstance(t, Abs):
        return {"op": "abs", "inner": transform_to_json(t.inner)}
    if isinstance(t, Root):
        return {"op": "root", "inner": transform_to_json(t.inner), "n": t.n}
    if isinstance(t, Exp):
        return {"op": "exp", "inner": transform_to_json(t.inner), "base": t.base}
    if isinstance(t, Log):
        return {"op": "log", "inner": transform_to_json(t.inner), "base": t.base}
    if isinstance(t, Piecewise):
        return {"op": "piecewise",
                "pieces": [[transform_to_json(f), event_to_json(e)] for f, e in t.pieces]}
    raise TypeError("cannot encode transform %r" % (t,))


def event_to_json(e) -> dict:
    if isinstance(e, Containment):
        return {"op": "in", "transform": transform_to_json(e.transform),
                "outcomes": outcomes_to_json(e.outcomes)}
    op = "and" if isinstance(e, Conjunction) else "or"
    return {"op": op, "events": [event_to_json(x) for x in e.events]}


def dist_to_json(d) -> dict:
    if isinstance(d, DistS):
        return {"kind": "strings", "weights": [[s, w] for s, w in d.weights]}
    out = {"family": d.cdf.name, "params": [_f(p) for p in d.cdf.params()],
           "lo": _f(d.lo), "hi": _f(d.hi)}
    if isinstance(d, DistR):
        out["kind"] = "real"
    else:
        out.update(kind="integer", lo_open=d.lo_open, hi_open=d.hi_open)
    return out


def to_json(g) -> dict:
    root = g.root if isinstance(g, SpeGraph) else g
    nodes = reachable(root)
    index = {id(n): i for i, n in enumerate(nodes)}
    table = []
    for n in nodes:
        if isinstance(n, Leaf):
            table.append({"type": "leaf", "var": n.var, "dist": dist_to_json(n.dist),
                          "env": [[name, transform_to_json(t)] for name, t in n.env]})
        elif isinstance(n, Sum):
            table.append({"type": "sum", "children": [index[id(c)] for c in n.children],
                          "weights": list(n.weights)})
        else:
            table.append({"type": "product", "children": [index[id(c)] for c in n.children]})
    return {"format": FORMAT, "version": VERSION, "root": index[id(root)], "nodes": table}


# ==============================================================================
# Decoding.

def outcomes_from_json(d):
    t = d["type"]
    if t == "empty":
        return oc.EMPTY
    if t == "strings":
        return oc.FiniteStr(tuple(d["strings"]), d["complemented"])
    if t == "reals":
        return oc.FiniteReal(tuple(_unf(r) for r in d["values"]))
    if t == "interval":
        return oc.Interval(_unf(d["lo"]), d["lo_open"], _unf(d["hi"]), d["hi_open"])
    if t == "union":
        return oc.Union(tuple(outcomes_from_json(m) for m in d["members"]))
    raise ValueError("unknown outcomes type %r" % t)


def transform_from_json(d):
    op = d["op"]
    if op == "id":
        return Identity(d["var"])
    if op == "piecewise":
        return Piecewise(tuple((transform_from_json(f), event_from_json(e)) for f, e in d["pieces"]))
    inner = transform_from_json(d["inner"])
    if op == "poly":
        return Poly(inner, tuple(d["coeffs"]))
    if op == "reciprocal":
        return Reciprocal(inner)
    if op == "abs":
        return Abs(inner)
    if op == "root":
        return Root(inner, d["n"])
    if op == "exp":
        return Exp(inner, d["base"])
    if op == "log":
        return Log(inner, d["base"])
    raise ValueError("unknown transform op %r" % op)


def event_from_json(d):
    if d["op"] == "in":
        return Containment(transform_from_json(d["transform"]), outcomes_from_json(d["outcomes"]))
    parts = tuple(event_from_json(x) for x in d["events"])
    return Conjunction(parts) if d["op"] == "and" else Disjunction(parts)


def dist_from_json(d):
    if d["kind"] == "strings":
        return DistS.from_normalized(d["weights"])
    cdf = make_cdf(d["family"], [_unf(p) for p in d["params"]])
    if d["kind"] == "real":
        return DistR(cdf, _unf(d["lo"]), _unf(d["hi"]))
    return DistI(cdf, _unf(d["lo"]), _unf(d["hi"]), d["lo_open"], d["hi_open"])


def from_json(doc: dict) -> SpeGraph:
    if doc.get("format") != FORMAT:
        raise ValueError("not an SPE file")
    built = []
    for entry in doc["nodes"]:
        t = entry["type"]
        if t == "leaf":
            env = tuple((name, transform_from_json(x)) for name, x in entry["env"])
            built.append(Leaf(entry["var"], dist_from_json(entry["dist"]), env))
        elif t == "sum":
            built.append(Sum([built[i] for i in entry["children"]], entry["weights"]))
        elif t == "product":
            built.append(Product([built[i] for i in entry["children"]]))
        else:
            raise ValueError("unknown node type %r" % t)
    return SpeGraph(built[doc["root"]])


# ==============================================================================
# Files.

def write_atomic(path: str, text: str) -> None:
    """Write text to path through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(g) -> str:
    return json.dumps(to_json(g), indent=1, allow_nan=False)


def loads(text: str) -> SpeGraph:
    return from_json(json.loads(text))


def save(g, path: str) -> None:
    write_atomic(path, dumps(g))


def load(path: str) -> SpeGraph:
    with open(path) as fh:
        return loads(fh.read())
