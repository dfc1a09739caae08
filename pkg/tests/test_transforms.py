import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sppl_exact import outcomes as oc
from sppl_exact.events import Containment
from sppl_exact.outcomes import EMPTY, FiniteReal, Interval
from sppl_exact.transforms import (Abs, Exp, Identity, Log, Piecewise, Poly, Reciprocal, Root,
                                   TransformError, UndefinedError, domainof, evaluate, finv,
                                   poly_lim, poly_lte, poly_solve, preimg, roots,
                                   vars_of_transform)

INF = math.inf
X = Identity("X")
P = Poly(X, (0, 6, 1, -1))


def close_set(v, expected, tol=1e-9):
    assert isinstance(v, FiniteReal)
    assert len(v.reals) == len(expected)
    assert all(abs(a - b) <= tol for a, b in zip(v.reals, expected))


# ==============================================================================
# Examples.

def test_evaluate_examples():
    assert evaluate(P, 2) == 8
    with pytest.raises(UndefinedError):
        evaluate(Reciprocal(X), 0)
    assert evaluate(Root(X, 2), 4) == 2
    assert evaluate(Abs(X), -3) == 3
    assert evaluate(Exp(X, 2), 3) == pytest.approx(8)
    assert evaluate(Log(X), math.e) == pytest.approx(1)
    with pytest.raises(UndefinedError):
        evaluate(Log(X), -1)


def test_domainof_examples():
    assert domainof(Log(X)) == Interval(0.0, True, INF, True)
    assert domainof(P) == Interval(-INF, True, INF, True)
    pw = Piecewise(((Poly(X, (0, 1)), X < 1), (Exp(X), X >= 1)))
    assert domainof(pw) == Interval(-INF, True, INF, True)
    assert domainof(Root(X, 3)) == Interval(0.0, False, INF, True)


def test_domainof_composite():
    # sqrt(x - 1) is defined exactly on [1, inf).
    assert domainof(Root(Poly(X, (-1, 1)), 2)) == Interval(1.0, False, INF, True)


def test_finv_examples():
    assert finv(Abs(X), 3) == FiniteReal((-3.0, 3.0))
    assert finv(Root(X, 2), -1) == EMPTY
    close_set(finv(P, 0), [-2, 0, 3])
    for r in finv(P, 0).reals:
        assert abs(evaluate(P, r)) < 1e-9


def test_poly_lim_examples():
    assert poly_lim([0, 0, 1]) == (INF, INF)
    assert poly_lim([0, 1]) == (-INF, INF)
    assert poly_lim([0, 6, 1, -1]) == (INF, -INF)
    assert evaluate(P, -1e6) > 0 and evaluate(P, 1e6) < 0


def test_poly_solve_examples():
    close_set(poly_solve(4, [0, 0, 1]), [-2, 2])
    assert poly_solve(INF, [0, 1]) == FiniteReal((INF,))
    assert poly_solve(0, [1, 0, 1]) == EMPTY


def test_poly_lte_examples():
    v = poly_lte(False, 4, [0, 0, 1])
    assert v == Interval(-2.0, False, 2.0, False)
    for r in np.linspace(-3, 3, 1001):
        if abs(abs(r) - 2) > 1e-9:
            assert oc.contains(v, float(r)) == (r * r <= 4)
    assert poly_lte(True, -INF, [0, 1]) == EMPTY
    assert poly_lte(False, INF, [0, 1]) == Interval(-INF, True, INF, True)
    assert poly_lte(True, 4, [0, 0, 1]) == Interval(-2.0, True, 2.0, True)


def test_preimg_examples():
    v = preimg(P, Interval(0.0, False, 2.0, False))
    pieces = oc.real_pieces(v)
    left = [p for p in pieces if p[2] < 1]
    assert len(left) == 2
    # The real root of p(x) = 2 below -2 is -2.17741; p(-2.174) is 1.957.
    assert left[0][0] == pytest.approx(-2.17741, abs=1e-5)
    assert left[0][2] == pytest.approx(-2.0)
    assert left[1][0] == pytest.approx(0.0, abs=1e-12)
    assert left[1][2] == pytest.approx(0.32164, abs=1e-5)
    # A third piece lies right of x = 1, ending at the root 3.
    (right,) = [p for p in pieces if p[2] >= 1]
    assert right[2] == pytest.approx(3.0)
    v = oc.union([FiniteReal((1.0,)), Interval(5.0, True, 6.0, False)])
    assert preimg(X, v) == v
    w = preimg(Exp(X, 2), Interval(1.0, False, 4.0, False))
    (p,) = oc.real_pieces(w)
    assert p[0] == pytest.approx(0) and p[2] == pytest.approx(2) and not p[1] and not p[3]


def test_preimg_reciprocal():
    v = preimg(Reciprocal(X), Interval(6.0, True, INF, True))
    (p,) = oc.real_pieces(v)
    assert p[0] == 0 and p[1] and p[2] == pytest.approx(1 / 6) and p[3]


def test_preimg_strings_are_empty_for_numeric_transforms():
    assert preimg(P, oc.strings("a")) == EMPTY
    assert preimg(X, oc.strings("a")) == oc.strings("a")


def test_roots_examples():
    assert roots([-4, 0, 1]) == pytest.approx([-2, 2])
    assert roots([0, 6, 1, -1]) == pytest.approx([-2, 0, 3], abs=1e-12)
    assert roots([1]) == []
    assert roots([1, -2, 1]) == pytest.approx([1])


def test_vars_of_piecewise_includes_guards():
    pw = Piecewise(((Poly(X, (0, 1)), X < 1), (Exp(X), X >= 1)))
    assert vars_of_transform(pw) == {"X"}


def test_piecewise_rejects_overlap():
    with pytest.raises(ValueError):
        Piecewise(((X, X < 1), (Exp(X), X > 0)))


def test_piecewise_rejects_mixed_variables():
    with pytest.raises(TransformError):
        Piecewise(((X, Identity("Y") < 1),))


# ==============================================================================
# Properties.

def random_transform(rng, depth):
    t = X
    for _ in range(depth):
        r = rng.random()
        if r < 0.35:
            deg = int(rng.integers(1, 4))
            cs = [float(c) for c in rng.integers(-3, 4, size=deg + 1)]
            if cs[-1] == 0:
                cs[-1] = 1.0
            t = Poly(t, tuple(cs))
        elif r < 0.5:
            t = Reciprocal(t)
        elif r < 0.65:
            t = Abs(t)
        elif r < 0.75:
            t = Root(t, int(rng.integers(2, 4)))
        elif r < 0.88:
            t = Exp(t, float(rng.choice([math.e, 2.0, 0.5])))
        else:
            t = Log(t, float(rng.choice([math.e, 10.0])))
    return t


def random_target(rng):
    a, b = sorted(float(x) for x in rng.uniform(-5, 5, size=2))
    return oc.interval(a, b, bool(rng.random() < 0.5), bool(rng.random() < 0.5))


def near_boundary(v, r, tol=1e-7):
    for lo, _, hi, _ in oc.real_pieces(v):
        if abs(r - lo) < tol or abs(r - hi) < tol:
            return True
    return False


def safe_eval(t, r):
    try:
        with np.errstate(all="ignore"):
            y = evaluate(t, r)
    except (UndefinedError, OverflowError):
        return None
    return None if isinstance(y, float) and math.isnan(y) else y


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_preimage_sound_and_complete(seed, depth):
    rng = np.random.default_rng(seed)
    t = random_transform(rng, depth)
    v = random_target(rng)
    pre = preimg(t, v)
    dom = domainof(t)
    for r in rng.uniform(-6, 6, size=1000):
        r = float(r)
        if not oc.contains(dom, r) or near_boundary(pre, r):
            continue
        y = safe_eval(t, r)
        if y is None or near_boundary(v, y, 1e-7 * max(1.0, abs(y))):
            continue
        assert oc.contains(pre, r) == oc.contains(v, y), (t, v, r, y)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_preimage_distributes_over_union(seed, depth):
    rng = np.random.default_rng(seed)
    t = random_transform(rng, depth)
    v1, v2 = random_target(rng), random_target(rng)
    lhs = preimg(t, oc.union([v1, v2]))
    rhs = oc.union([preimg(t, v1), preimg(t, v2)])
    for r in rng.uniform(-6, 6, size=500):
        r = float(r)
        if near_boundary(lhs, r) or near_boundary(rhs, r):
            continue
        assert oc.contains(lhs, r) == oc.contains(rhs, r)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=2, max_size=5), st.integers(-10, 10))
def test_poly_solve_residual(cs, r):
    cs = [float(c) for c in cs]
    if all(c == 0 for c in cs[1:]):
        return
    v = poly_solve(float(r), cs)
    for x in getattr(v, "reals", ()):
        y = sum(c * x ** k for k, c in enumerate(cs))
        assert abs(y - r) <= 1e-9 * max(1.0, abs(r), abs(x) ** (len(cs) - 1))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=2, max_size=5), st.integers(-10, 10), st.booleans())
def test_poly_lte_matches_sign_grid(cs, r, strict):
    cs = [float(c) for c in cs]
    v = poly_lte(strict, float(r), cs)
    roots_ = getattr(poly_solve(float(r), cs), "reals", ())
    for x in np.linspace(-6, 6, 1001):
        x = float(x)
        if any(abs(x - z) < 1e-6 for z in roots_):
            continue
        y = sum(c * x ** k for k, c in enumerate(cs))
        assert oc.contains(v, x) == (y < r if strict else y <= r)


def test_containment_uses_transform():
    e = Containment(P, Interval(0.0, False, 2.0, False))
    assert e.transform == P
