import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import helpers
from sppl_exact import corpus
from sppl_exact import outcomes as oc
from sppl_exact.distributions import DistR, DistS, Normal, Uniform, atom
from sppl_exact.events import ScopeError, conj, disj, literal, negate, satisfies_array
from sppl_exact.spe import (Leaf, Product, Sum, UnsupportedEventError, configure, density,
                            make_leaf, make_product, make_sum, node_count, prob, sample,
                            simulate, validate)
from sppl_exact.translator import State, parse_expr, to_event, translate

INF = math.inf


def event_of(text, g):
    return to_event(parse_expr(text), State(g.root, {}))


@pytest.fixture(scope="module")
def gpa():
    return translate(corpus.INDIAN_GPA)


# ==============================================================================
# Examples.

def test_validate_examples(gpa):
    assert validate(gpa) == []
    x = Leaf("X", DistR(Normal(0, 1)))
    shared = Product([x, Leaf("X", DistR(Uniform(0, 1), 0, 1))])
    assert [v.condition for v in validate(shared)] == ["C3"]
    neg = Sum([x, Leaf("X", atom(1))], [0.5, -0.5])
    assert [v.condition for v in validate(neg)] == ["C5"]
    mismatch = Sum([x, Leaf("Y", atom(1))], [0.5, 0.5])
    assert [v.condition for v in validate(mismatch)] == ["C4"]


def test_prob_examples(gpa):
    assert prob(gpa, event_of("GPA <= 4", gpa)) == pytest.approx(0.68, abs=1e-12)
    assert prob(gpa, event_of(corpus.INDIAN_GPA_EVENT, gpa)) == pytest.approx(0.27125, abs=1e-12)
    full = literal("GPA", oc.interval(-INF, INF, True, True))
    assert prob(gpa, full) == pytest.approx(1.0, abs=1e-12)


def test_prob_scope_error(gpa):
    with pytest.raises(ScopeError):
        prob(gpa, literal("Height", oc.interval(0, 1)))


def test_density_examples():
    mix = make_sum([make_leaf("X", DistR(Normal(0, 1))), make_leaf("X", atom(3))], [0.5, 0.5])
    assert density(mix, {"X": 3.0}) == (0, pytest.approx(0.5))
    prod = make_product([make_leaf("X", DistR(Normal(0, 1))), make_leaf("S", DistS((("a", 1.0),)))])
    deg, v = density(prod, {"X": 0.0, "S": "a"})
    assert deg == 1 and v == pytest.approx(0.39894, abs=1e-5)


def test_monte_carlo_examples(gpa):
    cols = sample(gpa, 10 ** 5, np.random.default_rng(1))
    assert abs(np.mean(cols["Nationality"] == "India") - 0.5) < 0.005
    assert abs(np.mean(cols["GPA"] <= 4) - 0.68) < 0.006


def test_simulate_is_deterministic(gpa):
    assert simulate(gpa, rng=5) == simulate(gpa, rng=5)
    assert set(simulate(gpa, ["GPA"], rng=5)) == {"GPA"}


def test_interning_shares_nodes():
    a = make_leaf("X", DistR(Normal(0, 1)))
    b = make_leaf("X", DistR(Normal(0, 1)))
    assert a is b
    s = make_sum([a, b], [0.3, 0.7])
    assert s is a


def test_factorization_lifts_common_child():
    y = make_leaf("Y", DistR(Normal(0, 1)))
    s = make_sum([make_product([make_leaf("X", atom(0)), y]),
                  make_product([make_leaf("X", atom(1)), y])], [0.5, 0.5])
    assert isinstance(s, Product) and y in s.children
    with configure(factorize=False):
        t = make_sum([make_product([make_leaf("X", atom(0)), y]),
                      make_product([make_leaf("X", atom(1)), y])], [0.5, 0.5])
    assert isinstance(t, Sum) and node_count(t) > node_count(s)


def test_clause_limit():
    root = make_product([make_leaf("X", DistR(Normal(0, 1))), make_leaf("Y", DistR(Normal(0, 1)))])
    e = disj(*[conj(literal("X", oc.interval(k, k + 0.5)), literal("Y", oc.interval(k, k + 0.5)))
               for k in range(21)])
    with configure(ie_limit=100):
        with pytest.raises(UnsupportedEventError):
            prob(root, e)
    assert prob(root, e) > 0


# ==============================================================================
# Properties.

@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_monte_carlo_agreement(seed):
    rng = np.random.default_rng(seed)
    root = helpers.random_spe(rng)
    names = sorted(root.scope)
    cols = sample(root, 20000, rng)
    for _ in range(5):
        e = helpers.random_event(rng, names, kinds={**helpers.KINDS, "W": "real"})
        p = prob(root, e)
        est = float(np.mean(satisfies_array(e, cols)))
        se = math.sqrt(p * (1 - p) / 20000)
        assert abs(est - p) <= 5 * se + 1e-3


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_inclusion_exclusion_identity(seed):
    rng = np.random.default_rng(seed)
    root = helpers.random_spe(rng, with_env=False)
    names = sorted(root.scope)
    a, b = helpers.random_event(rng, names), helpers.random_event(rng, names)
    lhs = prob(root, disj(a, b)) + prob(root, conj(a, b))
    assert lhs == pytest.approx(prob(root, a) + prob(root, b), abs=1e-9)
    assert prob(root, a) + prob(root, negate(a)) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 100))
def test_weight_scaling(seed, c):
    rng = np.random.default_rng(seed)
    names = ["X", "N"]
    kids = [helpers.random_spe(rng, names, 1, with_env=False) for _ in range(3)]
    ws = [float(w) for w in rng.uniform(0.1, 1, size=3)]
    e = helpers.random_event(rng, names)
    with configure(dedup=False, factorize=False):
        s1 = make_sum(kids, ws)
        s2 = make_sum(kids, [c * w for w in ws])
    assert prob(s1, e) == pytest.approx(prob(s2, e), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_degree_additivity(seed):
    rng = np.random.default_rng(seed)
    a = helpers.random_spe(rng, ["X"], 1, with_env=False)
    b = helpers.random_spe(rng, ["N"], 1, with_env=False)
    pa, pb = simulate(a, rng=rng), simulate(b, rng=rng)
    da, db = density(a, pa), density(b, pb)
    d = density(make_product([a, b]), {**pa, **pb})
    assert d[0] == da[0] + db[0]
    assert d[1] == pytest.approx(da[1] * db[1], rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_disjoint_sum_matches_inclusion_exclusion(seed):
    rng = np.random.default_rng(seed)
    root = helpers.random_spe(rng, with_env=False)
    e = helpers.random_event(rng, sorted(root.scope), depth=2, max_clauses=6)
    with configure(ie_limit=1):
        p1 = prob(root, e)
    with configure(ie_limit=20):
        p2 = prob(root, e)
    assert p1 == pytest.approx(p2, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_memoization_does_not_change_results(seed):
    rng = np.random.default_rng(seed)
    root = helpers.random_spe(rng)
    e = helpers.random_event(rng, sorted(root.scope), kinds={**helpers.KINDS, "W": "real"})
    with configure(memoize=False):
        p1 = prob(root, e)
    assert prob(root, e) == p1
