import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import helpers
from sppl_exact import corpus
from sppl_exact import outcomes as oc
from sppl_exact.distributions import DistR, Normal, atom, is_atom
from sppl_exact.events import conj, disj, literal
from sppl_exact.inference import (ZeroDensityError, ZeroProbabilityError, condition, condition0,
                                  visit_count_probe)
from sppl_exact.spe import (Leaf, Sum, configure, make_leaf, make_product, make_sum, node_count,
                            prob, validate)
from sppl_exact.translator import State, parse_expr, to_event, translate

INF = math.inf
KINDS = {**helpers.KINDS, "W": "real"}


def positive_pair(rng, root):
    names = sorted(root.scope)
    a = helpers.positive_event(rng, root, names, kinds=KINDS)
    b = helpers.random_event(rng, names, kinds=KINDS)
    return a, b


def box(**bounds):
    return conj(*[literal(x, oc.interval(a, b)) for x, (a, b) in sorted(bounds.items())])


# ==============================================================================
# Examples.

def test_gpa_posterior_probabilities():
    g = translate(corpus.INDIAN_GPA)
    e = to_event(parse_expr(corpus.INDIAN_GPA_EVENT), State(g.root, {}))
    post = condition(g, e)
    assert validate(post) == []
    assert prob(post, e) == pytest.approx(1.0, abs=1e-12)
    usa = literal("Nationality", oc.strings("USA"))
    assert prob(post, usa) == pytest.approx(0.18125 / 0.27125, abs=1e-12)


def test_two_boxes_give_five_branches():
    n = lambda: DistR(Normal(1, 1))
    root = make_product([make_leaf(x, n()) for x in "XYZ"])
    e = disj(box(X=(0, 2), Y=(0, 2), Z=(0, 2)), box(X=(-1, 3), Y=(1, 3), Z=(1, 3)))
    post = condition(root, e)
    assert isinstance(post, Sum) and len(post.children) == 5
    assert prob(post, e) == pytest.approx(1.0, abs=1e-12)


def test_full_space_event_is_identity():
    root = make_product([make_leaf("X", DistR(Normal(0, 1))), make_leaf("S", atom("a"))])
    post = condition(root, literal("X", oc.interval(-INF, INF, True, True)))
    assert post is root


def test_zero_probability_errors():
    root = make_leaf("X", DistR(Normal(0, 1)))
    with pytest.raises(ZeroProbabilityError):
        condition(root, literal("X", oc.points(0.5)))
    with pytest.raises(ZeroProbabilityError):
        condition(make_leaf("X", atom(1)), literal("X", oc.interval(2, 3)))
    with pytest.raises(ZeroDensityError):
        condition0(make_leaf("X", atom(1)), {"X": 2.0})


def test_condition0_continuous_gives_atom():
    post = condition0(make_leaf("X", DistR(Normal(0, 1))), {"X": 1.5})
    assert isinstance(post, Leaf) and is_atom(post.dist) == 1.5


def test_condition0_keeps_lowest_degree_branch():
    mix = make_sum([make_leaf("X", DistR(Normal(3, 1))), make_leaf("X", atom(3))], [0.9, 0.1])
    post = condition0(mix, {"X": 3.0})
    assert isinstance(post, Leaf) and is_atom(post.dist) == 3.0


def test_condition0_preserves_other_variables():
    y = make_leaf("Y", DistR(Normal(0, 1)))
    root = make_sum([make_product([make_leaf("X", atom(0)), y]),
                     make_product([make_leaf("X", atom(1)), make_leaf("Y", atom(5))])], [0.5, 0.5])
    post = condition0(root, {"X": 0.0})
    assert prob(post, literal("Y", oc.interval(-INF, 0, True, False))) == pytest.approx(0.5)


def test_visit_count_probe():
    g = translate(corpus.hmm(4))
    e = literal("X[0]", oc.interval(-INF, 5, True, False))
    k = visit_count_probe(g, e)
    assert 0 < k <= node_count(g)


# ==============================================================================
# Properties.

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_posterior_is_valid_and_closed(seed):
    rng = np.random.default_rng(seed)
    root = helpers.random_spe(rng)
    a, b = positive_pair(rng, root)
    post = condition(root, a)
    assert validate(post) == []
    assert prob(post, a) == pytest.approx(1.0, abs=1e-9)
    assert prob(post, b) == pytest.approx(prob(root, conj(a, b)) / prob(root, a), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_idempotence(seed):
    rng = np.random.default_rng(seed)
    root = helpers.random_spe(rng)
    a, b = positive_pair(rng, root)
    once = condition(root, a)
    twice = condition(once, a)
    assert prob(twice, b) == pytest.approx(prob(once, b), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_memoization_is_bit_identical(seed):
    rng = np.random.default_rng(seed)
    root = helpers.random_spe(rng)
    a, b = positive_pair(rng, root)
    with_memo = prob(condition(root, a), b)
    with configure(memoize=False):
        without = prob(condition(root, a), b)
    assert with_memo == without


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_condition0_matches_enumeration_on_discrete_spes(seed):
    rng = np.random.default_rng(seed)
    root = helpers.random_spe(rng, ["N", "S"], with_env=False)
    pt = {"N": float(rng.integers(0, 6)), "S": str(rng.choice(helpers.STRINGS))}
    given_ = conj(literal("N", oc.points(pt["N"])), literal("S", oc.strings(pt["S"])))
    pz = prob(root, given_)
    if pz == 0:
        with pytest.raises(ZeroDensityError):
            condition0(root, pt)
        return
    post = condition0(root, pt)
    b = helpers.random_event(rng, ["N", "S"])
    assert prob(post, b) == pytest.approx(prob(root, conj(given_, b)) / pz, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_condition0_on_real_variable_concentrates_on_value(seed):
    rng = np.random.default_rng(seed)
    root = helpers.random_spe(rng, ["X", "N"], with_env=False)
    x = float(np.round(rng.uniform(-1, 1), 3))
    try:
        post = condition0(root, {"X": x})
    except ZeroDensityError:
        return
    assert prob(post, literal("X", oc.points(x))) == pytest.approx(1.0, abs=1e-12)
