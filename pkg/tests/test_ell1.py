import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

import oracles
from rosenthal.ell1 import (FnWindow, build_glued_tree, build_l1_tree, build_l1_trees,
                            l1_equivalence_constants, rank)
from rosenthal.families import projection_functions, schreier_restricted, uniform_family
from rosenthal.seqtree import SeqTree, order
from rosenthal.stepfn import AtomSpace, StepFn, constant, pullback

D2 = AtomSpace.dyadic(2)
VALUES = [F(v, 2) for v in range(-2, 3)]


def random_window(rng, n, space=D2):
    fns = []
    while len(fns) < n:
        f = StepFn(space, [rng.choice(VALUES) for _ in range(space.size)])
        if f not in fns:
            fns.append(f)
    return FnWindow(fns)


windows = st.builds(lambda seed, n, level: random_window(random.Random(seed), n, AtomSpace.dyadic(level)),
                    st.integers(0, 10 ** 6), st.integers(1, 4), st.sampled_from([2, 3]))


def test_window_validation():
    f = constant(D2, 1)
    with pytest.raises(ValueError):
        FnWindow([f, f])
    with pytest.raises(ValueError):
        FnWindow([constant(D2, 2)])
    with pytest.raises(ValueError):
        FnWindow([f, constant(AtomSpace.dyadic(1), 1)])
    w = FnWindow([f, f * F(1, 2)])
    assert FnWindow.from_json(w.to_json()) == w


def test_constants_examples():
    f = StepFn(D2, [1, 0, F(-1, 2), 0])
    assert l1_equivalence_constants([f]) == (1, 1)
    assert l1_equivalence_constants([f, f])[0] == 0
    pi = projection_functions(uniform_family(1, 2))
    assert l1_equivalence_constants(list(pi)) == (F(1, 2), 1)


def test_tree_examples():
    one = FnWindow([constant(D2, 1)])
    assert build_l1_tree(one, 1) == SeqTree([(), (0,)])
    pi = projection_functions(uniform_family(1, 2))
    assert (0, 1) in build_l1_tree(pi, 2)
    consts = FnWindow([constant(D2, c) for c in (1, F(1, 2), F(1, 4))])
    T = build_l1_tree(consts, 2, 3)
    assert T.nodes == oracles.l1_tree_nodes(list(consts), 2, 3) == {(), (0,), (1,)}


def test_glued_tree_and_rank():
    one = FnWindow([constant(D2, 1)])
    G = build_glued_tree(one, [1])
    assert G == SeqTree([(), (1,), (1, 0)])
    # the order of {(), (1,), (1, 0)} is 3
    assert rank(one, [1]) == 3 == order(G)


def test_schreier_window_rank():
    pi = projection_functions(schreier_restricted(9))
    assert rank(pi, [1, 2], 6) >= 7


def test_d_below_one_rejected():
    with pytest.raises(ValueError):
        build_l1_tree(FnWindow([constant(D2, 1)]), F(1, 2))


@given(windows)
def test_tree_matches_oracle(w):
    for d in (1, F(3, 2), 2, 4):
        assert build_l1_tree(w, d, 3).nodes == oracles.l1_tree_nodes(list(w), d, 3)


@given(windows)
def test_monotone_in_d_and_length(w):
    trees = build_l1_trees(w, [1, F(3, 2), 2, 3], 4)
    ts = list(trees.values())
    for a, b in zip(ts, ts[1:]):
        assert a.nodes <= b.nodes
    assert build_l1_tree(w, 2, 2).nodes <= build_l1_tree(w, 2, 3).nodes


@given(windows, st.randoms(use_true_random=False))
def test_window_extension_never_shrinks(w, rng):
    extra = random_window(rng, 1, w[0].space)
    if extra[0] in w.fns:
        return
    bigger = FnWindow(list(w) + [extra[0]])
    assert build_l1_tree(w, 2).nodes <= build_l1_tree(bigger, 2).nodes


@given(windows, st.randoms(use_true_random=False))
def test_rank_invariant_under_pullback(w, rng):
    n = w[0].space.size
    size = rng.randint(n, n + 4)
    e = list(range(n)) + [rng.randrange(n) for _ in range(size - n)]
    rng.shuffle(e)
    Z = AtomSpace.discrete(range(size))
    pulled = FnWindow([pullback(f, e, Z) for f in w])
    assert rank(pulled, [1, 2]) == rank(w, [1, 2])
    assert build_l1_tree(pulled, 2) == build_l1_tree(w, 2)
