import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from rosenthal.amalgam import (DenseWindow, EncodingError, PairTree, build_amalgam,
                               build_partition, bundle_from_json, bundle_text, bundle_to_json,
                               corrupt_phi, dense_copies, dense_grid, dense_window_for,
                               encode_members, select_chain, star_embed_image,
                               verify_member_strong_embedding, verify_norm_identity)
from rosenthal.ell1 import FnWindow
from rosenthal.embed import monotone_map_iv
from rosenthal.seqtree import is_prefix
from rosenthal.stepfn import AtomSpace, StepFn, sup_norm, zero

VALUES = [F(v, 4) for v in range(-4, 5)]


def random_member(rng, n, level):
    fns = []
    while len(fns) < n:
        f = StepFn(AtomSpace.dyadic(level), [rng.choice(VALUES) for _ in range(2 ** level)])
        if not f.is_zero() and f not in fns:
            fns.append(f)
    return FnWindow(fns)


def build(members, depth):
    dense = dense_window_for(members, depth)
    return build_amalgam(encode_members(members, dense, depth), dense)


def test_partition_examples():
    assert build_partition(1, 5) == [frozenset(range(5))]
    assert build_partition(2, 4) == [frozenset({0, 2}), frozenset({1, 3})]
    rng = random.Random(0)
    for _ in range(20):
        c = rng.randint(1, 6)
        r = rng.randint(c, 30)
        P = build_partition(c, r)
        assert all(P) and set().union(*P) == set(range(r)) and sum(map(len, P)) == r
    with pytest.raises(ValueError):
        build_partition(3, 2)


def test_verbatim_member_exact_matches():
    g = random_member(random.Random(1), 2, 2)
    dense = DenseWindow(dense_copies(g[0], F(1, 4), 4, 4) + dense_copies(g[1], F(1, 4), 4, 4))
    T = encode_members([(g, F(1, 4))], dense, 4)
    out = build_amalgam(T, dense)
    L = select_chain(out, 0, 2, F(1, 4), g)
    assert len(L) == 2
    assert sup_norm(g[0] - out.h[out.nodes[L[0]]]) == 0  # first copy is g_0 itself
    assert verify_member_strong_embedding(out, 0, g, F(1, 1000)).holds


def test_coarse_dense_rejected():
    g = random_member(random.Random(2), 2, 2)
    dense = DenseWindow([g[0], g[1]])
    with pytest.raises(EncodingError, match="injectively"):
        encode_members([(g, F(1, 4))], dense, 4)
    far = DenseWindow([StepFn(AtomSpace.dyadic(2), [1, 1, 1, 1])])
    with pytest.raises(EncodingError, match="too coarse"):
        encode_members([(g, F(1, 4))], far, 4)


def test_approximation_found_iff_within_bound():
    sp = AtomSpace.dyadic(1)
    g = FnWindow([StepFn(sp, [1, 0])])
    near = [StepFn(sp, [1 - F(1, 2 ** j), 0]) for j in range(1, 8)]
    dense = DenseWindow(near)
    # position k needs a d_j within eps/2^(k+1) = 1/2^(k+2)
    for depth in range(1, 6):
        ok = all(any(sup_norm(g[0] - d) <= F(1, 2 ** (k + 2)) for d in near[k:]) for k in range(depth))
        try:
            encode_members([(g, F(1, 2))], dense, depth)
            assert ok
        except EncodingError:
            assert not ok


def test_shared_prefix_shares_nodes():
    rng = random.Random(3)
    g = random_member(rng, 2, 2)
    dense = dense_window_for([(g, F(1, 4))], 4)
    # one member listed at two eps values: both entries are kept on the branch
    T = encode_members([(g, F(1, 4)), (g, F(1, 8))], dense, 4)
    assert list(T.branches.values()) == [[0, 1]] and len(T.nodes) == 5
    other = FnWindow([g[0], random_member(rng, 1, 2)[0]])
    assume_distinct = other[1] != g[1]
    members = [(g, F(1, 4)), (other, F(1, 4))]
    dense = dense_window_for(members, 4)
    T = encode_members(members, dense, 4)
    (s0, _), (s1, _) = T.branch_of(0), T.branch_of(1)
    assert s0[0] == s1[0]
    if assume_distinct:
        assert s0 != s1 and len(T.nodes) < 1 + 2 * 4


def test_pair_tree_validation():
    with pytest.raises(ValueError):
        PairTree(frozenset({((), ()), ((0, 1), (0, 0))}), {((0, 1), (0, 0)): [0]}, 2, [])
    with pytest.raises(ValueError):
        PairTree(frozenset({((), ()), ((0,), (0,))}), {}, 1, [])


def test_root_and_chain_structure():
    rng = random.Random(4)
    out = build([(random_member(rng, 3, 2), F(1, 4))], 3)
    assert out.nodes[0] == ((), ()) and out.f[0].is_zero() and out.h[out.nodes[0]] == zero(out.dense.space)
    words = [out.phi[t] for t in out.nodes]
    assert all(is_prefix(a, b) for a, b in zip(words, words[1:]))
    assert len(out.window()) == len(out.f) - 1


def test_incomparable_nodes_disjoint_supports():
    rng = random.Random(5)
    members = [(random_member(rng, 2, 2), F(1, 4)) for _ in range(2)]
    out = build(members, 4)
    for i, t in enumerate(out.nodes):
        for j, u in enumerate(out.nodes):
            a, b = out.phi[t], out.phi[u]
            if not (a.startswith(b) or b.startswith(a)):
                assert all(x * y == 0 for x, y in zip(out.f[i].values, out.f[j].values))


def test_norm_identity_scalar_case():
    rng = random.Random(6)
    out = build([(random_member(rng, 1, 2), F(1, 4))], 1)
    assert verify_norm_identity(out, [1]).passed


def test_corrupted_phi_fails_with_witness():
    rng = random.Random(7)
    g = random_member(rng, 3, 3)
    out = build([(g, F(1, 4))], 6)
    L = select_chain(out, 0, 3)
    assert verify_norm_identity(out, L).passed
    bad = build_amalgam(out.tree, out.dense, phi=corrupt_phi(out, L), check=False)
    r = verify_norm_identity(bad, L)
    assert not r.passed and r.witness is not None
    assert r.details["prefix_value"] != r.details["comb_value"]


def test_star_embed_image():
    rng = random.Random(8)
    out = build([(random_member(rng, 2, 2), F(1, 4))], 2)
    tau = "0" * out.level
    g, h = random_member(rng, 2, 2)
    assert star_embed_image(zero(g.space), tau, out).is_zero()
    assert star_embed_image(g, tau, out) != star_embed_image(h, tau, out)
    assert sup_norm(star_embed_image(g, tau, out)) == sup_norm(g)
    with pytest.raises(ValueError):
        star_embed_image(g, tau + "0", out)


def test_smaller_eps_reported_honestly():
    rng = random.Random(9)
    g = random_member(rng, 3, 3)
    out = build([(g, F(1, 4))], 6)
    assert verify_member_strong_embedding(out, 0, g, F(1, 4)).holds
    tiny = verify_member_strong_embedding(out, 0, g, F(1, 10 ** 6))
    assert tiny.holds or tiny.witness is not None


def test_bundle_roundtrip_and_tamper():
    rng = random.Random(10)
    members = [(random_member(rng, 2, 2), F(1, 4)) for _ in range(2)]
    out = build(members, 4)
    sels = {i: select_chain(out, i, 2) for i in range(2)}
    certs = {i: verify_member_strong_embedding(out, i, g, e) for i, (g, e) in enumerate(members)}
    idents = {i: verify_norm_identity(out, sels[i]) for i in range(2)}
    bundle = bundle_to_json(members, out, sels, certs, idents)
    assert bundle_text(bundle) == bundle_text(bundle_to_json(members, out, sels, certs, idents))
    m2, out2 = bundle_from_json(bundle)
    assert out2.f == out.f and [g for g, _ in m2] == [g for g, _ in members]
    bundle["nodes"] = bundle["nodes"][::-1]
    bundle["phi"] = bundle["phi"][::-1]
    with pytest.raises(ValueError):
        bundle_from_json(bundle)


def test_dense_grid():
    grid = dense_grid(1)
    assert len(grid) == 24 and all(not f.is_zero() for f in grid)


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6), st.integers(1, 2), st.integers(1, 3))
def test_embedding_on_random_members(seed, count, n):
    rng = random.Random(seed)
    members = [(random_member(rng, n, 2), F(1, rng.randint(2, 8))) for _ in range(count)]
    out = build(members, 2 * n)
    for i, (g, eps) in enumerate(members):
        L = select_chain(out, i, n, eps, g)
        assert verify_norm_identity(out, L).passed
        assert verify_member_strong_embedding(out, i, g, eps).holds
        # every chain of the branch satisfies the identity, not only the selected one
        s, w = out.tree.branch_of(i)
        chain = [out.index[(s[:m], w[:m])] for m in range(1, len(s) + 1)]
        assert verify_norm_identity(out, chain[: n + 1]).passed


@settings(max_examples=10)
@given(st.integers(0, 10 ** 6))
def test_rank_coherence_on_amalgams(seed):
    rng = random.Random(seed)
    g = random_member(rng, 3, 2)
    eps = F(1, 8)
    out = build([(g, eps)], 6)
    L = [l - 1 for l in select_chain(out, 0, 3)]
    for d in (1, F(3, 2), 2):
        m = monotone_map_iv(g, out.window(), L, eps, d)
        assert m.monotone and m.source_order <= m.target_order
