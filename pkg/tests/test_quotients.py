import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from gmes import core
from gmes import quotients as Q
from gmes import words as W


def bfs(d, m):
    gens = O.generator_permutations(d, m)
    group = O.closure(gens, d.p ** m)
    return gens, group


def as_tuple(perm):
    return tuple(int(x) for x in perm)


@pytest.mark.parametrize("name, m", [("gs3", 1), ("gs3", 2), ("gs3", 3), ("pervova", 2), ("pervova", 3),
                                     ("gs5", 2), ("mixed5", 2)])
def test_order_and_derived_subgroup_match_breadth_first_search(name, m, request):
    d = request.getfixturevalue(name)
    q = Q.build_quotient(d, m)
    gens, group = bfs(d, m)
    assert [as_tuple(g) for g in q.generator_perms.values()] == gens
    assert q.order() == len(group)
    der = O.derived(group, gens)
    assert q.derived.order() == len(der)
    assert q.derived_index() == len(group) // len(der)
    assert q.abelian_rank() == round(math.log(len(group) // len(O.frattini(group, gens, d.p)), d.p))


def test_small_examples(gs3):
    assert Q.build_quotient(gs3, 1).order() == 3
    assert Q.build_quotient(gs3, 1).derived.order() == 1
    assert Q.build_quotient(gs3, 1).abelian_rank() == 1
    assert Q.build_quotient(gs3, 2).abelian_rank() == 2
    assert Q.build_quotient(gs3, 3).abelian_rank() == 2


def test_pervova_quotients_see_only_two_abelian_generators(pervova):
    """b and c agree modulo G' Stab(m): the congruence quotients have abelian
    rank 2 and derived index 9, although G/G' has rank 3."""
    for m in (2, 3):
        q = Q.build_quotient(pervova, m)
        gens, group = bfs(pervova, m)
        der = O.derived(group, gens)
        cb = W.parse(pervova, "b3_1^-1 b1_1")
        assert q.in_derived(cb) == (O.word_permutation(pervova, cb, m) in der) == True  # noqa: E712
        assert q.derived_index() == 9 and q.abelian_rank() == 2
    assert W.exponents(W.parse(pervova, "b3_1^-1 b1_1")) == (0, 1, 2)


def test_image_examples(gs3):
    q = Q.build_quotient(gs3, 2)
    a = q.image(W.gen(gs3, "a"))
    assert Q.perm_order(a) == 3
    assert all(a[x] == (x + 3) % 9 for x in range(9))
    b = q.image(W.gen(gs3, "b1_1"))
    moved = {x for x in range(9) if b[x] != x}
    assert moved == set(range(6))
    w = W.parse(gs3, "a b1_1 a^2 b1_1^2")
    assert Q.is_identity_perm(q.image(w * w.inverse()))
    with pytest.raises(core.PortraitError):
        q.image(W.portrait(w, 1))
    assert np.array_equal(q.image(W.portrait(w, 2)), q.image(w))


@given(seed=st.integers(0, 10 ** 6))
def test_image_is_a_homomorphism(pervova, seed):
    rng = random.Random(seed)
    q = Q.build_quotient(pervova, 3)
    u, v = (W.random_word(rng, pervova, rng.randint(0, 5)) for _ in range(2))
    assert np.array_equal(q.image(u * v), Q.perm_mul(q.image(u), q.image(v)))
    assert as_tuple(q.image(u)) == O.word_permutation(pervova, u, 3)
    assert q.contains(u)


def test_membership_agrees_with_search_on_the_whole_sylow_subgroup(gs3):
    """Every automorphism of the depth-2 ternary tree with labels in Z/3."""
    q = Q.build_quotient(gs3, 2)
    _, group = bfs(gs3, 2)
    count = 0
    for labels in itertools.product(range(3), repeat=4):
        f = core.from_labels(3, 2, {(): labels[0], (1,): labels[1], (2,): labels[2], (3,): labels[3]})
        perm = core.level_permutation(f, 2)
        assert q.contains(perm) == (as_tuple(perm) in group)
        count += q.contains(perm)
    assert count == 27


@given(seed=st.integers(0, 10 ** 6))
def test_derived_membership_agrees_with_search(gs3, seed):
    rng = random.Random(seed)
    q = Q.build_quotient(gs3, 3)
    gens, group = _cached_gs3_m3(gs3)
    w = W.random_word(rng, gs3, rng.randint(0, 5))
    if rng.random() < 0.5:
        w = W.commutator(w, W.random_word(rng, gs3, 2))
    assert q.in_derived(w) == (O.word_permutation(gs3, w, 3) in group)


_CACHE = {}


def _cached_gs3_m3(d):
    if "gs3" not in _CACHE:
        gens, group = bfs(d, 3)
        _CACHE["gs3"] = gens, O.derived(group, gens)
    return _CACHE["gs3"]


def test_quotients_project(pervova):
    for m in (2, 3):
        big, small = Q.build_quotient(pervova, m), Q.build_quotient(pervova, m - 1)
        assert big.order() % small.order() == 0
        for g, perm in big.generator_perms.items():
            assert np.array_equal(perm[::3] // 3, small.generator_perms[g])


def test_size_guard(gs3, monkeypatch):
    monkeypatch.setenv("GMES_MAX_POINTS", "100")
    with pytest.raises(Q.QuotientTooLarge):
        Q.PermQuotient(gs3, 5)


def test_non_tree_permutations_are_rejected():
    with pytest.raises(ValueError):
        Q.perm_portrait(np.array([1, 0, 2, 3, 4, 5, 6, 7, 8]), 3)
    with pytest.raises(ValueError):
        Q.PermGroup(3, 9, [np.array([1, 0, 2, 3, 4, 5, 6, 7, 8])])


def test_portrait_round_trip(mixed5):
    w = W.parse(mixed5, "a b1_1 b2_2^3 a^2 b2_1")
    f = W.portrait(w, 2)
    assert Q.perm_portrait(core.level_permutation(f, 2), 5) == f


def test_chain_self_test_detects_corruption(gs3):
    group = Q.PermGroup(3, 9, list(Q.build_quotient(gs3, 2).generator_perms.values()))
    group.chain.basis[1].pop()
    with pytest.raises(AssertionError):
        group.self_test()
