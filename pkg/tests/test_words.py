import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from gmes import core
from gmes import words as W
from gmes.datum import ggs


def test_reduce_examples(pervova):
    assert W.reduce(pervova, [("a", 1)] * 3) == W.empty(pervova)
    assert W.reduce(pervova, [("b1_1", 1), ("b1_1", 2)]) == W.empty(pervova)
    w = W.reduce(pervova, [("a", 1), ("b1_1", 1), ("b3_1", 1), ("a", 2)])
    assert w.syllables == ((0, (1,)), (1, (1,)), (3, (1,)), (0, (2,)))
    assert W.ReducedWord(pervova, w.syllables) == w
    with pytest.raises(core.PortraitError):
        W.reduce(pervova, [("b2_1", 1)])


def test_mixed_family_blocks_merge(mixed5):
    w = W.reduce(mixed5, [("b2_1", 1), ("b2_2", 3), ("b2_1", 4)])
    assert w.syllables == ((2, (0, 3)),)


def test_length_examples(pervova):
    assert W.length(W.parse(pervova, "a^2")) == 0
    assert W.length(W.parse(pervova, "b1_1")) == 1
    assert W.length(W.parse(pervova, "a b1_1 a b3_1 b1_1")) == 3


def test_exponent_examples(gs3, pervova):
    assert W.exponents(W.parse(gs3, "a b1_1^2 a")) == (2, 2)
    assert W.exponents(W.parse(pervova, "[a, b1_1]")) == (0, 0, 0)
    assert W.exponents(W.parse(pervova, "b1_1 b3_1^-1")) == (0, 1, 2)


def test_generators_map_to_a_basis(mixed5):
    gens = ["a"] + list(mixed5.generators)
    rows = [W.exponents(W.gen(mixed5, g)) for g in gens]
    assert rows == [tuple(int(i == k) for i in range(len(gens))) for k in range(len(gens))]


def test_section_split_examples(pervova):
    b = W.gen(pervova, "b1_1")
    a = W.gen(pervova, "a")
    split = W.section_split(b)
    assert [str(s) for s in split.sections] == ["a", "a^2", "b1_1"] and split.root_exponent == 0
    split = W.section_split(a)
    assert [str(s) for s in split.sections] == ["1", "1", "1"] and split.root_exponent == 1
    split = W.section_split(W.conjugate(b, a))
    assert [str(s) for s in split.sections] == ["b1_1", "a", "a^2"]
    assert split.portrait(3) == W.portrait(W.conjugate(b, a), 3)


def test_word_grammar(pervova):
    assert W.parse(pervova, "a^-1") == W.gen(pervova, "a", 2)
    assert W.parse(pervova, "(b1_1)^a") == W.conjugate(W.gen(pervova, "b1_1"), W.gen(pervova, "a"))
    assert W.parse(pervova, "[b1_1, a, b3_1]") == W.commutator(
        W.gen(pervova, "b1_1"), W.gen(pervova, "a"), W.gen(pervova, "b3_1"))
    assert W.parse(pervova, "1") == W.empty(pervova)
    assert W.parse(pervova, str(W.parse(pervova, "a b1_1^2 b3_1 a^2"))) == W.parse(pervova, "a b1_1^2 b3_1 a^2")
    with pytest.raises(W.WordError):
        W.parse(pervova, "a [b1_1")
    with pytest.raises(W.WordError):
        W.parse(pervova, "b2_1")


def test_identity_examples(pervova):
    b, c = W.gen(pervova, "b1_1"), W.gen(pervova, "b3_1")
    assert not W.is_identity(b.inverse() * c)
    comm = W.commutator(b, c)
    brute = O.word_permutation(pervova, comm, 6) == tuple(range(3 ** 6))
    assert W.is_identity(comm) == brute


def test_element_order_examples(pervova, gs3):
    for g in ["a", "b1_1", "b3_1"]:
        assert W.element_order(W.gen(pervova, g)) == 3
    ab = W.parse(gs3, "a b1_1")
    perm_orders = []
    for perm in (O.word_permutation(gs3, ab, m) for m in (4, 5, 6)):
        k, x = 1, perm
        while x != tuple(range(len(perm))):
            x, k = O.mul(x, perm), k + 1
        perm_orders.append(k)
    assert perm_orders[0] == perm_orders[-1]
    assert W.element_order(ab) == perm_orders[-1]


def test_element_order_gives_up_without_torsion():
    d = ggs((1, 1))
    assert W.element_order(W.parse(d, "a b1_1"), cap=200) is None


data_names = ["pervova", "gs3", "gs5", "mixed5"]


@pytest.fixture(params=data_names)
def datum(request):
    return request.getfixturevalue(request.param)


def _word(seed, d, most=6):
    rng = random.Random(seed)
    return W.random_word(rng, d, rng.randint(0, most))


@given(seed=st.integers(0, 10 ** 6))
def test_reduce_is_canonical(datum, seed):
    w = _word(seed, datum)
    assert W.ReducedWord(datum, w.syllables) == w
    assert w * w.inverse() == W.empty(datum)
    raw = [(g, k) for g, k in _raw(datum, w)]
    assert W.reduce(datum, raw) == w


def _raw(d, w):
    for j, beta in w.syllables:
        if j == 0:
            yield "a", beta[0]
        else:
            for i, k in enumerate(beta, start=1):
                if k:
                    yield (j, i), k


@given(seed=st.integers(0, 10 ** 6))
def test_exponents_are_homomorphic(datum, seed):
    u, v = _word(seed, datum), _word(seed + 1, datum)
    p = datum.p
    assert W.exponents(u * v) == tuple((x + y) % p for x, y in zip(W.exponents(u), W.exponents(v)))
    c = W.commutator(u, v)
    assert W.in_kernel(c) and W.in_kernel(W.conjugate(c, u))


@given(seed=st.integers(0, 10 ** 6))
def test_sections_shrink(datum, seed):
    w = _word(seed, datum, 8)
    split = W.section_split(w)
    assert sum(W.length(s) for s in split.sections) <= W.length(w)
    if W.length(w) > 1:
        for s in split.sections:
            for t in W.section_split(s).sections:
                assert W.length(t) < W.length(w)


@given(seed=st.integers(0, 10 ** 6))
def test_sections_match_the_action(datum, seed):
    w = _word(seed, datum, 5)
    split = W.section_split(w)
    h = w * W.gen(datum, "a", -split.root_exponent)
    for x in range(1, datum.p + 1):
        sec = W.portrait(split.sections[x - 1], 2)
        for u in O.vertices(datum.p, 2):
            image = O.act_word(datum, h, (x,) + u)
            assert image[0] == x and core.act(sec, u) == image[1:]


@given(seed=st.integers(0, 10 ** 6))
def test_reassembly_matches_portrait(datum, seed):
    w = _word(seed, datum, 6)
    assert W.section_split(w).portrait(4) == W.portrait(w, 4)


@given(seed=st.integers(0, 10 ** 6))
def test_solver_matches_brute_force(pervova, seed):
    rng = random.Random(seed)
    w = W.random_word(rng, pervova, rng.randint(0, 3))
    depth = 2 * W.length(w) + 2
    brute = O.word_permutation(pervova, w, depth) == tuple(range(3 ** depth))
    assert W.is_identity(w) == brute
    assert W.is_identity(w * w.inverse())


@given(seed=st.integers(0, 10 ** 6), k=st.integers(1, 4))
def test_pth_power_congruence(gs5, seed, k):
    rng = random.Random(seed)
    h = W.random_word(rng, gs5, rng.randint(0, 4))
    h = h * W.gen(gs5, "a", -W.epsilon_a(h))
    w = W.gen(gs5, "a", k) * h
    target = W.exponents(W.sections_product(W.section_split(h), range(1, 6)))
    for part in W.section_split(w ** 5).sections:
        assert W.exponents(part) == target


@given(seed=st.integers(0, 10 ** 6))
def test_orders_match_the_quotient(gs3, seed):
    rng = random.Random(seed)
    w = W.random_word(rng, gs3, rng.randint(1, 3))
    k = W.element_order(w)
    assert k is not None and k % 3 == 0
    perm = O.word_permutation(gs3, w, 4)
    x = tuple(range(81))
    for _ in range(k):
        x = O.mul(x, perm)
    assert x == tuple(range(81))
    assert W.is_identity(w ** k)
    assert not W.is_identity(w ** (k // 3))
