import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gmes import datum as D
from gmes.fp import rank


def test_validate_examples():
    d = D.make(3, {1: [(1, 2)], 3: [(1, 2)]})
    assert d.ranks == (1, 0, 1)
    with pytest.raises(D.DatumError, match="dependent"):
        D.make(3, {1: [(1, 2), (2, 4)]})
    assert D.make(5, {2: [(1, 0, 0, 0), (1, 0, 0, 1)]}).ranks == (0, 2, 0, 0, 0)


@pytest.mark.parametrize("raw, message", [
    ({"p": 4, "families": [[], [], [], []]}, "odd prime"),
    ({"p": 2, "families": [[], []]}, "odd prime"),
    ({"p": 3, "families": [[], [], []]}, "empty"),
    ({"p": 3, "families": [[[1, 2]], []]}, "expected 3 families"),
    ({"p": 3, "families": [[[1, 2, 0]], [], []]}, "vectors must be"),
    ({"p": 3, "families": [[[1, 0], [0, 1], [1, 1]], [], []]}, "at most"),
    ({"families": []}, "keys"),
])
def test_validate_errors(raw, message):
    with pytest.raises(D.DatumError, match=message):
        D.validate(raw)


def test_entries_reduced_on_load(tmp_path):
    path = tmp_path / "d.json"
    path.write_text(json.dumps({"p": 3, "families": [[[4, -1]], [], []]}))
    assert D.load(path).vector(1, 1) == (1, 2)


def test_classify_examples(pervova):
    cl = D.classify(pervova)
    assert cl.torsion_criterion and cl.condition_ii_shared_vector and cl.condition_i_nonsymmetric
    assert cl.contains_generalised_GS and cl.in_C_reg and cl.n == 2
    assert not D.classify(D.make(3, {1: [(1, 1)]})).in_C_reg
    cl = D.classify(D.ggs((1, 2, 4, 3)))
    assert cl.contains_generalised_GS and cl.torsion_criterion
    assert not D.classify(D.ggs((1, 1))).torsion_criterion


def test_normalize_examples():
    assert D.normalize_first_generator(D.ggs((2, 1))).vector(1, 1) == (1, 2)
    assert D.normalize_first_generator(D.ggs((1, 2))) == D.ggs((1, 2))
    d = D.normalize_first_generator(D.make(3, {1: [(0, 1), (1, 0)]}))
    assert d.family(1) == ((1, 0), (0, 1))
    with pytest.raises(D.DatumError):
        D.normalize_first_generator(D.make(5, {1: [(0, 1, 0, 0)]}))


def test_n_is_last_nonzero_entry():
    assert D.first_nonzero_n((1, 0, 2, 0)) == 3
    assert D.classify(D.ggs((1, 4, 0, 0))).n == 2


def test_fingerprint_is_canonical(pervova):
    assert pervova.fingerprint() == D.validate(json.loads(json.dumps(pervova.to_json()))).fingerprint()
    assert pervova.fingerprint() != D.ggs((1, 2)).fingerprint()


def _random_datum(rng):
    p = rng.choice([3, 5, 7])
    fams = {}
    for j in range(1, p + 1):
        if rng.random() < 0.5:
            continue
        vecs = []
        for _ in range(rng.randint(1, 2)):
            v = tuple(rng.randrange(p) for _ in range(p - 1))
            if any(v) and rank(vecs + [v], p) == len(vecs) + 1:
                vecs.append(v)
        if vecs:
            fams[j] = vecs
    if not fams:
        fams[1] = [tuple([1] + [0] * (p - 2))]
    return D.make(p, fams)


def _rebased(rng, d, mix=True):
    p = d.p
    fams = {}
    for j in d.nonempty_families:
        vecs = list(d.family(j))
        k = rng.randrange(1, p)
        vecs[0] = tuple(k * x % p for x in vecs[0])
        if mix and len(vecs) > 1:
            c = rng.randrange(p)
            vecs[1] = tuple((x + c * y) % p for x, y in zip(vecs[1], vecs[0]))
        rng.shuffle(vecs)
        fams[j] = vecs
    return D.make(p, fams)


@given(seed=st.integers(0, 10 ** 6))
def test_subspace_flags_survive_basis_change(seed):
    rng = random.Random(seed)
    d = _random_datum(rng)
    a, b = D.classify(d).to_json(), D.classify(_rebased(rng, d)).to_json()
    for key in ("standard_form_valid", "in_C_reg", "torsion_criterion", "condition_i_nonsymmetric"):
        assert a[key] == b[key]


@given(seed=st.integers(0, 10 ** 6))
def test_generalised_gs_flag_survives_powering(seed):
    rng = random.Random(seed)
    d = _random_datum(rng)
    e = _rebased(rng, d, mix=False)
    assert D.classify(d).contains_generalised_GS == D.classify(e).contains_generalised_GS


def test_shared_vector_flag_is_not_basis_invariant():
    assert D.classify(D.make(3, {1: [(1, 2)], 3: [(1, 2)]})).condition_ii_shared_vector
    assert not D.classify(D.make(3, {1: [(1, 2)], 3: [(2, 1)]})).condition_ii_shared_vector


@given(seed=st.integers(0, 10 ** 6))
def test_normalize_family_keeps_the_span(seed):
    rng = random.Random(seed)
    d = _random_datum(rng)
    j = d.designated_family
    try:
        e = D.normalize_family(d, j)
    except D.DatumError:
        assert all(v[0] == 0 for v in d.family(j))
        return
    assert all(v[0] == 1 for v in e.family(j))
    assert rank(list(d.family(j)) + list(e.family(j)), d.p) == len(d.family(j))
