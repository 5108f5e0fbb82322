"""Reproducible pseudo-random word corpora."""

from __future__ import annotations

import random

from . import words as W
from .datum import GroupDatum


def _random_generator_power(rng: random.Random, d: GroupDatum) -> W.ReducedWord:
    gens = ["a"] + list(d.generators)
    g = rng.choice(gens)
    return W.gen(d, g, rng.randrange(1, d.p))


def derived_word(rng: random.Random, d: GroupDatum, max_length: int = 8, max_factors: int = 4) -> W.ReducedWord:
    """Product of at most `max_factors` commutators of generator powers, some of
    them conjugated by a generator power; retried until the length fits."""
    while True:
        w = W.empty(d)
        for _ in range(rng.randint(1, max_factors)):
            c = W.commutator(_random_generator_power(rng, d), _random_generator_power(rng, d))
            if rng.random() < 0.5:
                c = W.conjugate(c, _random_generator_power(rng, d))
            w = w * c
        if W.length(w) <= max_length:
            return w


def corpus(seed: int, d: GroupDatum, size: int, max_length: int = 8,
           in_derived: bool = False) -> list[W.ReducedWord]:
    """`size` words over d.  Plain words have a uniform number of blocks in
    0..max_length; derived words are short products of commutators."""
    rng = random.Random(seed)
    if in_derived:
        return [derived_word(rng, d, max_length) for _ in range(size)]
    return [W.random_word(rng, d, rng.randint(0, max_length)) for _ in range(size)]


def coherence_level(w: W.ReducedWord) -> int:
    return 2 * W.length(w) + 2


def coherence(w: W.ReducedWord, quotient: bool = True) -> dict:
    """Triviality of w according to the recursive solver, the portrait at
    depth 2|w|+2 and (optionally) the image in G/Stab(2|w|+2)."""
    from . import quotients as Q

    m = coherence_level(w)
    out = {"word": str(w), "level": m, "solver": W.is_identity(w),
           "portrait": W.portrait(w, m).is_identity()}
    if quotient:
        out["quotient"] = Q.is_identity_perm(Q.image_map(w.datum, m).image(w))
    out["agree"] = len({v for k, v in out.items() if k in ("solver", "portrait", "quotient")}) == 1
    return out
