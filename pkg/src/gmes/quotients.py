"""Finite quotients G/Stab_G(m) as permutation groups on the p^m vertices of
level m, with a level-by-level chain for order and membership.

Permutations are numpy arrays with perm[x] = image of point x; products read
left to right like the tree action, so (gh)[x] = h[g[x]].  Every group here
is a subgroup of the Sylow p-subgroup of Aut(T_m): each element has a label
in Z/p at every vertex above level m, and on Stab(k) the level-k labels add
under multiplication.  The chain exploits this: level k holds elements of
Stab(k) whose level-k label vectors form an echelon basis over F_p.
"""

from __future__ import annotations

import math
import os
import random
from functools import cached_property, lru_cache

import numpy as np

from . import core
from . import words as W
from .datum import GroupDatum

DEFAULT_MAX_POINTS = 2 ** 15


class QuotientTooLarge(ValueError):
    pass


def max_points() -> int:
    return int(os.environ.get("GMES_MAX_POINTS", DEFAULT_MAX_POINTS))


def perm_identity(n: int) -> np.ndarray:
    return np.arange(n)


def perm_mul(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    return h[g]


def perm_inv(g: np.ndarray) -> np.ndarray:
    out = np.empty_like(g)
    out[g] = np.arange(len(g))
    return out


def perm_pow(g: np.ndarray, k: int) -> np.ndarray:
    if k < 0:
        g, k = perm_inv(g), -k
    out = perm_identity(len(g))
    while k:
        if k & 1:
            out = perm_mul(out, g)
        k >>= 1
        if k:
            g = perm_mul(g, g)
    return out


def is_identity_perm(g: np.ndarray) -> bool:
    return bool((g == np.arange(len(g))).all())


def perm_order(g: np.ndarray) -> int:
    seen = np.zeros(len(g), dtype=bool)
    order = 1
    for x in range(len(g)):
        if seen[x]:
            continue
        n, y = 0, x
        while not seen[y]:
            seen[y] = True
            y = g[y]
            n += 1
        order = math.lcm(order, n)
    return order


def perm_commutator(g, h):
    return perm_mul(perm_mul(perm_inv(g), perm_inv(h)), perm_mul(g, h))


def perm_conjugate(g, h):
    """g^h = h^-1 g h."""
    return perm_mul(perm_mul(perm_inv(h), g), h)


def _tree_degree(p: int, degree: int) -> int:
    m, n = 0, 1
    while n < degree:
        n *= p
        m += 1
    if n != degree:
        raise ValueError(f"{degree} points is not a power of {p}")
    return m


@lru_cache(maxsize=64)
def _first_leaves(p: int, m: int, k: int) -> np.ndarray:
    return np.arange(p ** k) * p ** (m - k)


def perm_labels(g: np.ndarray, p: int, m: int, k: int) -> np.ndarray:
    """Labels of g at the level-k vertices: the first leaf below u (child
    digit 0) is sent to a leaf whose level-(k+1) digit is the label at u."""
    return (g[_first_leaves(p, m, k)] // p ** (m - k - 1)) % p


def perm_portrait(g: np.ndarray, p: int) -> core.Portrait:
    """The portrait of depth m acting on the leaves as g; raises if g is not
    a tree automorphism with labels in Z/p."""
    m = _tree_degree(p, len(g))
    levels = []
    for k in range(m):
        lab = perm_labels(g, p, m, k)
        levels.append({int(i): int(x) for i, x in enumerate(lab) if x})
    f = core.Portrait(p, m, tuple(levels))
    if not np.array_equal(core.level_permutation(f, m), g):
        raise ValueError("permutation does not come from a tree automorphism with labels in Z/p")
    return f


class LevelChain:
    """Chain Stab_H(0) >= Stab_H(1) >= ... for a subgroup H of the Sylow
    p-subgroup of Aut(T_m).

    basis[k] is a list of (pivot, element, inverse, labels) with the labels
    in semi-echelon form: zero before the pivot and 1 at it.  Normal forms are
    ordered products of basis powers; closure under p-th powers and
    commutators of basis elements makes them exactly H.
    """

    def __init__(self, p: int, m: int):
        self.p = p
        self.m = m
        self.degree = p ** m
        self.basis: list[list] = [[] for _ in range(m)]

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.basis)

    def order(self) -> int:
        return self.p ** self.size

    def sift(self, g: np.ndarray):
        """Reduce g by the basis.  Returns (residual, level, labels) where the
        residual is trivial on levels below `level` and `labels` is its
        level-`level` label vector; level == m means g is a member."""
        p = self.p
        for k in range(self.m):
            v = perm_labels(g, p, self.m, k)
            for pivot, _, inv, lab in self.basis[k]:
                c = int(v[pivot])
                if c:
                    for _ in range(c):
                        g = inv[g]
                    v = (v - c * lab) % p
            if v.any():
                return g, k, v
        return g, self.m, None

    def contains(self, g: np.ndarray) -> bool:
        return self.sift(g)[1] == self.m

    def _insert(self, g: np.ndarray, k: int, v: np.ndarray) -> np.ndarray:
        p = self.p
        pivot = int(np.nonzero(v)[0][0])
        c = pow(int(v[pivot]), -1, p)
        g = perm_pow(g, c)
        lab = (v * c) % p
        row = (pivot, g, perm_inv(g), lab)
        level = self.basis[k]
        pos = next((i for i, r in enumerate(level) if r[0] > pivot), len(level))
        level.insert(pos, row)
        return g

    def add_generator(self, g: np.ndarray) -> bool:
        """Enlarge the group by g; returns False when g was already a member."""
        queue = [g]
        grew = False
        while queue:
            x, k, v = self.sift(queue.pop())
            if k == self.m:
                continue
            y = self._insert(x, k, v)
            grew = True
            queue.append(perm_pow(y, self.p))
            for level in self.basis:
                for _, z, _, _ in level:
                    if z is not y:
                        queue.append(perm_commutator(y, z))
        return grew

    def random_element(self, rng: random.Random) -> np.ndarray:
        g = perm_identity(self.degree)
        for level in self.basis:
            for _, z, _, _ in level:
                g = perm_mul(g, perm_pow(z, rng.randrange(self.p)))
        return g


class PermGroup:
    """Subgroup of the Sylow p-subgroup of Aut(T_m) given by generators, with
    a lazily built chain."""

    def __init__(self, p: int, degree: int, generators=(), seed: int = 0):
        self.p = p
        self.degree = degree
        self.m = _tree_degree(p, degree)
        self.generators = []
        for g in generators:
            g = np.asarray(g, dtype=np.int64)
            perm_portrait(g, p)
            if not is_identity_perm(g):
                self.generators.append(g)
        self.seed = seed
        self._chain: LevelChain | None = None

    @property
    def chain(self) -> LevelChain:
        if self._chain is None:
            chain = LevelChain(self.p, self.m)
            for g in self.generators:
                chain.add_generator(g)
            self._chain = chain
            self.self_test()
        return self._chain

    def self_test(self, samples: int = 20) -> None:
        """Random products of generators must sift to the identity."""
        if not self.generators:
            return
        rng = random.Random(self.seed)
        for _ in range(samples):
            g = perm_identity(self.degree)
            for _ in range(rng.randint(1, 12)):
                g = perm_mul(g, rng.choice(self.generators))
            if not self._chain.contains(g):
                raise AssertionError("chain failed its membership self-test")

    def order(self) -> int:
        return self.chain.order()

    def contains(self, g) -> bool:
        g = np.asarray(g)
        if len(g) != self.degree:
            raise ValueError(f"permutation on {len(g)} points, group acts on {self.degree}")
        return self.chain.contains(g)

    def normal_closure(self, gens) -> PermGroup:
        """Smallest subgroup normalized by this group containing gens."""
        out = PermGroup(self.p, self.degree, [], self.seed)
        out._chain = LevelChain(self.p, self.m)
        queue = [np.asarray(g, dtype=np.int64) for g in gens]
        while queue:
            x = queue.pop()
            if not out._chain.add_generator(x):
                continue
            out.generators.append(x)
            for g in self.generators:
                queue.append(perm_conjugate(x, g))
        out.self_test()
        return out

    def derived_subgroup(self) -> PermGroup:
        gs = self.generators
        return self.normal_closure([perm_commutator(g, h) for i, g in enumerate(gs) for h in gs[i + 1:]])

    def frattini_subgroup(self) -> PermGroup:
        """G' G^p, the Frattini subgroup of the p-group G."""
        gs = self.generators
        comms = [perm_commutator(g, h) for i, g in enumerate(gs) for h in gs[i + 1:]]
        return self.normal_closure(comms + [perm_pow(g, self.p) for g in gs])


def _log(n: int, p: int) -> int:
    k = 0
    while n > 1:
        n, r = divmod(n, p)
        if r:
            raise ValueError(f"{n} is not a power of {p}")
        k += 1
    return k


class PermQuotient:
    """G/Stab_G(m) acting on the p^m vertices of level m."""

    def __init__(self, d: GroupDatum, m: int, seed: int = 0):
        if m < 1:
            raise ValueError("quotient level must be at least 1")
        if d.p ** m > max_points():
            raise QuotientTooLarge(f"{d.p}^{m} = {d.p ** m} points exceeds the limit {max_points()} "
                                   "(set GMES_MAX_POINTS to raise it)")
        self.datum = d
        self.m = m
        self.degree = d.p ** m
        names = ["a"] + list(d.generators)
        self.generator_perms = {g: core.level_permutation(core.generator_portrait(d, g, m), m)
                                for g in names}
        self.group = PermGroup(d.p, self.degree, list(self.generator_perms.values()), seed)
        self._syllables: dict = {}

    @property
    def points(self) -> list[core.Address]:
        return [core.index_address(i, self.m, self.datum.p) for i in range(self.degree)]

    def _syllable_perm(self, syl) -> np.ndarray:
        out = self._syllables.get(syl)
        if out is None:
            j, beta = syl
            if j == 0:
                out = perm_pow(self.generator_perms["a"], beta[0])
            else:
                out = perm_identity(self.degree)
                for i, k in enumerate(beta, start=1):
                    out = perm_mul(out, perm_pow(self.generator_perms[(j, i)], k))
            self._syllables[syl] = out
        return out

    def image(self, x) -> np.ndarray:
        if isinstance(x, W.ReducedWord):
            out = perm_identity(self.degree)
            for syl in x.syllables:
                out = perm_mul(out, self._syllable_perm(syl))
            return out
        if isinstance(x, core.Portrait):
            if x.depth < self.m:
                raise core.PortraitError(f"portrait depth {x.depth} below quotient level {self.m}")
            return core.level_permutation(x, self.m)
        raise TypeError(f"cannot map {type(x).__name__} into the quotient")

    def order(self) -> int:
        return self.group.order()

    def contains(self, x) -> bool:
        return self.group.contains(self.image(x) if not isinstance(x, np.ndarray) else x)

    @cached_property
    def derived(self) -> PermGroup:
        return self.group.derived_subgroup()

    def derived_index(self) -> int:
        return self.order() // self.derived.order()

    def in_derived(self, x) -> bool:
        return self.derived.contains(self.image(x) if not isinstance(x, np.ndarray) else x)

    def abelian_rank(self) -> int:
        """Rank of the largest elementary abelian quotient, i.e. of G/G'G^p."""
        phi = self.group.frattini_subgroup()
        return _log(self.order() // phi.order(), self.datum.p)


@lru_cache(maxsize=32)
def build_quotient(d: GroupDatum, m: int, seed: int = 0) -> PermQuotient:
    q = PermQuotient(d, m, seed)
    order = q.order()
    _log(order, d.p)  # raises unless a p-power
    return q


@lru_cache(maxsize=16)
def image_map(d: GroupDatum, m: int) -> PermQuotient:
    """Quotient used only for images of words; the chain is never built."""
    return PermQuotient(d, m)


def derived_subgroup(q: PermQuotient) -> PermGroup:
    return q.derived


def abelian_invariants(q: PermQuotient) -> int:
    return q.abelian_rank()
