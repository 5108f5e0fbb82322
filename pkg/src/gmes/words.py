"""Free-product normal forms, length and exponent maps, first-level sections,
the word problem and element orders.

A word is a sequence of syllables (j, beta).  Family 0 stands for the cyclic
group <a> with beta = (alpha,); family j >= 1 stands for the elementary
abelian group generated by b<j>_1, ..., b<j>_<r_j> with beta the exponent
vector.  Reduced words never contain two adjacent syllables of the same
family nor a zero exponent vector, which makes them the unique normal form
in the free product of these groups.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx

from . import core
from .datum import GroupDatum

Syllable = tuple[int, tuple[int, ...]]


class WordError(ValueError):
    pass


def _push(stack: list, syl: Syllable, p: int) -> None:
    j, beta = syl
    if stack and stack[-1][0] == j:
        merged = tuple((x + y) % p for x, y in zip(stack[-1][1], beta))
        if any(merged):
            stack[-1] = (j, merged)
        else:
            stack.pop()
    elif any(x % p for x in beta):
        stack.append((j, tuple(x % p for x in beta)))


class ReducedWord:
    __slots__ = ("datum", "syllables", "_hash")

    def __init__(self, datum: GroupDatum, syllables=()):
        stack: list = []
        for syl in syllables:
            _push(stack, syl, datum.p)
        self.datum = datum
        self.syllables = tuple(stack)
        self._hash = hash(self.syllables)

    @classmethod
    def _trusted(cls, datum, syllables) -> ReducedWord:
        w = cls.__new__(cls)
        w.datum = datum
        w.syllables = tuple(syllables)
        w._hash = hash(w.syllables)
        return w

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReducedWord):
            return NotImplemented
        return self._hash == other._hash and self.syllables == other.syllables and self.datum == other.datum

    def __hash__(self) -> int:
        return self._hash

    def __mul__(self, other: ReducedWord) -> ReducedWord:
        if other.datum is not self.datum and other.datum != self.datum:
            raise WordError("words over different data")
        stack = list(self.syllables)
        for syl in other.syllables:
            _push(stack, syl, self.datum.p)
        return ReducedWord._trusted(self.datum, stack)

    def inverse(self) -> ReducedWord:
        p = self.datum.p
        return ReducedWord._trusted(self.datum, [(j, tuple(-x % p for x in beta))
                                                 for j, beta in reversed(self.syllables)])

    def __invert__(self) -> ReducedWord:
        return self.inverse()

    def __pow__(self, k: int) -> ReducedWord:
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        out = ReducedWord._trusted(self.datum, ())
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __len__(self) -> int:
        return length(self)

    def __bool__(self) -> bool:
        return bool(self.syllables)

    def __repr__(self) -> str:
        return f"ReducedWord({format_word(self)!r})"

    def __str__(self) -> str:
        return format_word(self)


def empty(d: GroupDatum) -> ReducedWord:
    return ReducedWord._trusted(d, ())


def gen(d: GroupDatum, g, k: int = 1) -> ReducedWord:
    """The word g^k for a generator id ('a', 'b<j>_<i>' or (j, i))."""
    j, i = core.parse_generator(d, g)
    if j == 0:
        return ReducedWord(d, [(0, (k,))])
    beta = [0] * d.ranks[j - 1]
    beta[i - 1] = k
    return ReducedWord(d, [(j, tuple(beta))])


def reduce(d: GroupDatum, raw) -> ReducedWord:
    """Normal form of a product of (generator, exponent) pairs."""
    out = []
    for g, k in raw:
        out.extend(gen(d, g, k).syllables)
    return ReducedWord(d, out)


def conjugate(x: ReducedWord, y: ReducedWord) -> ReducedWord:
    """x^y = y^-1 x y."""
    return y.inverse() * x * y


def commutator(*xs: ReducedWord) -> ReducedWord:
    """Left-normed commutator [x1, x2, ..., xk] with [x, y] = x^-1 y^-1 x y."""
    if len(xs) < 2:
        raise WordError("a commutator needs at least two entries")
    out = xs[0]
    for y in xs[1:]:
        out = out.inverse() * y.inverse() * out * y
    return out


def length(w: ReducedWord) -> int:
    """Number of family blocks in the normal form."""
    return sum(1 for j, _ in w.syllables if j)


def epsilon_a(w: ReducedWord) -> int:
    return sum(beta[0] for j, beta in w.syllables if j == 0) % w.datum.p


def exponents(w: ReducedWord) -> tuple[int, ...]:
    """(eps_a, eps_b for every directed generator in datum order)."""
    d = w.datum
    acc = {j: [0] * r for j, r in enumerate(d.ranks, start=1)}
    ea = 0
    for j, beta in w.syllables:
        if j == 0:
            ea += beta[0]
        else:
            row = acc[j]
            for t, x in enumerate(beta):
                row[t] += x
    out = [ea % d.p]
    for j, i in d.generators:
        out.append(acc[j][i - 1] % d.p)
    return tuple(out)


def in_kernel(w: ReducedWord) -> bool:
    return not any(exponents(w))


@dataclass(frozen=True)
class SectionSplit:
    sections: tuple[ReducedWord, ...]
    root_exponent: int

    def portrait(self, depth: int) -> core.Portrait:
        if depth < 1:
            raise WordError("reassembly needs depth >= 1")
        return core.from_sections([portrait(s, depth - 1) for s in self.sections], self.root_exponent)


@lru_cache(maxsize=None)
def _block_layout(d: GroupDatum, j: int, beta: tuple[int, ...]):
    return d.layout(j, d.combined_vector(j, beta))


@lru_cache(maxsize=200_000)
def section_split(w: ReducedWord) -> SectionSplit:
    """Write w = (g_1, ..., g_p) a^eps_a(w) with each g_i a reduced word.

    Reading w left to right, a block B preceded by a-exponent s equals
    B^(a^-s) times a^s; the conjugate places B at coordinate m with
    m + s = spine and puts a-powers at the other coordinates.
    """
    d = w.datum
    p = d.p
    parts: list[list] = [[] for _ in range(p)]
    s = 0
    for j, beta in w.syllables:
        if j == 0:
            s += beta[0]
            continue
        lay = _block_layout(d, j, beta)
        for m in range(p):
            src = (m + s) % p
            e = lay[src]
            if e is None:
                _push(parts[m], (j, beta), p)
            elif e:
                _push(parts[m], (0, (e,)), p)
    return SectionSplit(tuple(ReducedWord._trusted(d, q) for q in parts), s % p)


@lru_cache(maxsize=200_000)
def is_identity(w: ReducedWord) -> bool:
    """Decide w = 1 in the group by recursion over first-level sections."""
    if epsilon_a(w):
        return False
    n = length(w)
    if n == 0:
        return True
    if n == 1:
        return False
    return all(is_identity(s) for s in section_split(w).sections)


def element_order(w: ReducedWord, cap: int = 5000) -> int | None:
    """Order of w, or None if the recursion does not settle within `cap` words.

    Elements fixing level 1 have the lcm of their section orders; otherwise
    the order is p times the order of w^p, itself the lcm over its sections.
    Section words may recur, so the recursion is solved as a least fixed
    point over the strongly connected components of the section graph.  A
    cycle passing through a multiplication by p means the order is not finite.
    """
    p = w.datum.p
    kind: dict = {}
    succ: dict = {}
    todo = [w]
    while todo:
        x = todo.pop()
        if x in kind:
            continue
        if len(kind) >= cap:
            return None
        if is_identity(x):
            kind[x], succ[x] = "one", ()
            continue
        if epsilon_a(x) == 0:
            kind[x] = "stab"
            parts = section_split(x).sections
        else:
            kind[x] = "root"
            parts = section_split(x ** p).sections
        succ[x] = tuple(dict.fromkeys(parts))
        todo.extend(succ[x])

    graph = nx.DiGraph()
    graph.add_nodes_from(kind)
    graph.add_edges_from((x, y) for x in succ for y in succ[x])
    cond = nx.condensation(graph)
    comp = cond.graph["mapping"]
    value: dict = {}
    for c in reversed(list(nx.topological_sort(cond))):
        members = cond.nodes[c]["members"]
        cyclic = len(members) > 1 or any(graph.has_edge(x, x) for x in members)
        if cyclic and any(kind[x] == "root" for x in members):
            return None
        acc = 1
        for x in members:
            for y in succ[x]:
                if comp[y] != c:
                    acc = math.lcm(acc, value[comp[y]])
        if not cyclic and kind[next(iter(members))] == "root":
            acc *= p
        value[c] = acc
    return value[comp[w]]


@lru_cache(maxsize=20_000)
def _syllable_portrait(d: GroupDatum, syl: Syllable, depth: int) -> core.Portrait:
    j, beta = syl
    if j == 0:
        return core.rooted(d.p, depth, beta[0])
    out = core.identity(d.p, depth)
    for i, k in enumerate(beta, start=1):
        if k:
            out = core.compose(out, core.power(core.generator_portrait(d, (j, i), depth), k))
    return out


def portrait(w: ReducedWord, depth: int) -> core.Portrait:
    """Depth-n portrait of w, as the product of generator portraits."""
    d = w.datum
    out = core.identity(d.p, depth)
    for syl in w.syllables:
        out = core.compose(out, _syllable_portrait(d, syl, depth))
    return out


def sections_product(split: SectionSplit, coords) -> ReducedWord:
    """Product of the sections at the given 1-based coordinates, in order."""
    out = empty(split.sections[0].datum)
    for m in coords:
        out = out * split.sections[m - 1]
    return out


# Text form ---------------------------------------------------------------

def format_word(w: ReducedWord) -> str:
    if not w.syllables:
        return "1"
    out = []
    for j, beta in w.syllables:
        if j == 0:
            out.append("a" if beta[0] == 1 else f"a^{beta[0]}")
            continue
        for i, k in enumerate(beta, start=1):
            if k:
                out.append(f"b{j}_{i}" if k == 1 else f"b{j}_{i}^{k}")
    return " ".join(out)


_TOKEN = re.compile(r"\s*(?:(\[)|(\])|(\()|(\))|(,)|(\^)|(-?\d+)|(a|b\d+_\d+))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise WordError(f"cannot parse word at {text[pos:]!r}")
        out.append(m.group(m.lastindex))
        pos = m.end()
    return out


def parse(d: GroupDatum, text: str) -> ReducedWord:
    """Parse a word such as "a b1_1^2 [a, b3_1] (b1_1)^a a^-1"; "1" is the identity."""
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take(expected=None):
        nonlocal pos
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise WordError(f"expected {expected or 'a token'} in {text!r}, got {tok!r}")
        pos += 1
        return tok

    def expr():
        out = empty(d)
        while peek() not in (None, "]", ")", ","):
            out = out * factor()
        return out

    def factor():
        x = primary()
        while peek() == "^":
            take("^")
            tok = peek()
            if tok is not None and re.fullmatch(r"-?\d+", tok):
                take()
                x = x ** int(tok)
            else:
                x = conjugate(x, primary())
        return x

    def primary():
        tok = take()
        if tok == "[":
            parts = [expr()]
            while peek() == ",":
                take(",")
                parts.append(expr())
            take("]")
            return commutator(*parts)
        if tok == "(":
            x = expr()
            take(")")
            return x
        if tok == "1":
            return empty(d)
        if tok == "a" or tok.startswith("b"):
            try:
                return gen(d, tok)
            except core.PortraitError as exc:
                raise WordError(str(exc)) from None
        raise WordError(f"unexpected token {tok!r} in {text!r}")

    w = expr()
    if pos != len(tokens):
        raise WordError(f"trailing input in {text!r}")
    return w


# Random words ------------------------------------------------------------

def random_block(rng, d: GroupDatum, j: int) -> Syllable:
    p = d.p
    while True:
        beta = tuple(rng.randrange(p) for _ in range(d.ranks[j - 1]))
        if any(beta):
            return (j, beta)


def random_word(rng, d: GroupDatum, n_blocks: int) -> ReducedWord:
    """A uniformly built reduced word with exactly n_blocks family blocks."""
    p = d.p
    fams = d.nonempty_families
    syl: list = []
    if rng.random() < 0.5:
        syl.append((0, (rng.randrange(1, p),)))
    prev = None
    for t in range(n_blocks):
        choices = [j for j in fams if j != prev]
        if t and (not choices or rng.random() < 0.6):
            syl.append((0, (rng.randrange(1, p),)))
            choices = list(fams)
        j = rng.choice(choices)
        syl.append(random_block(rng, d, j))
        prev = j
    if n_blocks and rng.random() < 0.5:
        syl.append((0, (rng.randrange(1, p),)))
    w = ReducedWord(d, syl)
    assert length(w) == n_blocks
    return w
