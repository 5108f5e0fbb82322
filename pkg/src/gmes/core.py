"""Truncated portraits of automorphisms of the p-adic rooted tree.

Vertices are addressed by tuples of letters in 1..p.  A portrait of depth n
stores, for every vertex of length < n, the exponent of the p-cycle
a = (1 2 ... p) applied below that vertex.  The group acts on the right:
(w x)^f = w^f x^{f(w)}, and products read left to right, u^{fg} = (u^f)^g.

Only nonzero labels are stored.  At level k the vertex x_1...x_k is keyed
by its lexicographic index sum (x_t - 1) p^(k-t).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .datum import GroupDatum

Address = tuple[int, ...]


class PortraitError(ValueError):
    pass


def parse_address(text: str, p: int) -> Address:
    text = text.strip()
    if text in ("", "()", "root"):
        return ()
    parts = text.split(".") if "." in text else list(text)
    try:
        u = tuple(int(x) for x in parts)
    except ValueError:
        raise PortraitError(f"bad vertex address {text!r}") from None
    if any(not 1 <= x <= p for x in u):
        raise PortraitError(f"letters of {text!r} must lie in 1..{p}")
    return u


def format_address(u: Address, p: int) -> str:
    sep = "" if p <= 9 else "."
    return sep.join(str(x) for x in u)


def address_index(u: Address, p: int) -> int:
    idx = 0
    for x in u:
        idx = idx * p + (x - 1)
    return idx


def index_address(idx: int, k: int, p: int) -> Address:
    out = []
    for _ in range(k):
        idx, r = divmod(idx, p)
        out.append(r + 1)
    return tuple(reversed(out))


@dataclass(frozen=True, eq=False)
class Portrait:
    p: int
    depth: int
    levels: tuple  # levels[k]: dict index -> nonzero label at level k

    def label(self, u: Address) -> int:
        if len(u) >= self.depth:
            raise PortraitError(f"vertex {u} not covered by depth {self.depth}")
        return self.levels[len(u)].get(address_index(u, self.p), 0)

    def items(self):
        """Nonzero labels as (address, label), level by level."""
        for k, lvl in enumerate(self.levels):
            for idx in sorted(lvl):
                yield index_address(idx, k, self.p), lvl[idx]

    def is_identity(self) -> bool:
        return not any(self.levels)

    def support_size(self) -> int:
        return sum(len(lvl) for lvl in self.levels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Portrait):
            return NotImplemented
        return self.p == other.p and self.depth == other.depth and self.levels == other.levels

    def __hash__(self) -> int:
        return hash((self.p, self.depth, tuple(frozenset(lvl.items()) for lvl in self.levels)))

    def __mul__(self, other: Portrait) -> Portrait:
        return compose(self, other)

    def __invert__(self) -> Portrait:
        return invert(self)

    def __repr__(self) -> str:
        labs = ", ".join(f"{format_address(u, self.p) or 'root'}:{x}" for u, x in self.items())
        return f"Portrait(p={self.p}, depth={self.depth}, {{{labs}}})"

    def to_json(self) -> dict:
        return {"p": self.p, "depth": self.depth,
                "labels": [[format_address(u, self.p), x] for u, x in self.items()]}

    @classmethod
    def from_json(cls, data: dict) -> Portrait:
        p, depth = data["p"], data["depth"]
        levels = [dict() for _ in range(depth)]
        for text, x in data["labels"]:
            u = parse_address(text, p)
            if len(u) >= depth:
                raise PortraitError(f"label at {text!r} beyond depth {depth}")
            if x % p:
                levels[len(u)][address_index(u, p)] = x % p
        return cls(p, depth, tuple(levels))


def from_labels(p: int, depth: int, labels: dict) -> Portrait:
    """Build a portrait from {address: label}; missing vertices get 0."""
    levels = [dict() for _ in range(depth)]
    for u, x in labels.items():
        u = tuple(u)
        if len(u) >= depth:
            raise PortraitError(f"vertex {u} beyond depth {depth}")
        if x % p:
            levels[len(u)][address_index(u, p)] = x % p
    return Portrait(p, depth, tuple(levels))


def identity(p: int, depth: int) -> Portrait:
    if depth < 0:
        raise PortraitError("depth must be non-negative")
    return Portrait(p, depth, tuple({} for _ in range(depth)))


def rooted(p: int, depth: int, exponent: int = 1) -> Portrait:
    """The power a^exponent of the rooted p-cycle."""
    if depth < 0:
        raise PortraitError("depth must be non-negative")
    levels = [{} for _ in range(depth)]
    if depth and exponent % p:
        levels[0][0] = exponent % p
    return Portrait(p, depth, tuple(levels))


def directed(d: GroupDatum, j: int, vector, depth: int) -> Portrait:
    """Directed automorphism of family j with the given defining vector."""
    if depth < 0:
        raise PortraitError("depth must be non-negative")
    p = d.p
    s = d.spine(j)
    lay = d.layout(j, vector)
    levels = [{} for _ in range(depth)]
    spine_idx = 0
    for k in range(depth - 1):
        for m in range(1, p + 1):
            if m != s and lay[m - 1]:
                levels[k + 1][spine_idx * p + m - 1] = lay[m - 1]
        spine_idx = spine_idx * p + s - 1
    return Portrait(p, depth, tuple(levels))


def parse_generator(d: GroupDatum, gen) -> tuple[int, int]:
    """Normalize a generator id: 'a' -> (0, 0), 'b<j>_<i>' or (j, i) -> (j, i)."""
    if gen == "a" or gen == (0, 0):
        return (0, 0)
    if isinstance(gen, str):
        body = gen[1:] if gen.startswith("b") else None
        try:
            j, i = (int(x) for x in body.split("_"))
        except (AttributeError, ValueError):
            raise PortraitError(f"unknown generator {gen!r}") from None
    else:
        j, i = gen
    if not (1 <= j <= d.p and 1 <= i <= d.ranks[j - 1]):
        raise PortraitError(f"unknown generator {gen!r}")
    return (j, i)


def generator_name(gen: tuple[int, int]) -> str:
    return "a" if gen == (0, 0) else f"b{gen[0]}_{gen[1]}"


@lru_cache(maxsize=4096)
def generator_portrait(d: GroupDatum, gen, depth: int) -> Portrait:
    j, i = parse_generator(d, gen)
    if j == 0:
        return rooted(d.p, depth, 1)
    return directed(d, j, d.vector(j, i), depth)


def _check_pair(f: Portrait, g: Portrait) -> None:
    if f.p != g.p or f.depth != g.depth:
        raise PortraitError(f"mismatched portraits: (p={f.p}, depth={f.depth}) vs (p={g.p}, depth={g.depth})")


def _digits(idx: int, k: int, p: int) -> list[int]:
    out = [0] * k
    for t in range(k - 1, -1, -1):
        idx, out[t] = divmod(idx, p)
    return out


def _image_index(f: Portrait, k: int, idx: int) -> int:
    p, levels = f.p, f.levels
    pre = out = 0
    for t, x in enumerate(_digits(idx, k, p)):
        lab = levels[t].get(pre, 0)
        pre = pre * p + x
        out = out * p + (x + lab) % p
    return out


def _preimage_index(f: Portrait, k: int, idx: int) -> int:
    p, levels = f.p, f.levels
    pre = 0
    for t, y in enumerate(_digits(idx, k, p)):
        pre = pre * p + (y - levels[t].get(pre, 0)) % p
    return pre


def compose(f: Portrait, g: Portrait) -> Portrait:
    """Product fg (first f, then g): (fg)(w) = f(w) + g(w^f)."""
    _check_pair(f, g)
    p = f.p
    levels = [dict(lvl) for lvl in f.levels]
    for k, lvl in enumerate(g.levels):
        out = levels[k]
        for idx, lab in lvl.items():
            w = _preimage_index(f, k, idx)
            x = (out.get(w, 0) + lab) % p
            if x:
                out[w] = x
            else:
                out.pop(w, None)
    return Portrait(p, f.depth, tuple(levels))


def invert(f: Portrait) -> Portrait:
    """(f^-1)(w) = -f(w^{f^-1})."""
    p = f.p
    levels = []
    for k, lvl in enumerate(f.levels):
        levels.append({_image_index(f, k, idx): (-lab) % p for idx, lab in lvl.items()})
    return Portrait(p, f.depth, tuple(levels))


def power(f: Portrait, k: int) -> Portrait:
    if k < 0:
        f, k = invert(f), -k
    out = identity(f.p, f.depth)
    base = f
    while k:
        if k & 1:
            out = compose(out, base)
        k >>= 1
        if k:
            base = compose(base, base)
    return out


def conjugate(f: Portrait, g: Portrait) -> Portrait:
    """f^g = g^-1 f g."""
    return compose(compose(invert(g), f), g)


def commutator(f: Portrait, g: Portrait) -> Portrait:
    """[f, g] = f^-1 g^-1 f g."""
    return compose(compose(invert(f), invert(g)), compose(f, g))


def act(f: Portrait, u: Address) -> Address:
    """Image u^f of the vertex u."""
    u = tuple(u)
    if len(u) > f.depth:
        raise PortraitError(f"address of length {len(u)} deeper than portrait depth {f.depth}")
    p = f.p
    out = []
    pre = 0
    for t, x in enumerate(u):
        lab = f.levels[t].get(pre, 0)
        out.append((x - 1 + lab) % p + 1)
        pre = pre * p + x - 1
    return tuple(out)


def act_inverse(f: Portrait, u: Address) -> Address:
    """Preimage of u under f, i.e. u^{f^-1}."""
    u = tuple(u)
    if len(u) > f.depth:
        raise PortraitError(f"address of length {len(u)} deeper than portrait depth {f.depth}")
    return index_address(_preimage_index(f, len(u), address_index(u, f.p)), len(u), f.p)


def fixes(f: Portrait, u: Address) -> bool:
    return act(f, u) == tuple(u)


def section(f: Portrait, u: Address) -> Portrait:
    """Restriction of f to the subtree below a vertex u that f fixes."""
    u = tuple(u)
    if len(u) > f.depth:
        raise PortraitError(f"address of length {len(u)} deeper than portrait depth {f.depth}")
    if not fixes(f, u):
        raise PortraitError(f"portrait does not fix vertex {u}")
    p, n = f.p, len(u)
    uidx = address_index(u, p)
    levels = []
    for k in range(n, f.depth):
        span = p ** (k - n)
        lo = uidx * span
        levels.append({idx - lo: lab for idx, lab in f.levels[k].items() if lo <= idx < lo + span})
    return Portrait(p, f.depth - n, tuple(levels))


def sections(f: Portrait) -> list[Portrait]:
    """The p first-level sections of f (requires f in the level-1 stabilizer)."""
    return [section(f, (x,)) for x in range(1, f.p + 1)]


def from_sections(parts, root: int = 0) -> Portrait:
    """Inverse of the first-level decomposition: the element (g_1,...,g_p) a^root."""
    parts = list(parts)
    p = len(parts)
    depth = parts[0].depth
    if any(q.p != p or q.depth != depth for q in parts):
        raise PortraitError("sections must share p and depth")
    levels = [{0: root % p} if root % p else {}]
    for k in range(depth):
        span = p ** k
        lvl = {}
        for x, q in enumerate(parts):
            for idx, lab in q.levels[k].items():
                lvl[x * span + idx] = lab
        levels.append(lvl)
    return Portrait(p, depth + 1, tuple(levels))


def truncate(f: Portrait, depth: int) -> Portrait:
    if depth > f.depth or depth < 0:
        raise PortraitError(f"cannot truncate depth {f.depth} to {depth}")
    return Portrait(f.p, depth, f.levels[:depth])


def fixes_level(f: Portrait, n: int) -> bool:
    """True if f acts trivially on all vertices of level n."""
    if n > f.depth:
        raise PortraitError(f"level {n} deeper than portrait depth {f.depth}")
    return not any(f.levels[:n])


def level_permutation(f: Portrait, m: int) -> np.ndarray:
    """Action on the p^m vertices of level m, as an array perm[x] = x^f."""
    if m > f.depth:
        raise PortraitError(f"level {m} deeper than portrait depth {f.depth}")
    p = f.p
    leaves = np.arange(p ** m, dtype=np.int64)
    out = np.zeros_like(leaves)
    for k in range(m):
        dense = np.zeros(p ** k, dtype=np.int64)
        for idx, lab in f.levels[k].items():
            dense[idx] = lab
        prefix = leaves // p ** (m - k)
        digit = (leaves // p ** (m - k - 1)) % p
        out = out * p + (digit + dense[prefix]) % p
    return out
