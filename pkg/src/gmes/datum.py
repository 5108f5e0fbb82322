"""Defining data for groups generated by a rooted automorphism and families of
directed automorphisms on the p-adic tree."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property

from .fp import inverse_mod, rank, row_reduce


class DatumError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


Vector = tuple[int, ...]


@dataclass(frozen=True)
class GroupDatum:
    """A prime p and p families of defining vectors in (Z/p)^(p-1).

    Family j (1-based) consists of directed generators b<j>_<i> whose spine
    passes through the level-1 vertex p-j+1.
    """

    p: int
    families: tuple[tuple[Vector, ...], ...]

    @cached_property
    def ranks(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.families)

    @cached_property
    def generators(self) -> tuple[tuple[int, int], ...]:
        """Directed generators as (family, index) pairs, both 1-based."""
        return tuple((j, i) for j in range(1, self.p + 1)
                     for i in range(1, self.ranks[j - 1] + 1))

    @cached_property
    def nonempty_families(self) -> tuple[int, ...]:
        return tuple(j for j in range(1, self.p + 1) if self.ranks[j - 1])

    def family(self, j: int) -> tuple[Vector, ...]:
        return self.families[j - 1]

    def vector(self, j: int, i: int) -> Vector:
        return self.families[j - 1][i - 1]

    def spine(self, j: int) -> int:
        """Level-1 coordinate carrying the spine of family j."""
        return self.p - j + 1

    def layout(self, j: int, vector) -> tuple[int | None, ...]:
        """a-exponents placed at the p level-1 coordinates by a directed element
        of family j with the given (combined) defining vector; None marks the
        spine coordinate."""
        p, s = self.p, self.spine(j)
        out = []
        for m in range(1, p + 1):
            if m < s:
                out.append(vector[j + m - 2] % p)
            elif m == s:
                out.append(None)
            else:
                out.append(vector[m - s - 1] % p)
        return tuple(out)

    def combined_vector(self, j: int, beta) -> Vector:
        """Defining vector of the product of b<j>_i^beta_i."""
        p = self.p
        acc = [0] * (p - 1)
        for coeff, vec in zip(beta, self.family(j)):
            for t in range(p - 1):
                acc[t] = (acc[t] + coeff * vec[t]) % p
        return tuple(acc)

    @property
    def designated_family(self) -> int:
        return self.nonempty_families[0]

    def to_json(self) -> dict:
        return {"p": self.p, "families": [[list(v) for v in f] for f in self.families]}

    def fingerprint(self) -> str:
        text = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def __repr__(self) -> str:
        fams = {j: list(self.family(j)) for j in self.nonempty_families}
        return f"GroupDatum(p={self.p}, families={fams})"


def validate(raw) -> GroupDatum:
    """Check a raw datum (a dict as read from JSON) and build a GroupDatum."""
    if isinstance(raw, GroupDatum):
        raw = raw.to_json()
    if not isinstance(raw, dict) or "p" not in raw or "families" not in raw:
        raise DatumError("datum must have keys 'p' and 'families'")
    p = raw["p"]
    if not isinstance(p, int) or isinstance(p, bool) or p < 3 or not is_prime(p):
        raise DatumError("p must be an odd prime")
    fams = raw["families"]
    if not isinstance(fams, (list, tuple)) or len(fams) != p:
        raise DatumError(f"expected {p} families, got {len(fams) if isinstance(fams, (list, tuple)) else fams!r}")
    families = []
    for j, fam in enumerate(fams, start=1):
        if len(fam) > p - 1:
            raise DatumError(f"family {j} has {len(fam)} vectors, at most {p - 1} allowed")
        vecs = []
        for vec in fam:
            if len(vec) != p - 1 or not all(isinstance(x, int) for x in vec):
                raise DatumError(f"family {j}: vectors must be {p - 1} integers, got {vec!r}")
            vecs.append(tuple(x % p for x in vec))
        if vecs and rank(vecs, p) < len(vecs):
            raise DatumError(f"family {j}: defining vectors are linearly dependent mod {p}")
        families.append(tuple(vecs))
    if not any(families):
        raise DatumError("all families are empty")
    return GroupDatum(p, tuple(families))


def load(path) -> GroupDatum:
    with open(path) as fh:
        return validate(json.load(fh))


def make(p: int, families: dict[int, list]) -> GroupDatum:
    """Convenience constructor: families given as {j: [vector, ...]}."""
    return validate({"p": p, "families": [families.get(j, []) for j in range(1, p + 1)]})


def ggs(e) -> GroupDatum:
    """GGS datum: one directed generator in family 1."""
    e = list(e)
    return make(len(e) + 1, {1: [e]})


def is_constant(vec) -> bool:
    return len(set(vec)) == 1


def is_symmetric(vec) -> bool:
    n = len(vec)
    return all(vec[i] == vec[n - 1 - i] for i in range(n))


@dataclass(frozen=True)
class Classification:
    standard_form_valid: bool
    in_C_reg: bool
    torsion_criterion: bool
    condition_i_nonsymmetric: bool
    condition_ii_shared_vector: bool
    contains_generalised_GS: bool
    n: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def first_nonzero_n(vec) -> int:
    """Largest 1-based index with a nonzero entry."""
    return max((t + 1 for t, x in enumerate(vec) if x), default=0)


def classify(d: GroupDatum, family: int | None = None) -> Classification:
    p = d.p
    nonempty = [d.family(j) for j in d.nonempty_families]
    all_vectors = [v for f in nonempty for v in f]
    shared = False
    seen: dict[Vector, int] = {}
    for j in d.nonempty_families:
        for v in d.family(j):
            if v in seen and seen[v] != j:
                shared = True
            seen.setdefault(v, j)
    perm = set(range(1, p))
    try:
        n = first_nonzero_n(normalize_first_generator(d, family).vector(family or d.designated_family, 1))
    except DatumError:
        n = first_nonzero_n(d.vector(family or d.designated_family, 1))
    return Classification(
        standard_form_valid=True,
        in_C_reg=all(any(not is_constant(v) for v in f) for f in nonempty),
        torsion_criterion=all(sum(v) % p == 0 for v in all_vectors),
        condition_i_nonsymmetric=all(any(not is_symmetric(v) for v in f) for f in nonempty),
        condition_ii_shared_vector=shared,
        contains_generalised_GS=any(set(v) == perm for v in all_vectors),
        n=n,
    )


def _replace_family(d: GroupDatum, j: int, vectors) -> GroupDatum:
    fams = list(d.families)
    fams[j - 1] = tuple(tuple(x % d.p for x in v) for v in vectors)
    return validate(GroupDatum(d.p, tuple(fams)))


def normalize_first_generator(d: GroupDatum, family: int | None = None) -> GroupDatum:
    """Make e_{1,1} = 1 in the designated family by reordering the family and
    replacing the first generator by a power of itself."""
    j = family or d.designated_family
    fam = list(d.family(j))
    if not fam:
        raise DatumError(f"family {j} is empty")
    idx = next((i for i, v in enumerate(fam) if v[0] % d.p), None)
    if idx is None:
        raise DatumError(f"family {j}: first coordinate vanishes on every defining vector")
    first = fam.pop(idx)
    k = inverse_mod(first[0], d.p)
    fam.insert(0, tuple(k * x for x in first))
    return _replace_family(d, j, fam)


def normalize_family(d: GroupDatum, j: int) -> GroupDatum:
    """Basis change inside family j giving every vector first entry 1.

    Uses the reduced echelon basis, then adds the first vector to the others
    as needed.  Raises DatumError when the first column is zero.
    """
    p = d.p
    fam = d.family(j)
    if not fam:
        raise DatumError(f"family {j} is empty")
    rref, pivots = row_reduce(fam, p)
    if not pivots or pivots[0] != 0:
        raise DatumError(f"family {j}: first coordinate vanishes on every defining vector")
    rows = [tuple(int(x) for x in r) for r in rref]
    out = [rows[0]]
    for r in rows[1:]:
        c = (1 - r[0]) % p
        out.append(tuple((x + c * y) % p for x, y in zip(r, rows[0])))
    return _replace_family(d, j, out)
