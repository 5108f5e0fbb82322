"""Level-n truncations of the tree algebra over F_p.

An element of level n is a p^n x p^n matrix acting on the right of the free
F_p-space on the level-n vertices (lexicographic basis).  A group element g
maps the basis vector u to u^g, so chi(g)[u, u^g] = 1 and chi(gh) =
chi(g) chi(h).  The p x p block grid of a level-n matrix (blocks of size
p^(n-1), indexed by the first letter of the vertex) is the matrix form of the
embedding into Mat_p: a maps to the cyclic shift with 1 at block (x, x+1),
and an element of Stab(1) with sections (c_1, ..., c_p) maps to diag(c_x).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import core
from . import words as W
from .datum import GroupDatum
from .fp import Span

SPARSE_FROM = 128
FAMILY_RANK_LIMIT = 3


class AlgebraError(ValueError):
    pass


def _clean(mat, p: int):
    if sp.issparse(mat):
        mat = sp.csr_matrix(mat, dtype=np.int64)
        mat.data %= p
        mat.eliminate_zeros()
        return mat
    return np.asarray(mat, dtype=np.int64) % p


class AlgebraElement:
    """A p^n x p^n matrix over F_p; sparse from SPARSE_FROM rows on."""

    __slots__ = ("p", "level", "mat")

    def __init__(self, p: int, level: int, mat):
        self.p = p
        self.level = level
        dim = p ** level
        if dim >= SPARSE_FROM:
            mat = sp.csr_matrix(mat) if not sp.issparse(mat) else mat
        elif sp.issparse(mat):
            mat = mat.toarray()
        if mat.shape != (dim, dim):
            raise AlgebraError(f"level-{level} element needs shape {(dim, dim)}, got {mat.shape}")
        self.mat = _clean(mat, p)

    @classmethod
    def identity(cls, p: int, level: int) -> AlgebraElement:
        return cls(p, level, sp.identity(p ** level, dtype=np.int64, format="csr"))

    @classmethod
    def zero(cls, p: int, level: int) -> AlgebraElement:
        return cls(p, level, sp.csr_matrix((p ** level, p ** level), dtype=np.int64))

    @property
    def dim(self) -> int:
        return self.p ** self.level

    def dense(self) -> np.ndarray:
        return self.mat.toarray() if sp.issparse(self.mat) else self.mat

    def _check(self, other: AlgebraElement) -> None:
        if self.p != other.p or self.level != other.level:
            raise AlgebraError(f"mismatched elements: level {self.level} vs {other.level}")

    def __add__(self, other):
        if isinstance(other, int):
            other = other * AlgebraElement.identity(self.p, self.level)
        self._check(other)
        return AlgebraElement(self.p, self.level, self.mat + other.mat)

    __radd__ = __add__

    def __neg__(self) -> AlgebraElement:
        return AlgebraElement(self.p, self.level, -self.mat)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return AlgebraElement(self.p, self.level, self.mat * int(other))
        self._check(other)
        return AlgebraElement(self.p, self.level, self.mat @ other.mat)

    def __rmul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self * other
        return NotImplemented

    def __pow__(self, k: int) -> AlgebraElement:
        if k < 0:
            raise AlgebraError("negative powers need inverse()")
        out = AlgebraElement.identity(self.p, self.level)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def is_zero(self) -> bool:
        return self.mat.nnz == 0 if sp.issparse(self.mat) else not self.mat.any()

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, np.integer)):
            other = int(other) * AlgebraElement.identity(self.p, self.level)
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.p == other.p and self.level == other.level and (self - other).is_zero()

    __hash__ = None

    def is_scalar(self) -> bool:
        m = self.dense()
        return bool((m == m[0, 0] * np.eye(self.dim, dtype=np.int64)).all())

    def inverse(self) -> AlgebraElement:
        """Inverse of 1 + z for z in the augmentation ideal, by the finite
        Neumann series; raises when the series does not terminate."""
        z = self - 1
        out = AlgebraElement.identity(self.p, self.level)
        term = out
        for _ in range(self.dim + 1):
            term = -(term * z)
            if term.is_zero():
                if not (out * self == 1):
                    raise AlgebraError("Neumann series did not produce an inverse")
                return out
            out = out + term
        raise AlgebraError("element is not 1 plus a nilpotent")

    def to_triplets(self) -> dict:
        coo = sp.coo_matrix(self.mat)
        return {"p": self.p, "level": self.level, "shape": [self.dim, self.dim],
                "entries": [[int(i), int(j), int(x)] for i, j, x in zip(coo.row, coo.col, coo.data)]}

    @classmethod
    def from_triplets(cls, data: dict) -> AlgebraElement:
        dim = data["shape"][0]
        rows, cols, vals = zip(*data["entries"]) if data["entries"] else ((), (), ())
        mat = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=np.int64)
        return cls(data["p"], data["level"], mat)

    def __repr__(self) -> str:
        return f"AlgebraElement(p={self.p}, level={self.level}, nnz={sp.csr_matrix(self.mat).nnz})"


# Group elements --------------------------------------------------------------

def permutation_matrix(perm: np.ndarray, p: int, level: int) -> AlgebraElement:
    n = len(perm)
    mat = sp.csr_matrix((np.ones(n, dtype=np.int64), (np.arange(n), perm)), shape=(n, n))
    return AlgebraElement(p, level, mat)


def chi(x, n: int, d: GroupDatum | None = None) -> AlgebraElement:
    """Image of a word, portrait, or generator id at level n."""
    if isinstance(x, (str, tuple)):
        x = W.gen(d, x)
    if isinstance(x, W.ReducedWord):
        x = W.portrait(x, n)
    if not isinstance(x, core.Portrait):
        raise TypeError(f"cannot map {type(x).__name__} into the algebra")
    if x.depth < n:
        raise AlgebraError(f"portrait depth {x.depth} below level {n}")
    return permutation_matrix(core.level_permutation(x, n), x.p, n)


def a_star(d: GroupDatum, n: int) -> AlgebraElement:
    """1 + a + ... + a^(p-1) at level n."""
    a = chi("a", n, d)
    out = AlgebraElement.identity(d.p, n)
    power = out
    for _ in range(d.p - 1):
        power = power * a
        out = out + power
    return out


def b_star(d: GroupDatum, gen, n: int) -> AlgebraElement:
    """1 + b + ... + b^(p-1) at level n for a directed generator b."""
    if core.parse_generator(d, gen)[0] == 0:
        raise AlgebraError("b_star needs a directed generator")
    b = chi(gen, n, d)
    out = AlgebraElement.identity(d.p, n)
    power = out
    for _ in range(d.p - 1):
        power = power * b
        out = out + power
    return out


def replicate(v: AlgebraElement, k: int = 1) -> AlgebraElement:
    """v^[k]: v placed diagonally at every vertex of level k."""
    p = v.p
    mat = sp.kron(sp.identity(p ** k, dtype=np.int64, format="csr"), sp.csr_matrix(v.mat), format="csr")
    return AlgebraElement(p, v.level + k, mat)


def truncate(v: AlgebraElement) -> AlgebraElement:
    """Image at level n-1: row of each vertex's first child, columns summed
    over siblings.  An algebra map on images of group-algebra elements."""
    if v.level < 1:
        raise AlgebraError("level 0 has no truncation")
    p = v.p
    m = sp.csr_matrix(v.mat)[::p, :]
    n = v.dim
    fold = sp.csr_matrix((np.ones(n, dtype=np.int64), (np.arange(n), np.arange(n) // p)), shape=(n, n // p))
    return AlgebraElement(p, v.level - 1, m @ fold)


# Block structure ------------------------------------------------------------

def blocks(v: AlgebraElement) -> list[list[AlgebraElement]]:
    """The p x p grid of level-(n-1) blocks; this is the embedding into Mat_p."""
    if v.level < 1:
        raise AlgebraError("level 0 elements have no block structure")
    p, s = v.p, v.p ** (v.level - 1)
    m = sp.csr_matrix(v.mat)
    return [[AlgebraElement(p, v.level - 1, m[x * s:(x + 1) * s, y * s:(y + 1) * s]) for y in range(p)]
            for x in range(p)]


def from_blocks(grid) -> AlgebraElement:
    p = len(grid)
    level = grid[0][0].level + 1
    mat = sp.bmat([[sp.csr_matrix(b.mat) for b in row] for row in grid], format="csr")
    return AlgebraElement(p, level, mat)


phi_embed = blocks


def block_product(g1, g2):
    p = len(g1)
    out = []
    for x in range(p):
        row = []
        for y in range(p):
            acc = AlgebraElement.zero(g1[0][0].p, g1[0][0].level)
            for z in range(p):
                acc = acc + g1[x][z] * g2[z][y]
            row.append(acc)
        out.append(row)
    return out


def block_diagonal(parts) -> AlgebraElement:
    p = len(parts)
    zero = AlgebraElement.zero(parts[0].p, parts[0].level)
    return from_blocks([[parts[x] if x == y else zero for y in range(p)] for x in range(p)])


@dataclass
class WreathDecomposition:
    """v = sum_i D_i chi(a)^i with D_i = diag(parts[i][0], ..., parts[i][p-1])."""

    parts: list[list[AlgebraElement]]

    def component(self, i: int) -> AlgebraElement:
        return block_diagonal(self.parts[i])

    def reassemble(self) -> AlgebraElement:
        p = len(self.parts)
        grid = [[self.parts[(y - x) % p][x] for y in range(p)] for x in range(p)]
        return from_blocks(grid)


def wreath_decompose(v: AlgebraElement) -> WreathDecomposition:
    p = v.p
    grid = blocks(v)
    dec = WreathDecomposition([[grid[x][(x + i) % p] for x in range(p)] for i in range(p)])
    if dec.reassemble() != v:
        raise AlgebraError("wreath decomposition does not reassemble")
    return dec


# Depth -------------------------------------------------------------------------

def _family_span(d: GroupDatum, j: int, n: int) -> Span:
    """F_p-span of the level-n images of all elements of <b^(j)>."""
    r = d.ranks[j - 1]
    if r > FAMILY_RANK_LIMIT:
        raise AlgebraError(f"family {j} has rank {r} > {FAMILY_RANK_LIMIT}; span enumeration refused")
    vecs = []
    for beta in itertools.product(range(d.p), repeat=r):
        w = W.ReducedWord(d, [(j, beta)])
        vecs.append(chi(w, n).dense().ravel())
    return Span(vecs, d.p)


class DepthCalculator:
    """Depth of algebra elements, caching family spans per level."""

    def __init__(self, d: GroupDatum):
        self.d = d
        self._spans: dict = {}

    def spans(self, n: int) -> list[Span]:
        if n not in self._spans:
            self._spans[n] = [_family_span(self.d, j, n) for j in self.d.nonempty_families]
        return self._spans[n]

    def in_base(self, D: AlgebraElement) -> bool:
        vec = D.dense().ravel()
        return any(vec in s for s in self.spans(D.level))

    def __call__(self, v: AlgebraElement) -> int:
        if v.level == 0:
            return 0
        dec = wreath_decompose(v)
        best = 0
        for i in range(v.p):
            if self.in_base(dec.component(i)):
                continue
            for part in dec.parts[i]:
                best = max(best, self(part) + 1)
        return best


def depth(v: AlgebraElement, d: GroupDatum) -> int:
    return DepthCalculator(d)(v)


# Identity checks ----------------------------------------------------------------

def conjugation_identity(v_parts, d: GroupDatum) -> bool:
    """a_* (v_1, ..., v_p) a_* == (v_1 + ... + v_p)^[1] a_*."""
    n = v_parts[0].level + 1
    astar = a_star(d, n)
    total = v_parts[0]
    for part in v_parts[1:]:
        total = total + part
    return astar * block_diagonal(v_parts) * astar == replicate(total) * astar


def phi_multiplicative(u: AlgebraElement, v: AlgebraElement) -> bool:
    grid = block_product(phi_embed(u), phi_embed(v))
    return from_blocks(grid) == u * v


def random_element(rng: random.Random, d: GroupDatum, n: int, terms: int = 4, max_blocks: int = 4) -> AlgebraElement:
    """Random F_p-combination of images of random words."""
    out = AlgebraElement.zero(d.p, n)
    for _ in range(terms):
        w = W.random_word(rng, d, rng.randint(0, max_blocks))
        out = out + rng.randrange(1, d.p) * chi(w, n)
    return out


def designated_generator(d: GroupDatum):
    j = d.designated_family
    return (j, 1)


def _epsilons(d: GroupDatum, gen) -> list[int]:
    """1 at the non-spine coordinates where b has a nontrivial a-power."""
    lay = d.layout(gen[0], d.vector(*gen))
    return [0 if e is None else int(bool(e)) for e in lay]


@dataclass
class Report:
    name: str
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    skipped: str | None = None

    @property
    def passed(self) -> bool:
        return self.skipped is None and all(ok for _, ok in self.checks)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "skipped": self.skipped, "info": self.info,
                "checks": [{"check": c, "passed": ok} for c, ok in self.checks]}


def astar_check(d: GroupDatum, n: int, gen=None) -> Report:
    gen = gen or designated_generator(d)
    rep = Report("astar-check", info={"level": n, "generator": core.generator_name(gen)})
    astar, bstar = a_star(d, n), b_star(d, gen, n)
    rep.checks.append(("a_*^2 = 0", (astar * astar).is_zero()))
    rep.checks.append(("b_*^2 = 0", (bstar * bstar).is_zero()))
    if n >= 1:
        eps = _epsilons(d, gen)
        s = d.spine(gen[0])
        low = a_star(d, n - 1)
        parts = [b_star(d, gen, n - 1) if x == s else eps[x - 1] * low for x in range(1, d.p + 1)]
        rep.checks.append(("b_* = (eps_1 a_*, ..., b_*, ...)", block_diagonal(parts) == bstar))
    return rep


def x_power_check(d: GroupDatum, n: int, max_j: int, gen=None) -> Report:
    """X^(2j-1) and X^(2j) against their block formulas, X = b_* a_*, Y = a_* b_*."""
    gen = gen or designated_generator(d)
    p = d.p
    N = sum(1 for e in d.vector(*gen) if e % p)
    rep = Report("x-power-check", info={"level": n, "max_j": max_j, "N": N,
                                        "generator": core.generator_name(gen)})
    if N % p == 0:
        rep.skipped = f"N = {N} vanishes mod {p}"
        return rep
    if n < 2:
        raise AlgebraError("x_power_check needs level >= 2")
    eps = _epsilons(d, gen)
    s = d.spine(gen[0])
    X = b_star(d, gen, n) * a_star(d, n)
    al, bl = a_star(d, n - 1), b_star(d, gen, n - 1)
    Xl, Yl = bl * al, al * bl
    astar = a_star(d, n)
    for j in range(1, max_j + 1):
        scale = pow(N, j - 1, p)
        odd = [Xl ** (j - 1) * bl if x == s else eps[x - 1] * (Yl ** (j - 1) * al) for x in range(1, p + 1)]
        even = [N * Xl ** j if x == s else eps[x - 1] * Yl ** j for x in range(1, p + 1)]
        rep.checks.append((f"X^{2 * j - 1}", X ** (2 * j - 1) == scale * (block_diagonal(odd) * astar)))
        rep.checks.append((f"X^{2 * j}", X ** (2 * j) == scale * (block_diagonal(even) * astar)))
    return rep


@dataclass(frozen=True)
class NotNilpotentWithin:
    bound: int


def nilpotency_index(v: AlgebraElement, bound: int | None = None):
    """Least k <= bound with v^k = 0; the default bound p^n decides."""
    bound = v.dim if bound is None else bound
    power = v
    for k in range(1, bound + 1):
        if power.is_zero():
            return k
        power = power * v
    return NotNilpotentWithin(bound)


def _block_diagonal_factor(m: AlgebraElement) -> AlgebraElement | None:
    """rho block-diagonal with rho a_* = m, or None if the block columns of m differ."""
    grid = blocks(m)
    p = m.p
    for row in grid:
        if any(row[y] != row[0] for y in range(1, p)):
            return None
    return block_diagonal([grid[x][x] for x in range(p)])


def _gs_generator(d: GroupDatum):
    for g in d.generators:
        if g[0] == 1 and {x % d.p for x in d.vector(*g)} == set(range(1, d.p)):
            return g
    return None


def rho_identity_check(d: GroupDatum, n: int, gen=None, depth_series: bool = True,
                       enforce: bool = True) -> Report:
    """Identities for eta = 1 + b a_* and mu = 1 + b^-1 a_* at level n.

    Writes eta^-1 = 1 - rho a_* and mu^-1 = 1 - sigma a_* with rho, sigma
    block-diagonal, then checks
      rho (b + a_*)^[1] = b,
      rho = b (mu^-1)^[1] (b^-1)^[1]   and   sigma = b^-1 (eta^-1)^[1] b^[1],
      rho = b (b^-1)^[1] - b (b^-1)^[1] (eta^-1)^[2] b^[2] a_*^[1] (b^-1)^[1],
    and the block formula for phi(a^c b^-1 (1 - (eta^-1 b)^[1] a_* b^-1)).
    """
    if n < 2:
        raise AlgebraError("rho_identity_check needs level >= 2")
    gen = gen or _gs_generator(d)
    if enforce and (gen is None or gen[0] != 1 or {x % d.p for x in d.vector(*gen)} != set(range(1, d.p))):
        raise AlgebraError("needs a family-1 generator whose vector is a permutation of 1..p-1")
    gen = gen or designated_generator(d)
    p = d.p
    e = d.vector(*gen)
    rep = Report("rho-check", info={"level": n, "generator": core.generator_name(gen)})

    def b(k):
        return chi(gen, k, d)

    def binv(k):
        return chi(W.gen(d, gen, -1), k, d)

    def eta_inv(k):
        return (1 + b(k) * a_star(d, k)).inverse()

    def mu_inv(k):
        return (1 + binv(k) * a_star(d, k)).inverse()

    eta = 1 + b(n) * a_star(d, n)
    einv = eta.inverse()
    rep.checks.append(("eta eta^-1 = 1", eta * einv == 1))
    rho = _block_diagonal_factor(1 - einv)
    sigma = _block_diagonal_factor(1 - mu_inv(n))
    rep.checks.append(("1 - eta^-1 has equal block columns", rho is not None))
    rep.checks.append(("1 - mu^-1 has equal block columns", sigma is not None))
    if rho is None or sigma is None:
        return rep
    astar = a_star(d, n)
    rep.checks.append(("eta^-1 = 1 - rho a_*", einv == 1 - rho * astar))
    ba = b(n) * astar
    series, term = AlgebraElement.zero(p, n), b(n)
    while not term.is_zero():
        series = series + term
        term = -(ba * term)
    rep.checks.append(("series sum (-1)^(k-1) (b a_*)^(k-1) b times a_* equals rho a_*",
                       series * astar == rho * astar))
    rep.checks.append(("rho (b + a_*)^[1] = b",
                       rho * replicate(b(n - 1) + a_star(d, n - 1)) == b(n)))
    rep.checks.append(("sigma (b^-1 + a_*)^[1] = b^-1",
                       sigma * replicate(binv(n - 1) + a_star(d, n - 1)) == binv(n)))
    rep.checks.append(("rho = b (1 - sigma a_*)^[1] (b^-1)^[1]",
                       rho == b(n) * replicate(mu_inv(n - 1)) * replicate(binv(n - 1))))
    rep.checks.append(("sigma = b^-1 (1 - rho a_*)^[1] b^[1]",
                       sigma == binv(n) * replicate(eta_inv(n - 1)) * replicate(b(n - 1))))
    lead = b(n) * replicate(binv(n - 1))
    rhs = lead - lead * replicate(eta_inv(n - 2), 2) * replicate(b(n - 2), 2) \
        * replicate(a_star(d, n - 1)) * replicate(binv(n - 1))
    rep.checks.append(("rho equation", rho == rhs))

    # beta_x = a^-e_x for x < p and beta_p = b^-1, all at level n-1
    beta = [chi(W.gen(d, "a", -e[x] % p), n - 1) for x in range(p - 1)] + [binv(n - 1)]
    core_term = eta_inv(n - 1) * b(n - 1)
    for j in range(2, p + 1):
        c = e[p - j] % p
        E = chi(W.gen(d, "a", c), n) * binv(n) * (1 - replicate(eta_inv(n - 1) * b(n - 1)) * astar * binv(n))
        grid = blocks(E)
        ok = True
        for x in range(p):
            bx = beta[(x + c) % p]
            for y in range(p):
                want = -(bx * core_term * beta[y])
                if y == (x + c) % p:
                    want = want + bx
                ok = ok and grid[x][y] == want
        rep.checks.append((f"phi display for j = {j}", ok))
        rep.checks.append((f"display for j = {j} is not scalar", not E.is_scalar()))
    if depth_series:
        rep.info["depth_rho"] = DepthCalculator(d)(rho)
    return rep


def phi_check(d: GroupDatum, n: int, pairs: int = 50, seed: int = 0) -> Report:
    rng = random.Random(seed)
    rep = Report("phi-check", info={"level": n, "pairs": pairs, "seed": seed})
    a = chi("a", n, d)
    grid = phi_embed(a)
    shift = all((grid[x][y] == 1) == (y == (x + 1) % d.p) and (grid[x][y] == 1 or grid[x][y].is_zero())
                for x in range(d.p) for y in range(d.p))
    rep.checks.append(("phi(a) is the cyclic block matrix", shift))
    ok = all(phi_multiplicative(random_element(rng, d, n), random_element(rng, d, n)) for _ in range(pairs))
    rep.checks.append((f"phi multiplicative on {pairs} random pairs", ok))
    return rep


def conjugation_check(d: GroupDatum, n: int, samples: int = 100, seed: int = 0) -> Report:
    rng = random.Random(seed)
    rep = Report("conjugation-check", info={"level": n, "samples": samples, "seed": seed})
    ok = all(conjugation_identity([random_element(rng, d, n - 1) for _ in range(d.p)], d) for _ in range(samples))
    rep.checks.append((f"a_* v a_* = (sum v_x)^[1] a_* on {samples} samples", ok))
    return rep


def nilindex_report(d: GroupDatum, n: int, gen=None) -> Report:
    gen = gen or designated_generator(d)
    X = b_star(d, gen, n) * a_star(d, n)
    k = nilpotency_index(X)
    rep = Report("nilindex", info={"level": n, "generator": core.generator_name(gen),
                                   "nilpotency_index": k if isinstance(k, int) else None})
    rep.checks.append(("X = b_* a_* is nilpotent", isinstance(k, int)))
    return rep


__all__ = [
    "AlgebraElement", "AlgebraError", "DepthCalculator", "NotNilpotentWithin", "Report", "WreathDecomposition",
    "a_star", "astar_check", "truncate", "b_star", "block_diagonal", "block_product", "blocks", "chi", "conjugation_check",
    "conjugation_identity", "depth", "from_blocks", "nilindex_report", "nilpotency_index",
    "phi_check", "phi_embed", "phi_multiplicative", "random_element", "replicate", "rho_identity_check",
    "wreath_decompose", "x_power_check",
]
