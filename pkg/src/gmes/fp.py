"""Small linear algebra helpers over the prime field F_p."""

import numpy as np


def inverse_mod(x: int, p: int) -> int:
    x %= p
    if x == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(x, -1, p)


def row_reduce(rows, p: int):
    """Reduced row echelon form of an integer matrix mod p.

    Returns (rref, pivots) where rref keeps only the nonzero rows.
    """
    m = np.array(rows, dtype=np.int64) % p
    if m.ndim == 1:
        m = m.reshape(1, -1)
    nrows, ncols = m.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if len(nz) == 0:
            continue
        k = r + nz[0]
        if k != r:
            m[[r, k]] = m[[k, r]]
        m[r] = (m[r] * inverse_mod(int(m[r, c]), p)) % p
        others = np.nonzero(m[:, c])[0]
        for i in others:
            if i != r:
                m[i] = (m[i] - m[i, c] * m[r]) % p
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows, p: int) -> int:
    if len(rows) == 0:
        return 0
    return len(row_reduce(rows, p)[1])


class Span:
    """Row space of a set of vectors over F_p, with fast membership."""

    def __init__(self, vectors, p: int, width: int | None = None):
        self.p = p
        vectors = list(vectors)
        if vectors:
            self.basis, self.pivots = row_reduce(np.array(vectors), p)
            self.width = self.basis.shape[1]
        else:
            self.width = width or 0
            self.basis = np.zeros((0, self.width), dtype=np.int64)
            self.pivots = []

    @property
    def dimension(self) -> int:
        return len(self.pivots)

    def __contains__(self, vector) -> bool:
        v = np.asarray(vector, dtype=np.int64).ravel() % self.p
        for row, c in zip(self.basis, self.pivots):
            if v[c]:
                v = (v - v[c] * row) % self.p
        return not v.any()


def solve(vectors, target, p: int):
    """Coefficients c with sum c_i vectors_i = target mod p, or None."""
    vectors = [list(v) for v in vectors]
    if not vectors:
        return [] if not any(x % p for x in target) else None
    aug = np.column_stack([np.array(vectors, dtype=np.int64).T, np.array(target, dtype=np.int64)])
    rref, pivots = row_reduce(aug, p)
    k = len(vectors)
    if k in pivots:
        return None
    coeffs = [0] * k
    for row, c in zip(rref, pivots):
        coeffs[c] = int(row[k])
    return coeffs
