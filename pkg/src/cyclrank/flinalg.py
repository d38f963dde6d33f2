"""Exact linear algebra over the prime field F_l.

Entries are stored as machine integers in [0, l); the modulus is kept
once per matrix.  Echelon forms always use the first nonzero pivot in
column order, so kernel bases are canonical and subspaces compare by
equality of their (reduced) basis rows.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass, field

# All experiments use small moduli; a hard cap keeps scalar arithmetic
# in machine words on every platform.
MAX_MODULUS = 97

_SMALL_PRIMES = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
                 53, 59, 61, 67, 71, 73, 79, 83, 89, 97}


def check_modulus(l: int) -> int:
    if l not in _SMALL_PRIMES or l == 2 or l > MAX_MODULUS:
        raise ValueError(f"modulus must be an odd prime <= {MAX_MODULUS}, got {l}")
    return l


@dataclass(frozen=True)
class FlScalar:
    """A residue in F_l."""

    value: int
    modulus: int

    def __post_init__(self):
        check_modulus(self.modulus)
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"value {self.value} not reduced mod {self.modulus}")


class FlMatrix:
    """Dense matrix over F_l with row-major integer entries."""

    __slots__ = ("l", "rows", "cols", "data")

    def __init__(self, l: int, rows: int, cols: int, data: list[int]):
        check_modulus(l)
        if len(data) != rows * cols:
            raise ValueError("entry count does not match shape")
        self.l = l
        self.rows = rows
        self.cols = cols
        self.data = [x % l for x in data]

    @classmethod
    def from_rows(cls, l: int, rows: list[list[int]]) -> "FlMatrix":
        r = len(rows)
        c = len(rows[0]) if rows else 0
        if any(len(row) != c for row in rows):
            raise ValueError("ragged rows")
        return cls(l, r, c, [x for row in rows for x in row])

    @classmethod
    def identity(cls, l: int, n: int) -> "FlMatrix":
        data = [0] * (n * n)
        for i in range(n):
            data[i * n + i] = 1
        return cls(l, n, n, data)

    @classmethod
    def zero(cls, l: int, rows: int, cols: int) -> "FlMatrix":
        return cls(l, rows, cols, [0] * (rows * cols))

    @classmethod
    def random(cls, l: int, rows: int, cols: int, rng: _random.Random) -> "FlMatrix":
        return cls(l, rows, cols, [rng.randrange(l) for _ in range(rows * cols)])

    def entry(self, i: int, j: int) -> int:
        return self.data[i * self.cols + j]

    def row(self, i: int) -> list[int]:
        return self.data[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list[int]]:
        return [self.row(i) for i in range(self.rows)]

    def transpose(self) -> "FlMatrix":
        data = [0] * (self.rows * self.cols)
        for i in range(self.rows):
            base = i * self.cols
            for j in range(self.cols):
                data[j * self.rows + i] = self.data[base + j]
        return FlMatrix(self.l, self.cols, self.rows, data)

    def scale(self, c: int) -> "FlMatrix":
        c %= self.l
        return FlMatrix(self.l, self.rows, self.cols, [c * x % self.l for x in self.data])

    def mat_vec(self, v: list[int]) -> list[int]:
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        out = []
        for i in range(self.rows):
            base = i * self.cols
            out.append(sum(self.data[base + j] * v[j] for j in range(self.cols)) % self.l)
        return out

    def vec_mat(self, v: list[int]) -> list[int]:
        if len(v) != self.rows:
            raise ValueError("vector length mismatch")
        out = []
        for j in range(self.cols):
            out.append(sum(v[i] * self.data[i * self.cols + j] for i in range(self.rows)) % self.l)
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FlMatrix)
            and (self.l, self.rows, self.cols) == (other.l, other.rows, other.cols)
            and self.data == other.data
        )

    def __repr__(self) -> str:
        return f"FlMatrix(l={self.l}, {self.rows}x{self.cols})"


@dataclass(frozen=True)
class FlSubspace:
    """Subspace of F_l^n given by a reduced-echelon basis (canonical)."""

    l: int
    ambient_dim: int
    basis: tuple[tuple[int, ...], ...] = field(default_factory=tuple)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: list[int]) -> bool:
        w = [x % self.l for x in v]
        for b in self.basis:
            pivot = next(j for j, x in enumerate(b) if x)
            c = w[pivot]
            if c:
                w = [(x - c * y) % self.l for x, y in zip(w, b)]
        return not any(w)

    def vectors(self):
        """Iterate over all l^dim elements (small subspaces only)."""
        from itertools import product

        for coeffs in product(range(self.l), repeat=self.dim):
            v = [0] * self.ambient_dim
            for c, b in zip(coeffs, self.basis):
                if c:
                    v = [(x + c * y) % self.l for x, y in zip(v, b)]
            yield v


def _rref_in_place(l: int, rows: list[list[int]]) -> list[int]:
    """Reduce rows to RREF; returns the pivot column of each pivot row."""
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, nrows) if rows[i][c]), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = pow(rows[r][c], l - 2, l)
        rows[r] = [x * inv % l for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % l for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots


def rank(M: FlMatrix) -> int:
    """Row rank by Gaussian elimination over F_l."""
    rows = M.to_rows()
    return len(_rref_in_place(M.l, rows))


def rref(M: FlMatrix) -> tuple[FlMatrix, list[int]]:
    """Reduced row echelon form together with the pivot columns."""
    rows = M.to_rows()
    pivots = _rref_in_place(M.l, rows)
    return FlMatrix.from_rows(M.l, rows) if rows else M, pivots


def right_kernel(M: FlMatrix) -> FlSubspace:
    """Subspace {v : M v = 0} of F_l^cols."""
    l, n = M.l, M.cols
    rows = M.to_rows()
    pivots = _rref_in_place(l, rows)
    pivot_set = set(pivots)
    free_cols = [j for j in range(n) if j not in pivot_set]
    basis = []
    for f in free_cols:
        v = [0] * n
        v[f] = 1
        for r, c in enumerate(pivots):
            v[c] = (-rows[r][f]) % l
        basis.append(v)
    if basis:
        _rref_in_place(l, basis)
    return FlSubspace(l, n, tuple(tuple(b) for b in basis))


def left_kernel(M: FlMatrix) -> FlSubspace:
    """Subspace {v : v^T M = 0} of F_l^rows."""
    return right_kernel(M.transpose())
