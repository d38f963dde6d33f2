"""Exact and sampled rank statistics of random matrices over F_l.

Kernel always means the right kernel of an r x s matrix acting on
s-vectors, so dim(ker) = s - rank.  Exact distributions are rational,
built from the q-binomial count of fixed-rank matrices.  Pinned-corner
distributions are computed three ways: exact counting (corner reduced
to canonical form by rank, followed by a span-growth recursion over the
free columns), exhaustive enumeration, and seeded Monte Carlo.
"""

from __future__ import annotations

import random as _random
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .flinalg import FlMatrix, check_modulus, rank

EXHAUSTIVE_CELL_LIMIT = 10**8


class SizeLimitError(ValueError):
    """Raised when an exhaustive enumeration would exceed the cell limit."""


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of F_q^n."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (k - i) - 1
    assert num % den == 0
    return num // den


def rank_count(r: int, s: int, l: int, rho: int) -> int:
    """Number of r x s matrices over F_l with rank rho."""
    check_modulus(l)
    if rho < 0 or rho > min(r, s):
        return 0
    surj = 1
    for i in range(rho):
        surj *= l**s - l**i
    return gaussian_binomial(r, rho, l) * surj


def p_cond(j: int, n: int, l: int) -> Fraction:
    """Probability that a uniform n x (n+1) matrix over F_l has rank n - j."""
    if not 0 <= j <= n:
        raise ValueError(f"need 0 <= j <= n, got j={j}, n={n}")
    return Fraction(rank_count(n, n + 1, l, n - j), l ** (n * (n + 1)))


@dataclass(frozen=True)
class RankDistribution:
    """Exact kernel-dimension distribution of uniform r x s matrices."""

    r: int
    s: int
    l: int
    probs: dict[int, Fraction]


def exact_rank_distribution(r: int, s: int, l: int) -> RankDistribution:
    total = l ** (r * s)
    probs = {}
    for j in range(max(0, s - r), s + 1):
        probs[j] = Fraction(rank_count(r, s, l, s - j), total)
    return RankDistribution(r=r, s=s, l=l, probs=probs)


@dataclass(frozen=True)
class PinnedModel:
    """Uniform r x s matrices with the top-left k x k corner pinned to M."""

    M: FlMatrix
    r: int
    s: int

    @property
    def k(self) -> int:
        return self.M.rows

    @property
    def l(self) -> int:
        return self.M.l

    def __post_init__(self):
        if self.M.rows != self.M.cols:
            raise ValueError("pinned corner must be square")
        if self.M.rows > min(self.r, self.s):
            raise ValueError("corner does not fit inside the ambient shape")


def span_growth_counts(r: int, u: int, m: int, l: int) -> dict[int, int]:
    """Count m-tuples of vectors in F_l^r by the dimension they span jointly
    with a fixed u-dimensional subspace."""
    counts: dict[int, int] = {u: 1}
    for _ in range(m):
        nxt: dict[int, int] = defaultdict(int)
        for w, c in counts.items():
            nxt[w] += c * l**w
            if w < r:
                nxt[w + 1] += c * (l**r - l**w)
        counts = dict(nxt)
    return counts


def pinned_rank_counts(r: int, s: int, l: int, k: int, rho0: int) -> dict[int, int]:
    """Exact count of completions of a rank-rho0 k x k corner, by total rank.

    The count is invariant under GL_k x GL_k acting on the corner, so it
    depends on the corner only through its rank.  First the k pinned
    columns are completed downward (a free block plus a rank choice for
    the part missing the corner's column space), then the remaining
    s - k uniform columns grow the span.
    """
    counts: dict[int, int] = defaultdict(int)
    c1_free = l ** ((r - k) * rho0)
    for u in range(rho0, min(k, rho0 + (r - k)) + 1):
        c2 = rank_count(r - k, k - rho0, l, u - rho0)
        if c2 == 0:
            continue
        for t, cnt in span_growth_counts(r, u, s - k, l).items():
            counts[t] += c1_free * c2 * cnt
    return dict(counts)


def _all_matrices(l: int, cells: int) -> np.ndarray:
    """All l^cells digit rows, shape (l^cells, cells)."""
    n = l**cells
    out = np.empty((n, cells), dtype=np.int8)
    idx = np.arange(n)
    for c in range(cells):
        out[:, c] = idx % l
        idx //= l
    return out


def batch_rank(mats: np.ndarray, l: int) -> np.ndarray:
    """Ranks over F_l of a batch of matrices, shape (B, r, s) -> (B,)."""
    check_modulus(l)
    A = (mats.astype(np.int64)) % l
    B, r, s = A.shape
    inv_table = np.array([0] + [pow(x, l - 2, l) for x in range(1, l)], dtype=np.int64)
    ranks = np.zeros(B, dtype=np.int64)
    pivot_row = np.zeros(B, dtype=np.int64)
    row_idx = np.arange(r)[None, :]
    for c in range(s):
        col = A[:, :, c]
        valid = (col != 0) & (row_idx >= pivot_row[:, None])
        has = valid.any(axis=1)
        b = np.flatnonzero(has)
        if b.size == 0:
            continue
        pr = pivot_row[b]
        fr = valid[b].argmax(axis=1)
        tmp = A[b, pr, :].copy()
        A[b, pr, :] = A[b, fr, :]
        A[b, fr, :] = tmp
        inv = inv_table[A[b, pr, c]]
        A[b, pr, :] = A[b, pr, :] * inv[:, None] % l
        below = row_idx > pr[:, None]
        factors = A[b, :, c] * below
        A[b] = (A[b] - factors[:, :, None] * A[b, pr, :][:, None, :]) % l
        pivot_row[b] = pr + 1
        ranks[b] += 1
    return ranks


def q_pinned_prob(model: PinnedModel, j: int, method: str = "exact") -> Fraction:
    """Exact probability that a completion of the pinned corner has kernel dim j.

    method="exact" counts completions through the rank-invariance
    reduction; method="exhaustive" enumerates every completion (subject
    to the cell limit).  Both are exact; they cross-check each other.
    """
    r, s, l, k = model.r, model.s, model.l, model.k
    total = l ** (r * s - k * k)
    t = s - j
    if method == "exact":
        counts = pinned_rank_counts(r, s, l, k, rank(model.M))
        return Fraction(counts.get(t, 0), total)
    if method == "exhaustive":
        if total > EXHAUSTIVE_CELL_LIMIT:
            raise SizeLimitError(
                f"{total} completions exceed the exhaustive limit; "
                "use method='exact' or sampling"
            )
        free = r * s - k * k
        digits = _all_matrices(l, free)
        mats = np.empty((digits.shape[0], r, s), dtype=np.int8)
        pos = 0
        for i in range(r):
            for jj in range(s):
                if i < k and jj < k:
                    mats[:, i, jj] = model.M.entry(i, jj)
                else:
                    mats[:, i, jj] = digits[:, pos]
                    pos += 1
        ranks = batch_rank(mats, l)
        return Fraction(int((ranks == t).sum()), total)
    raise ValueError(f"unknown method {method!r}")


def q_pinned_sample(
    model: PinnedModel, j: int, samples: int, seed: int
) -> tuple[float, float]:
    """Monte Carlo estimate of the pinned kernel-dim probability.

    Returns (estimate, three_sigma) with the binomial standard error.
    """
    r, s, l, k = model.r, model.s, model.l, model.k
    rng = np.random.default_rng(seed)
    mats = rng.integers(0, l, size=(samples, r, s), dtype=np.int64)
    for i in range(k):
        for jj in range(k):
            mats[:, i, jj] = model.M.entry(i, jj)
    ranks = batch_rank(mats, l)
    hits = int((ranks == s - j).sum())
    p = hits / samples
    sigma = (p * (1 - p) / samples) ** 0.5
    return p, 3 * sigma


@dataclass(frozen=True)
class GapReport:
    r: int
    k: int
    l: int
    method: str
    max_gap: float
    bound: float
    radius: float
    ok: bool


def rm_gap_check(
    r: int, k: int, l: int, method: str = "exact", samples: int = 50_000, seed: int = 0
) -> GapReport:
    """Max over corners M and kernel dims j of |P(r,r-1,l,j) - Q(r,r-1,l,M,j)|,
    checked against the bound 2k * l^(2k-r).

    Exact mode covers every M through rank invariance; exhaustive mode
    enumerates all corners and completions; sampled mode estimates Q for
    one corner per rank class and reports a 3-sigma radius.
    """
    if r < 2 * k:
        raise ValueError("need r >= 2k")
    s = r - 1
    bound = 2 * k * float(l) ** (2 * k - r)
    P = exact_rank_distribution(r, s, l).probs
    kernel_dims = sorted(P)

    def canonical_corner(rho: int) -> FlMatrix:
        rows = [[1 if (i == jj and i < rho) else 0 for jj in range(k)] for i in range(k)]
        return FlMatrix.from_rows(l, rows)

    max_gap = 0.0
    radius = 0.0
    if method in ("exact", "exhaustive"):
        corners: list[FlMatrix]
        if method == "exact":
            corners = [canonical_corner(rho) for rho in range(k + 1)]
        else:
            digits = _all_matrices(l, k * k)
            corners = [
                FlMatrix(l, k, k, [int(x) for x in row]) for row in digits
            ]
        for M in corners:
            model = PinnedModel(M=M, r=r, s=s)
            for j in kernel_dims:
                q = q_pinned_prob(model, j, method=method)
                max_gap = max(max_gap, abs(float(P[j] - q)))
    elif method == "sampled":
        sigma_sq = 0.0
        for rho in range(k + 1):
            model = PinnedModel(M=canonical_corner(rho), r=r, s=s)
            rng_seed = seed + rho
            est_rng = np.random.default_rng(rng_seed)
            mats = est_rng.integers(0, l, size=(samples, r, s), dtype=np.int64)
            for i in range(k):
                for jj in range(k):
                    mats[:, i, jj] = model.M.entry(i, jj)
            ranks = batch_rank(mats, l)
            for j in kernel_dims:
                p_est = int((ranks == s - j).sum()) / samples
                gap = abs(float(P[j]) - p_est)
                if gap > max_gap:
                    max_gap = gap
                    sigma_sq = p_est * (1 - p_est) / samples
        radius = 3 * sigma_sq**0.5
    else:
        raise ValueError(f"unknown method {method!r}")
    return GapReport(
        r=r, k=k, l=l, method=method, max_gap=max_gap, bound=bound,
        radius=radius, ok=max_gap <= bound + radius,
    )


def eta(l: int, n: int) -> float:
    """Partial product of (1 - l^-i) for i = 1..n."""
    out = 1.0
    for i in range(1, n + 1):
        out *= 1.0 - float(l) ** (-i)
    return out


def eta_inf(l: int, tail_cut: int = 64, start: int = 1) -> float:
    """Product of (1 - l^-i) for i >= start, truncated at i = tail_cut."""
    out = 1.0
    for i in range(start, tail_cut + 1):
        out *= 1.0 - float(l) ** (-i)
    return out


def eta_tail_bound(l: int, tail_cut: int) -> float:
    """Upper bound on the relative error of the truncated eta product."""
    x = float(l) ** (-(tail_cut + 1))
    return 2 * x / (1 - 1.0 / l)


def limit_rank_defect_prob(l: int, j: int, tail_cut: int = 64) -> float:
    """Limit of P(s, s-1, l, j) as s grows, in closed form.

    Equals eta_inf(l) / (l^(j(j+1)) * eta_j(l) * eta_{j+1}(l)); the exact
    finite-s distribution stabilizes to this within 1e-12 by s ~ 40.
    """
    check_modulus(l)
    if j < 0:
        raise ValueError("j must be nonnegative")
    return eta_inf(l, tail_cut) / (float(l) ** (j * (j + 1)) * eta(l, j) * eta(l, j + 1))


def sample_rank(r: int, s: int, l: int, seed: int) -> int:
    """Kernel dimension of one uniform r x s draw; deterministic per seed."""
    rng = _random.Random(seed)
    M = FlMatrix.random(l, r, s, rng)
    return s - rank(M)


def sample_kernel_dims(r: int, s: int, l: int, n: int, seed: int) -> np.ndarray:
    """Kernel dimensions of n uniform draws (vectorized, seeded)."""
    rng = np.random.default_rng(seed)
    mats = rng.integers(0, l, size=(n, r, s), dtype=np.int64)
    return s - batch_rank(mats, l)


def distribution_rows(r: int, s: int, l: int) -> list[tuple]:
    """CSV rows (l, r, s, j, exact_num, exact_den, float) of the exact law."""
    dist = exact_rank_distribution(r, s, l)
    rows = []
    for j in sorted(dist.probs):
        p = dist.probs[j]
        rows.append((l, r, s, j, p.numerator, p.denominator, float(p)))
    return rows
