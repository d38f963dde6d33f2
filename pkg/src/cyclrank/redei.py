"""Redei matrices of cyclic degree-l fields and their rank statistics.

A field is specified by its ramified support (squarefree radical with
every prime 1 mod l or equal to l) together with an amalgama: one
exponent in [1, l-1] per ramified prime, taken up to global scaling.
The Redei matrix collects the power-residue exponents between the
support primes, rows forced to sum to zero; its rank measures the
second-layer rank defect of the field.

The box/assignment model generalizes this: points of a product space of
prime cells induce assignments on ordered index pairs, boxes are
partitioned by assignment, and a genericity predicate asks the kernel
vectors of the induced matrix to be balanced on a middle window of
coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

from .chars import WildCharData, canonical_character, char_exponent, wild_char_exponent
from .flinalg import FlMatrix, check_modulus, left_kernel, right_kernel, rank
from .primeutil import residue_primes

DESK_SPACING_FACTOR = 10.0


def paper_spacing_factor(l: int) -> float:
    """The literal spacing constant l^200 (unusable at desk scale)."""
    return float(l) ** 200


@dataclass(frozen=True)
class Support:
    """Sorted ramified primes of an admissible discriminant radical."""

    primes: tuple[int, ...]

    def __post_init__(self):
        if not self.primes:
            raise ValueError("support must be nonempty")
        if list(self.primes) != sorted(set(self.primes)):
            raise ValueError("primes must be strictly increasing")

    @property
    def radical(self) -> int:
        return math.prod(self.primes)

    @property
    def r(self) -> int:
        return len(self.primes)


@dataclass(frozen=True)
class Amalgama:
    """Exponent in [1, l-1] at each support prime."""

    eps: tuple[int, ...]
    l: int

    def __post_init__(self):
        if any(not 1 <= e <= self.l - 1 for e in self.eps):
            raise ValueError("amalgama exponents must lie in [1, l-1]")

    def scaled(self, c: int) -> "Amalgama":
        if not 1 <= c <= self.l - 1:
            raise ValueError("scale must lie in [1, l-1]")
        return Amalgama(tuple(e * c % self.l for e in self.eps), self.l)


@dataclass(frozen=True)
class RedeiMatrix:
    support: Support
    eps: Amalgama
    M: FlMatrix


def enumerate_supports(N: int, l: int) -> list[Support]:
    """All supports with radical <= N, in increasing radical order."""
    check_modulus(l)
    if N < 3:
        return []
    primes = residue_primes(N, l)
    found: list[tuple[int, tuple[int, ...]]] = []

    def extend(start: int, radical: int, chosen: tuple[int, ...]):
        for idx in range(start, len(primes)):
            p = primes[idx]
            nxt = radical * p
            if nxt > N:
                break
            found.append((nxt, chosen + (p,)))
            extend(idx + 1, nxt, chosen + (p,))

    extend(0, 1, ())
    found.sort()
    return [Support(primes=ps) for _, ps in found]


def amalgama_representatives(s: Support, l: int) -> list[Amalgama]:
    """One amalgama per scalar-equivalence class, normalized at the least prime.

    Two amalgamas cut out the same field iff they differ by a global
    scale c in [1, l-1], so exactly (l-1)^(r-1) classes remain.
    """
    check_modulus(l)
    reps = []
    for tail in product(range(1, l), repeat=s.r - 1):
        reps.append(Amalgama(eps=(1,) + tail, l=l))
    return reps


def pair_exponent(col_prime: int, row_prime: int, l: int) -> int:
    """Exponent of the fixed character of conductor col_prime at row_prime."""
    if col_prime == l:
        return wild_char_exponent(WildCharData(l), row_prime)
    return char_exponent(canonical_character(col_prime, l), row_prime)


def build_redei(s: Support, eps: Amalgama, l: int) -> RedeiMatrix:
    """The r x r matrix with (i, j) entry eps_j * exponent_j(Frob q_i) for
    i != j and diagonal forced by zero row sums."""
    if len(eps.eps) != s.r:
        raise ValueError("amalgama does not match the support")
    r = s.r
    rows = [[0] * r for _ in range(r)]
    for j, qj in enumerate(s.primes):
        e_j = eps.eps[j]
        for i, qi in enumerate(s.primes):
            if i == j:
                continue
            rows[i][j] = e_j * pair_exponent(qj, qi, l) % l
    for i in range(r):
        rows[i][i] = -sum(rows[i]) % l
    return RedeiMatrix(support=s, eps=eps, M=FlMatrix.from_rows(l, rows))


def rank2_defect(R: RedeiMatrix) -> int:
    """Second-layer rank defect: r - 1 - rank of the Redei matrix."""
    return R.support.r - 1 - rank(R.M)


# --- fast inner loop used by the histogram (no FlMatrix wrapping) ----------


def _rank_rows_mod(rows: list[list[int]], l: int) -> int:
    n = len(rows)
    cols = len(rows[0])
    rnk = 0
    for c in range(cols):
        piv = None
        for i in range(rnk, n):
            if rows[i][c]:
                piv = i
                break
        if piv is None:
            continue
        rows[rnk], rows[piv] = rows[piv], rows[rnk]
        inv = pow(rows[rnk][c], l - 2, l)
        rows[rnk] = [x * inv % l for x in rows[rnk]]
        prow = rows[rnk]
        for i in range(rnk + 1, n):
            f = rows[i][c]
            if f:
                rows[i] = [(x - f * y) % l for x, y in zip(rows[i], prow)]
        rnk += 1
        if rnk == n:
            break
    return rnk


def _support_defects(primes: tuple[int, ...], l: int) -> list[tuple[int, int, int]]:
    """(amalgama_index, rank, defect) for every amalgama class of a support."""
    r = len(primes)
    if r == 1:
        return [(0, 0, 0)]
    base = [[0] * r for _ in range(r)]
    for j, qj in enumerate(primes):
        for i, qi in enumerate(primes):
            if i != j:
                base[i][j] = pair_exponent(qj, qi, l)
    out = []
    for idx, tail in enumerate(product(range(1, l), repeat=r - 1)):
        eps = (1,) + tail
        rows = [[base[i][j] * eps[j] % l for j in range(r)] for i in range(r)]
        for i in range(r):
            rows[i][i] = -sum(rows[i]) % l
        rnk = _rank_rows_mod(rows, l)
        out.append((idx, rnk, r - 1 - rnk))
    return out


@dataclass
class RankHistogram:
    N: int
    l: int
    counts: dict[int, int]
    total: int
    mixed_defect_supports: int
    records: list[tuple[int, int, int, int, int]] = field(default_factory=list)

    @property
    def freqs(self) -> dict[int, float]:
        return {j: c / self.total for j, c in sorted(self.counts.items())}


def _histogram_shard(args) -> tuple[dict[int, int], int, int, list]:
    supports, l, collect = args
    counts: dict[int, int] = {}
    total = 0
    mixed = 0
    records = []
    for primes in supports:
        rows = _support_defects(primes, l)
        defects = {d for _, _, d in rows}
        if len(defects) > 1:
            mixed += 1
        if collect:
            radical = math.prod(primes)
            r = len(primes)
            for idx, rnk, d in rows:
                records.append((radical, r, idx, rnk, d))
        for _, _, d in rows:
            counts[d] = counts.get(d, 0) + 1
            total += 1
    return counts, total, mixed, records


def rank_histogram(
    N: int, l: int, workers: int = 1, collect_records: bool = False, shards: int = 64
) -> RankHistogram:
    """Defect histogram over every (support, amalgama class) with radical <= N.

    Each class counts as one field.  Work is split into a fixed number
    of shards merged in order, so the result does not depend on the
    worker count.  Supports whose amalgama classes disagree on the
    defect are tallied separately (the theory does not rule them out).
    """
    supports = [s.primes for s in enumerate_supports(N, l)]
    shard_lists = [supports[i::shards] for i in range(shards)]
    args = [(shard, l, collect_records) for shard in shard_lists]
    if workers > 1:
        import multiprocessing as mp

        with mp.Pool(workers) as pool:
            results = pool.map(_histogram_shard, args)
    else:
        results = [_histogram_shard(a) for a in args]
    counts: dict[int, int] = {}
    total = 0
    mixed = 0
    records: list = []
    for c, t, m, recs in results:
        for j, v in c.items():
            counts[j] = counts.get(j, 0) + v
        total += t
        mixed += m
        records.extend(recs)
    if collect_records:
        records.sort()
    return RankHistogram(
        N=N, l=l, counts=counts, total=total,
        mixed_defect_supports=mixed, records=records,
    )


# --- boxes and assignments --------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Product space of prime cells: pinned singletons then interval cells."""

    cells: tuple[tuple[int, ...], ...]
    pinned_count: int
    D1: float
    thresholds: tuple[float, ...]
    l: int
    spacing_factor: float = DESK_SPACING_FACTOR

    def __post_init__(self):
        k, r = self.pinned_count, len(self.cells)
        if not 0 <= k <= r:
            raise ValueError("pinned count out of range")
        if len(self.thresholds) != r - k:
            raise ValueError("one threshold per unpinned cell required")
        seen: set[int] = set()
        for cell in self.cells:
            if not cell:
                raise ValueError("cells must be nonempty")
            if seen & set(cell):
                raise ValueError("cells must be disjoint")
            seen |= set(cell)
        for i in range(k):
            if len(self.cells[i]) != 1:
                raise ValueError("pinned cells must be singletons")
            p = self.cells[i][0]
            if p >= self.D1:
                raise ValueError("pinned primes must lie below D1")
            if p % self.l not in (0, 1):
                raise ValueError("pinned primes must be 0 or 1 mod l")
        for cell in self.cells[k:]:
            if any(p % self.l != 1 for p in cell):
                raise ValueError("unpinned cell primes must be 1 mod l")
        prev_upper = float(self.cells[k - 1][0]) if k else None
        for offset in range(r - k):
            t = self.thresholds[offset]
            if t <= self.D1:
                raise ValueError("thresholds must exceed D1")
            upper = self.upper_threshold(offset)
            cell = self.cells[k + offset]
            if any(not t < p < upper for p in cell):
                raise ValueError("cell primes must lie in the open threshold interval")
            if prev_upper is not None and t < self.spacing_factor * prev_upper:
                raise ValueError("thresholds violate the spacing requirement")
            prev_upper = upper

    def upper_threshold(self, offset: int) -> float:
        """t'_i = (1 + 1 / (e^(i - k) log D1)) t_i for the offset-th unpinned cell."""
        t = self.thresholds[offset]
        return (1.0 + 1.0 / (math.e ** (offset + 1) * math.log(self.D1))) * t

    @property
    def r(self) -> int:
        return len(self.cells)

    def points(self):
        return product(*self.cells)


@dataclass(frozen=True)
class Assignment:
    """Exponent data on ordered index pairs and the auxiliary prime sets."""

    r: int
    P: tuple[int, ...]
    l: int
    m: dict[tuple[int, int], int]
    p1: dict[tuple[int, int], int]
    p2: dict[tuple[int, int], int]

    def __post_init__(self):
        expected_m = {(i, j) for i in range(self.r) for j in range(self.r) if i != j}
        if set(self.m) != expected_m:
            raise ValueError("main index set must be all ordered pairs i != j")
        if set(self.p1) != {(i, p) for i in range(self.r) for p in self.P}:
            raise ValueError("row-by-auxiliary index set mismatch")
        if set(self.p2) != {(p, j) for p in self.P for j in range(self.r)}:
            raise ValueError("auxiliary-by-column index set mismatch")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Assignment)
            and (self.r, self.P, self.l) == (other.r, other.P, other.l)
            and self.m == other.m
            and self.p1 == other.p1
            and self.p2 == other.p2
        )

    def __hash__(self) -> int:
        return hash(
            (
                self.r,
                self.P,
                self.l,
                tuple(sorted(self.m.items())),
                tuple(sorted(self.p1.items())),
                tuple(sorted(self.p2.items())),
            )
        )


def build_assignment(
    x: tuple[int, ...], f: dict[int, int], P: tuple[int, ...], l: int
) -> Assignment:
    """Assignment induced by a point: a(i, j) = f(x_j) * exponent_j(Frob x_i),
    extended to the auxiliary pairs in the same way."""
    r = len(x)
    if len(set(x)) != r or set(x) & set(P):
        raise ValueError("point coordinates must be distinct and avoid P")
    m = {}
    for i in range(r):
        for j in range(r):
            if i != j:
                m[(i, j)] = f[x[j]] * pair_exponent(x[j], x[i], l) % l
    p1 = {}
    p2 = {}
    for p in P:
        for i in range(r):
            p1[(i, p)] = f[p] * pair_exponent(p, x[i], l) % l
            p2[(p, i)] = f[x[i]] * pair_exponent(x[i], p, l) % l
    return Assignment(r=r, P=tuple(P), l=l, m=m, p1=p1, p2=p2)


def assignment_filter(
    X: Box, a: Assignment, f: dict[int, int], P: tuple[int, ...]
) -> list[tuple[int, ...]]:
    """All box points whose induced assignment equals a."""
    return [x for x in X.points() if build_assignment(x, f, P, X.l) == a]


def matrix_from_assignment(a: Assignment) -> FlMatrix:
    """The square matrix with off-diagonal entries a(i, j), zero row sums."""
    r = a.r
    rows = [[0] * r for _ in range(r)]
    for (i, j), v in a.m.items():
        rows[i][j] = v
    for i in range(r):
        rows[i][i] = -sum(rows[i]) % a.l
    return FlMatrix.from_rows(a.l, rows)


def is_generic(a: Assignment, r: int, n_max: int, l: int) -> bool:
    """Genericity of an assignment on the main index set (no auxiliary primes).

    Requires the kernel codimension statistic n_2 <= n_max, and every
    kernel pair (T_1 left, T_2 right) other than (0, multiple of the
    all-ones vector) to hit each residue nearly alpha/l times on the
    window of coordinates r/4 <= j <= r/3 (1-based), with deviation at
    most 2^(-10 n_max) r.
    """
    if a.r != r or a.P:
        raise ValueError("predicate applies to main-only assignments of size r")
    M = matrix_from_assignment(a)
    left = left_kernel(M)
    right = right_kernel(M)
    n2 = left.dim - 1
    if n2 > n_max:
        return False
    window = [j for j in range(1, r + 1) if r / 4 <= j <= r / 3]
    alpha = len(window)
    bound = 2.0 ** (-10 * n_max) * r
    ones = [1] * r
    span_ones = {tuple(c * x % l for x in ones) for c in range(l)}
    for T1 in left.vectors():
        t1_zero = not any(T1)
        for T2 in right.vectors():
            if t1_zero and tuple(T2) in span_ones:
                continue
            v = [(x + y) % l for x, y in zip(T1, T2)]
            for i in range(l):
                count = sum(1 for j in window if v[j - 1] == i)
                if abs(count - alpha / l) > bound:
                    return False
    return True
