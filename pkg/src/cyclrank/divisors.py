"""Statistics of squarefree integers with residue-restricted prime divisors.

Samples are squarefree n <= N with exactly r prime divisors, each 0 or
1 mod l.  Two regularity notions are measured: comfortable spacing
(each prime above a floor D_1 is a fixed factor below its successor)
and C_0-regularity (the prime positions track the log-log scale within
a polynomial envelope).  The volume integral governing the counts is
computed from its differential recursion, and a Poisson order-statistic
simulation gives the heuristic counterpart of the regularity failure
rate.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .flinalg import check_modulus
from .primeutil import residue_primes

E = math.e


@dataclass(frozen=True)
class SquarefreeSample:
    """Sorted prime tuple with its product and the ambient bound."""

    primes: tuple[int, ...]
    N: int

    def __post_init__(self):
        if list(self.primes) != sorted(set(self.primes)):
            raise ValueError("primes must be strictly increasing")

    @property
    def value(self) -> int:
        return math.prod(self.primes)

    @property
    def r(self) -> int:
        return len(self.primes)


@dataclass(frozen=True)
class SpacingConfig:
    D1: float
    spacing_factor: float = 10.0

    def __post_init__(self):
        if self.D1 < 100:
            raise ValueError("D1 must be at least 100")
        if self.spacing_factor < 1:
            raise ValueError("spacing factor must be >= 1")


@dataclass(frozen=True)
class RegularityConfig:
    C0: float
    N: int

    def __post_init__(self):
        if self.C0 <= 1:
            raise ValueError("C0 must exceed 1")
        if self.N <= math.exp(E):
            raise ValueError("N must exceed e^e for the log-log scale")


def iter_prime_tuples(N: int, r: int, l: int) -> Iterator[tuple[int, ...]]:
    """All increasing r-tuples of residue-restricted primes with product <= N."""
    check_modulus(l)
    if r < 1 or N < 3:
        return
    primes = residue_primes(N, l)

    def extend(start: int, prod: int, chosen: tuple[int, ...]):
        depth = len(chosen)
        if depth == r:
            yield chosen
            return
        limit = N // prod
        hi = bisect_right(primes, limit)
        for idx in range(start, hi):
            p = primes[idx]
            yield from extend(idx + 1, prod * p, chosen + (p,))

    yield from extend(0, 1, ())


def enumerate_S_r(N: int, r: int, l: int) -> list[SquarefreeSample]:
    """The sample set in increasing value order (materialized)."""
    out = [(math.prod(t), t) for t in iter_prime_tuples(N, r, l)]
    out.sort()
    return [SquarefreeSample(primes=t, N=N) for _, t in out]


def is_comfortably_spaced(n: SquarefreeSample, cfg: SpacingConfig) -> bool:
    """Each prime above D1 must sit a full spacing factor below its successor."""
    ps = n.primes
    for i in range(len(ps) - 1):
        if ps[i] > cfg.D1 and not cfg.spacing_factor * ps[i] < ps[i + 1]:
            return False
    return True


def is_regular(
    n: SquarefreeSample, cfg: RegularityConfig, r: int | None = None,
    full_range: bool = False,
) -> bool:
    """Position-vs-log-log regularity with the C0 envelope.

    The ranges definition quantifies over i <= r/3; the order-statistics
    model uses every i <= r, available via full_range.
    """
    ps = n.primes
    r = len(ps) if r is None else r
    if any(p <= E for p in ps):
        raise ValueError("primes must exceed e for the log-log scale")
    loglogN = math.log(math.log(cfg.N))
    top = r if full_range else r // 3
    for i in range(1, top + 1):
        lhs = abs(i - r * math.log(math.log(ps[i - 1])) / loglogN)
        if not lhs < cfg.C0 ** 0.2 * max(i, cfg.C0) ** 0.8:
            return False
    return True


@dataclass
class TrendReport:
    N: int
    r: int
    l: int
    spacing_factor: float
    sample_count: int
    frac_not_spaced: dict[float, float]
    frac_not_regular: dict[float, float]


def divisor_trends(
    N: int, r: int, l: int, D1_grid: list[float], C0_grid: list[float],
    spacing_factor: float = 10.0, full_range: bool = False,
) -> TrendReport:
    """One streaming pass computing all failure fractions over both grids."""
    spacing_cfgs = [SpacingConfig(D1=d, spacing_factor=spacing_factor) for d in D1_grid]
    reg_cfgs = [RegularityConfig(C0=c, N=N) for c in C0_grid]
    not_spaced = [0] * len(D1_grid)
    not_regular = [0] * len(C0_grid)
    count = 0
    for t in iter_prime_tuples(N, r, l):
        count += 1
        sample = SquarefreeSample(primes=t, N=N)
        for k, cfg in enumerate(spacing_cfgs):
            if not is_comfortably_spaced(sample, cfg):
                not_spaced[k] += 1
        for k, cfg in enumerate(reg_cfgs):
            if not is_regular(sample, cfg, full_range=full_range):
                not_regular[k] += 1
    if count == 0:
        raise ValueError("no samples in range")
    return TrendReport(
        N=N, r=r, l=l, spacing_factor=spacing_factor, sample_count=count,
        frac_not_spaced={d: c / count for d, c in zip(D1_grid, not_spaced)},
        frac_not_regular={c0: c / count for c0, c in zip(C0_grid, not_regular)},
    )


# ---------------------------------------------------------------------------
# the volume integral I_r(u)


def _cumulative_simpson(f: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral on a uniform grid with an even interval count."""
    n = len(f)
    F = np.zeros(n)
    if n < 3:
        if n == 2:
            F[1] = h * (f[0] + f[1]) / 2
        return F
    pair_incr = h / 3 * (f[0:-2:2] + 4 * f[1:-1:2] + f[2::2])
    F[2::2] = np.cumsum(pair_incr)
    odd = np.arange(1, n - 1, 2)
    F[odd] = F[odd - 1] + h / 12 * (5 * f[odd - 1] + 8 * f[odd] - f[odd + 1])
    return F


def _integral_on_grid(r: int, u: float, h: float) -> float:
    """I_r(u) by integrating the recursion I_r'(t) = (r/t) I_{r-1}(t-1)."""
    span = u - r
    K = max(2, 2 * math.ceil(span / (2 * h)))
    h = span / K
    prev = np.ones(K + 1)  # level 0 is constantly 1
    for j in range(1, r + 1):
        t = j + h * np.arange(K + 1)
        f = (j / t) * prev
        prev = _cumulative_simpson(f, h)
    return float(prev[-1])


def ramanujan_I(r: int, u: float, grid_step: float = 0.005) -> tuple[float, float]:
    """The simplex volume integral with an absolute error estimate.

    Integrates the classical recursion level by level on aligned grids;
    the error estimate comes from step halving (fourth-order rule).
    Returns (value, error_estimate).
    """
    if u < 0:
        raise ValueError("u must be nonnegative")
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return 1.0, 0.0
    if u <= r:
        return 0.0, 0.0
    coarse = _integral_on_grid(r, u, grid_step)
    fine = _integral_on_grid(r, u, grid_step / 2)
    return fine, abs(fine - coarse) / 15


_EULER_GAMMA = 0.5772156649015329


def ramanujan_approx(r: int, u: float) -> float:
    """Main term e^(-gamma a) / Gamma(1 + a) * (log u)^r with a = r / log u."""
    if u < 3:
        raise ValueError("u must be at least 3")
    alpha = r / math.log(u)
    return math.exp(-_EULER_GAMMA * alpha) / math.gamma(1 + alpha) * math.log(u) ** r


# ---------------------------------------------------------------------------
# Poisson order-statistics model


def poisson_order_stat_sim(
    r: int, L: float, trials: int, C0: float, seed: int
) -> float:
    """Empirical failure rate of the C0 envelope for uniform order statistics.

    Draws r independent uniforms on (0, L) per trial and checks
    |i - r U_(i) / L| < C0^(1/5) max(i, C0)^(4/5) for every i <= r.
    """
    if L <= 2:
        raise ValueError("L must exceed 2")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    draws = rng.uniform(0.0, L, size=(trials, r))
    draws.sort(axis=1)
    i = np.arange(1, r + 1)
    envelope = C0**0.2 * np.maximum(i, C0) ** 0.8
    dev = np.abs(i[None, :] - r * draws / L)
    failures = (dev >= envelope[None, :]).any(axis=1)
    return float(failures.mean())


def trend_csv_rows(reports: list[TrendReport]) -> list[tuple]:
    """CSV rows (N, r, l, D_1, factor, frac_not_spaced, C_0, frac_not_regular)."""
    rows = []
    for rep in reports:
        for d1, fs in rep.frac_not_spaced.items():
            for c0, fr in rep.frac_not_regular.items():
                rows.append(
                    (rep.N, rep.r, rep.l, d1, rep.spacing_factor, fs, c0, fr)
                )
    return rows
