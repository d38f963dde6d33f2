"""Prime sieving and small multiplicative number theory helpers."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def sieve_primes(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (classic boolean sieve)."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask).astype(np.int64)


def residue_primes(limit: int, l: int) -> list[int]:
    """Primes <= limit congruent to 0 or 1 mod l, ascending.

    The only prime that is 0 mod l is l itself.
    """
    primes = sieve_primes(limit)
    keep = primes[(primes % l == 1) | (primes == l)]
    return [int(p) for p in keep]


def is_prime(n: int) -> bool:
    from sympy import isprime

    return bool(isprime(n))


@lru_cache(maxsize=None)
def prime_factors(n: int) -> tuple[int, ...]:
    """Distinct prime factors of n by trial division (n fits common use <= 2^40)."""
    if n < 2:
        return ()
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return tuple(out)


def multiplicative_order(a: int, p: int) -> int:
    """Order of a in (Z/p)^* for prime p, via factoring p - 1."""
    a %= p
    if a == 0:
        raise ValueError("a must be a unit mod p")
    order = p - 1
    for q in prime_factors(p - 1):
        while order % q == 0 and pow(a, order // q, p) == 1:
            order //= q
    return order


@lru_cache(maxsize=None)
def least_primitive_root(p: int) -> int:
    """Smallest generator of (Z/p)^* for prime p."""
    if p == 2:
        return 1
    factors = prime_factors(p - 1)
    exps = [(p - 1) // q for q in factors]
    g = 2
    while True:
        if all(pow(g, e, p) != 1 for e in exps):
            return g
        g += 1
