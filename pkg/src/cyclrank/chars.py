"""Canonical l-th power residue characters and their Frobenius exponents.

For a prime p = 1 mod l the degree-l character of conductor p is pinned
down by the least primitive root g mod p: with omega = g^((p-1)/l), the
exponent of the character at q is the unique e with q^((p-1)/l) = omega^e.
Writing zeta^e additively, exponents live in F_l.  The wild character of
conductor l^2 is normalized through the Fermat quotient, so that 1 + l
is sent to exponent 1.

A splitting oracle based on multiplicative orders provides a check that
does not go through any character normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .flinalg import check_modulus
from .primeutil import is_prime, least_primitive_root, multiplicative_order


@dataclass(frozen=True)
class CharData:
    """Fixed degree-l character of conductor p (p = 1 mod l)."""

    p: int
    l: int
    g: int
    omega: int


@dataclass(frozen=True)
class WildCharData:
    """Fixed degree-l character of conductor l^2."""

    l: int


def _check_l(l: int) -> int:
    check_modulus(l)
    return l


@lru_cache(maxsize=None)
def canonical_character(p: int, l: int) -> CharData:
    """The fixed character of conductor p, normalized by the least primitive root."""
    _check_l(l)
    if p % l != 1:
        raise ValueError(f"p={p} is not 1 mod l={l}")
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    g = least_primitive_root(p)
    omega = pow(g, (p - 1) // l, p)
    return CharData(p=p, l=l, g=g, omega=omega)


@lru_cache(maxsize=None)
def _omega_log(p: int, omega: int, l: int) -> dict[int, int]:
    return {pow(omega, e, p): e for e in range(l)}


def char_exponent(chi: CharData, q: int) -> int:
    """Exponent e in [0, l) with chi(Frob q) = zeta^e, i.e. q^((p-1)/l) = omega^e mod p."""
    p, l = chi.p, chi.l
    if q % p == 0:
        raise ValueError(f"q={q} is not coprime to p={p}")
    t = pow(q, (p - 1) // l, p)
    table = _omega_log(p, chi.omega, l)
    return table[t]


def wild_char_exponent(w: WildCharData, q: int) -> int:
    """Exponent of the conductor-l^2 character at q, via the Fermat quotient.

    e = ((q^(l-1) mod l^2) - 1) / l reduced mod l; depends only on q mod l^2.
    """
    l = _check_l(w.l)
    if q % l == 0:
        raise ValueError(f"q={q} is divisible by l={l}")
    t = pow(q, l - 1, l * l)
    return ((t - 1) // l) % l


def splitting_oracle(p: int, q: int, l: int) -> bool:
    """True iff q splits completely in the degree-l field of conductor p.

    Decided by ord_p(q) dividing (p-1)/l; independent of how the
    character at p is normalized.
    """
    _check_l(l)
    if p % l != 1 or not is_prime(p):
        raise ValueError(f"p={p} is not a prime 1 mod l={l}")
    if p == q:
        raise ValueError("p and q must be distinct")
    return ((p - 1) // l) % multiplicative_order(q, p) == 0
