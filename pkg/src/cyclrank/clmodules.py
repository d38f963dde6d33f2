"""Finite modules over the cyclotomic local ring, as partitions.

The local ring R is the l-adic completion of Z[zeta_l]; it is a discrete
valuation ring with uniformizer pi = 1 - zeta_l and residue field F_l.
A finite R-module is a direct sum of R/(pi^m) pieces, recorded as the
non-increasing partition of its exponents.

Arithmetic in R/(pi^m) is exact: elements are kept in canonical digit
form d_0 + d_1 pi + ... + d_{m-1} pi^(m-1) with digits in [0, l).  The
digit extraction works on integer polynomials modulo the l-th
cyclotomic polynomial, where division by pi is multiplication by the
integer polynomial prod_{i>=2}(1 - x^i) followed by exact division by l.
The polynomial view (coefficients mod l^c, c = ceil(m/(l-1)) + 1) is
exposed for interop, matching the precision the digits require.

The dual module Hom(A, N), N = Q_l(zeta_l)/R, is realized in the same
coordinates: a dual vector (c_1, ..., c_s) acts by a |-> sum_j c_j a_j
/ pi^(lambda_j) in N.  The layer pairings, their kernels, automorphism
counts and the natural measure on modules all live here.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from .flinalg import check_modulus
from .matmodel import eta, eta_inf, eta_tail_bound, p_cond


# ---------------------------------------------------------------------------
# integer polynomial arithmetic modulo the l-th cyclotomic polynomial


@lru_cache(maxsize=None)
class CyclotomicContext:
    """Exact arithmetic helpers for Z[x] mod (1 + x + ... + x^(l-1))."""

    def __init__(self, l: int):
        check_modulus(l)
        self.l = l
        self.deg = l - 1
        # prod_{i=2}^{l-1} (1 - x^i) reduced; satisfies (1 - x) * inv_pi_num = l
        poly = (1,)
        for i in range(2, l):
            factor = tuple(1 if j == 0 else (-1 if j == i else 0) for j in range(i + 1))
            poly = self._mul_raw(poly, factor)
        self.inv_pi_num = self.reduce(poly)
        self.pi = self.reduce((1, -1))

    @staticmethod
    def _mul_raw(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return tuple(out)

    def reduce(self, poly: tuple[int, ...]) -> tuple[int, ...]:
        """Remainder mod the cyclotomic polynomial, degree < l - 1."""
        coeffs = list(poly)
        # x^(l-1) = -(1 + x + ... + x^(l-2)); peel from the top
        for i in range(len(coeffs) - 1, self.deg - 1, -1):
            c = coeffs[i]
            if c:
                coeffs[i] = 0
                for j in range(i - self.deg, i):
                    coeffs[j] -= c
        coeffs = coeffs[: self.deg]
        coeffs += [0] * (self.deg - len(coeffs))
        return tuple(coeffs)

    def mul(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        return self.reduce(self._mul_raw(a, b))

    def add(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(x + y for x, y in zip(a, b))

    def residue(self, poly: tuple[int, ...]) -> int:
        """Image in the residue field R/pi = F_l (evaluate at x = 1)."""
        return sum(poly) % self.l

    def div_pi(self, poly: tuple[int, ...]) -> tuple[int, ...]:
        """Exact division by pi = 1 - x; requires residue zero."""
        q = self.mul(poly, self.inv_pi_num)
        if any(c % self.l for c in q):
            raise ValueError("polynomial is not divisible by pi")
        return tuple(c // self.l for c in q)

    def digits(self, poly: tuple[int, ...], m: int) -> tuple[int, ...]:
        """First m pi-adic digits of an exact integer polynomial."""
        out = []
        cur = self.reduce(poly)
        for _ in range(m):
            d = self.residue(cur)
            out.append(d)
            if d:
                cur = self.add(cur, tuple(-d if i == 0 else 0 for i in range(self.deg)))
            cur = self.div_pi(cur)
        return tuple(out)

    def from_digits(self, digits: tuple[int, ...]) -> tuple[int, ...]:
        """Exact integer polynomial sum_i d_i pi^i."""
        out = tuple(0 for _ in range(self.deg))
        power = tuple(1 if i == 0 else 0 for i in range(self.deg))
        for d in digits:
            if d:
                out = self.add(out, tuple(d * c for c in power))
            power = self.mul(power, self.pi)
        return out


class TruncatedCyclotomic:
    """Element of R/(pi^m) in canonical pi-adic digit form."""

    __slots__ = ("l", "m", "digits")

    def __init__(self, l: int, m: int, digits: tuple[int, ...]):
        if len(digits) != m:
            raise ValueError("digit count must equal the truncation level")
        self.l = l
        self.m = m
        self.digits = tuple(d % l for d in digits)

    @classmethod
    def zero(cls, l: int, m: int) -> "TruncatedCyclotomic":
        return cls(l, m, (0,) * m)

    @classmethod
    def one(cls, l: int, m: int) -> "TruncatedCyclotomic":
        return cls(l, m, (1,) + (0,) * (m - 1))

    @classmethod
    def from_poly(cls, l: int, m: int, poly: tuple[int, ...]) -> "TruncatedCyclotomic":
        ctx = CyclotomicContext(l)
        return cls(l, m, ctx.digits(poly, m))

    @property
    def coeff_modulus_exponent(self) -> int:
        """Exponent c with coefficients meaningful mod l^c."""
        return math.ceil(self.m / (self.l - 1)) + 1

    @property
    def coeffs(self) -> tuple[int, ...]:
        """Polynomial view, coefficients reduced mod l^c."""
        ctx = CyclotomicContext(self.l)
        mod = self.l**self.coeff_modulus_exponent
        return tuple(c % mod for c in ctx.from_digits(self.digits))

    def lift(self) -> tuple[int, ...]:
        return CyclotomicContext(self.l).from_digits(self.digits)

    def valuation(self) -> int:
        """pi-adic valuation, m for the zero class."""
        for i, d in enumerate(self.digits):
            if d:
                return i
        return self.m

    def is_zero(self) -> bool:
        return not any(self.digits)

    def truncate(self, m: int) -> "TruncatedCyclotomic":
        if m <= self.m:
            return TruncatedCyclotomic(self.l, m, self.digits[:m])
        return TruncatedCyclotomic(self.l, m, self.digits + (0,) * (m - self.m))

    def __add__(self, other: "TruncatedCyclotomic") -> "TruncatedCyclotomic":
        self._match(other)
        ctx = CyclotomicContext(self.l)
        return TruncatedCyclotomic(
            self.l, self.m, ctx.digits(ctx.add(self.lift(), other.lift()), self.m)
        )

    def __neg__(self) -> "TruncatedCyclotomic":
        ctx = CyclotomicContext(self.l)
        return TruncatedCyclotomic(
            self.l, self.m, ctx.digits(tuple(-c for c in self.lift()), self.m)
        )

    def __sub__(self, other: "TruncatedCyclotomic") -> "TruncatedCyclotomic":
        return self + (-other)

    def __mul__(self, other: "TruncatedCyclotomic") -> "TruncatedCyclotomic":
        self._match(other)
        ctx = CyclotomicContext(self.l)
        return TruncatedCyclotomic(
            self.l, self.m, ctx.digits(ctx.mul(self.lift(), other.lift()), self.m)
        )

    def pi_shift_up(self, t: int, m: int | None = None) -> "TruncatedCyclotomic":
        """Multiply by pi^t, optionally re-truncating to level m."""
        m = self.m if m is None else m
        digits = (0,) * t + self.digits
        return TruncatedCyclotomic(self.l, m, (digits + (0,) * m)[:m])

    def pi_shift_down(self, t: int) -> "TruncatedCyclotomic":
        """Divide by pi^t; requires valuation >= t.  Level drops by t."""
        if any(self.digits[:t]):
            raise ValueError("valuation too small for pi division")
        return TruncatedCyclotomic(self.l, self.m - t, self.digits[t:])

    def _match(self, other: "TruncatedCyclotomic"):
        if (self.l, self.m) != (other.l, other.m):
            raise ValueError("mixed truncation levels")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TruncatedCyclotomic)
            and (self.l, self.m, self.digits) == (other.l, other.m, other.digits)
        )

    def __hash__(self) -> int:
        return hash((self.l, self.m, self.digits))

    def __repr__(self) -> str:
        return f"TruncatedCyclotomic(l={self.l}, m={self.m}, digits={self.digits})"


# ---------------------------------------------------------------------------
# partitions and module elements


@dataclass(frozen=True)
class Partition:
    """Exponent multiset of a finite R-module, non-increasing."""

    parts: tuple[int, ...]

    def __post_init__(self):
        if any(p <= 0 for p in self.parts):
            raise ValueError("parts must be positive")
        if any(a < b for a, b in zip(self.parts, self.parts[1:])):
            raise ValueError("parts must be non-increasing")

    @property
    def size(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)


def rank_k(lam: Partition, k: int) -> int:
    """dim over F_l of pi^(k-1) (A[pi^k]): the number of parts >= k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return sum(1 for p in lam.parts if p >= k)


def partition_from_ranks(ranks: list[int]) -> Partition:
    """Rebuild the partition whose k-th rank sequence entry is ranks[k-1]."""
    parts = []
    for j in range(1, (ranks[0] if ranks else 0) + 1):
        parts.append(max(k for k, r in enumerate(ranks, start=1) if r >= j))
    return Partition(tuple(sorted(parts, reverse=True)))


def module_order(lam: Partition, l: int) -> int:
    """|A| = l^(sum of parts); rejects sizes beyond the 63-bit word range."""
    check_modulus(l)
    total = lam.size
    if total * math.log2(l) > 63:
        raise OverflowError("module order exceeds the word-size guard")
    return l**total


@dataclass(frozen=True)
class ModuleElement:
    """Element of the module: one residue per part, at that part's level."""

    module: Partition
    coords: tuple[TruncatedCyclotomic, ...]

    def __post_init__(self):
        if len(self.coords) != len(self.module.parts):
            raise ValueError("coordinate count mismatch")
        for c, lam_j in zip(self.coords, self.module.parts):
            if c.m != lam_j:
                raise ValueError("coordinate truncation level mismatch")

    def key(self) -> tuple:
        return tuple(c.digits for c in self.coords)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coords)


@dataclass(frozen=True)
class DualElement:
    """Element of Hom(A, N) in the standard coordinates."""

    module: Partition
    coords: tuple[TruncatedCyclotomic, ...]

    def __post_init__(self):
        if len(self.coords) != len(self.module.parts):
            raise ValueError("coordinate count mismatch")
        for c, lam_j in zip(self.coords, self.module.parts):
            if c.m != lam_j:
                raise ValueError("coordinate truncation level mismatch")

    def key(self) -> tuple:
        return tuple(c.digits for c in self.coords)


def zero_element(lam: Partition, l: int) -> ModuleElement:
    return ModuleElement(lam, tuple(TruncatedCyclotomic.zero(l, m) for m in lam.parts))


def element_from_digits(lam: Partition, l: int, digit_vectors) -> ModuleElement:
    coords = tuple(
        TruncatedCyclotomic(l, m, tuple(d)) for m, d in zip(lam.parts, digit_vectors)
    )
    return ModuleElement(lam, coords)


def dual_from_digits(lam: Partition, l: int, digit_vectors) -> DualElement:
    coords = tuple(
        TruncatedCyclotomic(l, m, tuple(d)) for m, d in zip(lam.parts, digit_vectors)
    )
    return DualElement(lam, coords)


def add_elements(a: ModuleElement, b: ModuleElement) -> ModuleElement:
    return ModuleElement(a.module, tuple(x + y for x, y in zip(a.coords, b.coords)))


def pi_multiply(a: ModuleElement, t: int = 1) -> ModuleElement:
    return ModuleElement(a.module, tuple(c.pi_shift_up(t) for c in a.coords))


def zeta_multiply(a: ModuleElement) -> ModuleElement:
    """Multiply by the ring generator zeta = 1 - pi."""
    out = []
    for c in a.coords:
        zeta = TruncatedCyclotomic.from_poly(c.l, c.m, (0, 1))
        out.append(c * zeta)
    return ModuleElement(a.module, tuple(out))


def all_elements(lam: Partition, l: int):
    """Iterate every module element (module_order must stay small)."""
    ranges = [product(range(l), repeat=m) for m in lam.parts]
    for combo in product(*ranges):
        yield element_from_digits(lam, l, combo)


def all_dual_elements(lam: Partition, l: int):
    ranges = [product(range(l), repeat=m) for m in lam.parts]
    for combo in product(*ranges):
        yield dual_from_digits(lam, l, combo)


# ---------------------------------------------------------------------------
# membership in pi-power layers, explicit image computation


def annihilated_by(a: ModuleElement, k: int) -> bool:
    """True iff pi^k a = 0."""
    return all(c.pi_shift_up(k).is_zero() for c in a.coords)


def solve_pi_power(a: ModuleElement, t: int) -> ModuleElement | None:
    """Some b with pi^t b = a, or None; solved coordinatewise by digit shift."""
    out = []
    for c in a.coords:
        if c.is_zero():
            out.append(TruncatedCyclotomic.zero(c.l, c.m))
            continue
        if c.valuation() < t:
            return None
        shifted = (c.digits[t:] + (0,) * t)[: c.m]
        out.append(TruncatedCyclotomic(c.l, c.m, shifted))
    return ModuleElement(a.module, tuple(out))


def in_layer(a: ModuleElement, k: int) -> bool:
    """Membership in pi^(k-1) (A[pi^k]), by explicit annihilator and image tests."""
    b = solve_pi_power(a, k - 1)
    if b is None:
        return False
    # the digit-shift solution has minimal valuation, so if any preimage
    # lies in A[pi^k] this one does
    return annihilated_by(b, k)


def layer_elements(lam: Partition, l: int, k: int):
    """All elements of pi^(k-1) (A[pi^k]), enumerated from socle coordinates."""
    idx = [j for j, p in enumerate(lam.parts) if p >= k]
    for coeffs in product(range(l), repeat=len(idx)):
        digit_vectors = []
        for j, m in enumerate(lam.parts):
            d = [0] * m
            if j in idx:
                d[m - 1] = coeffs[idx.index(j)]
            digit_vectors.append(tuple(d))
        yield element_from_digits(lam, l, digit_vectors)


def layer_dual_elements(lam: Partition, l: int, k: int):
    for a in layer_elements(lam, l, k):
        yield DualElement(a.module, a.coords)


# ---------------------------------------------------------------------------
# the pairing on layers


@dataclass(frozen=True)
class NElement:
    """Element of N = Q_l(zeta_l)/R written as w / pi^T with w in R/(pi^T)."""

    numerator: TruncatedCyclotomic

    @property
    def T(self) -> int:
        return self.numerator.m

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def socle_value(self) -> int:
        """The F_l value of an element of N[pi]; raises if not pi-torsion.

        Under the identification sending e to e / pi, an element
        w / pi^T is pi-torsion iff all digits of w below the top vanish,
        and its value is the top digit.
        """
        digits = self.numerator.digits
        if any(digits[:-1]):
            raise ValueError("element of N is not pi-torsion")
        return digits[-1] if digits else 0


def evaluate_dual(psi: DualElement, a: ModuleElement) -> NElement:
    """psi(a) = sum_j psi_j a_j / pi^(lambda_j) as an element of N."""
    lam = psi.module
    if a.module != lam:
        raise ValueError("module mismatch")
    l = psi.coords[0].l if psi.coords else 3
    T = max(lam.parts) if lam.parts else 1
    acc = TruncatedCyclotomic.zero(l, T)
    for c, x, m in zip(psi.coords, a.coords, lam.parts):
        prod_cx = c * x  # in R/(pi^m)
        acc = acc + prod_cx.pi_shift_up(T - m, T)
    return NElement(acc)


def artin_pairing(
    lam: Partition, k: int, a: ModuleElement, chi: DualElement
) -> int:
    """Value in F_l of the layer-k pairing at (a, chi).

    Requires a in pi^(k-1) (A[pi^k]) and the dual analogue for chi; the
    dual vector is lifted through pi^(k-1) and evaluated, and the result
    is read off in N[pi].  Independence of the lift is a property test.
    """
    if not lam.parts:
        return 0
    if not in_layer(a, k):
        raise ValueError("left argument is not in the k-th layer")
    chi_as_elem = ModuleElement(chi.module, chi.coords)
    if not in_layer(chi_as_elem, k):
        raise ValueError("right argument is not in the k-th dual layer")
    lifted = solve_pi_power(chi_as_elem, k - 1)
    assert lifted is not None
    psi = DualElement(lam, lifted.coords)
    return evaluate_dual(psi, a).socle_value()


@dataclass(frozen=True)
class PairingKernels:
    left_kernel: frozenset
    right_kernel: frozenset
    predicted_left: frozenset
    predicted_right: frozenset

    @property
    def left_matches(self) -> bool:
        return self.left_kernel == self.predicted_left

    @property
    def right_matches(self) -> bool:
        return self.right_kernel == self.predicted_right


def pairing_kernels(lam: Partition, k: int, l: int) -> PairingKernels:
    """Brute-force kernels of the layer-k pairing next to the predicted layers.

    The predictions pi^k A[pi^(k+1)] (and the dual analogue) are computed
    by explicit enumeration: filter the annihilator and push through pi^k.
    """
    if module_order(lam, l) > 10**5:
        raise ValueError("module too large for exhaustive pairing evaluation")
    lefts = list(layer_elements(lam, l, k))
    rights = list(layer_dual_elements(lam, l, k))
    pair = {}
    for a in lefts:
        for chi in rights:
            pair[(a.key(), chi.key())] = artin_pairing(lam, k, a, chi)
    left_kernel = frozenset(
        a.key() for a in lefts if all(pair[(a.key(), chi.key())] == 0 for chi in rights)
    )
    right_kernel = frozenset(
        chi.key() for chi in rights if all(pair[(a.key(), chi.key())] == 0 for a in lefts)
    )
    predicted = frozenset(
        pi_multiply(b, k).key() for b in all_elements(lam, l) if annihilated_by(b, k + 1)
    )
    return PairingKernels(
        left_kernel=left_kernel,
        right_kernel=right_kernel,
        predicted_left=predicted,
        predicted_right=predicted,
    )


# ---------------------------------------------------------------------------
# automorphism counts


def aut_count(lam: Partition, l: int) -> int:
    """Order of the R-module automorphism group of the partition module.

    The endomorphism ring has size l^S with S = sum over pairs of
    min(lambda_i, lambda_j); invertibility costs one unit factor per
    block of equal parts.
    """
    check_modulus(l)
    parts = lam.parts
    S = sum(min(a, b) for a in parts for b in parts)
    mults = defaultdict(int)
    for p in parts:
        mults[p] += 1
    unit = 1
    drop = 0
    for m in mults.values():
        for i in range(1, m + 1):
            unit *= l**i - 1
            drop += i
    return l ** (S - drop) * unit


def brute_force_aut_count(lam: Partition, l: int) -> int:
    """Count R-linear bijections by enumerating generator images.

    Generator j may go to any element killed by pi^lambda_j (that is
    the defining relation); a tuple of images is an automorphism iff
    the images generate the whole module.  The enumeration runs as a
    depth-first sum memoized on the submodule generated so far, which
    keeps the count exact while collapsing equivalent branches.
    """
    order = module_order(lam, l)
    if order > 10**5:
        raise ValueError("module too large for brute-force enumeration")
    if not lam.parts:
        return 1

    elements = list(all_elements(lam, l))
    index = {e.key(): i for i, e in enumerate(elements)}
    n = len(elements)
    add_table = [[0] * n for _ in range(n)]
    for i, a in enumerate(elements):
        for j in range(i, n):
            s = index[add_elements(a, elements[j]).key()]
            add_table[i][j] = s
            add_table[j][i] = s
    zeta_table = [index[zeta_multiply(e).key()] for e in elements]
    zero_idx = index[zero_element(lam, l).key()]

    candidates = []
    for lam_j in lam.parts:
        candidates.append(
            [i for i, e in enumerate(elements) if annihilated_by(e, lam_j)]
        )

    def close(submodule: frozenset, g: int) -> frozenset:
        # additive closure of submodule with the zeta-orbit of g
        gens = []
        cur = g
        for _ in range(l - 1):
            gens.append(cur)
            cur = zeta_table[cur]
        out = set(submodule)
        for gen in gens:
            if gen in out:
                continue
            cosets = set(out)
            shift = gen
            while shift not in out:
                cosets.update(add_table[x][shift] for x in out)
                shift = add_table[shift][gen]
            out = cosets
        return frozenset(out)

    memo: dict[tuple[int, frozenset], int] = {}

    def count(j: int, submodule: frozenset) -> int:
        if j == len(lam.parts):
            return 1 if len(submodule) == n else 0
        key = (j, submodule)
        if key in memo:
            return memo[key]
        total = 0
        for g in candidates[j]:
            total += count(j + 1, close(submodule, g))
        memo[key] = total
        return total

    return count(0, frozenset({zero_idx}))


# ---------------------------------------------------------------------------
# the natural measure and its rank-sequence pushforward


@dataclass(frozen=True)
class ClWeight:
    value: float
    error_bound: float


def cl_weight(lam: Partition, l: int, tail_cut: int = 64) -> ClWeight:
    """Measure weight eta^1 / (|A| |Aut A|) with the truncated eta product.

    eta^1 = prod_{i >= 2} (1 - l^-i); the truncation error bound scales
    the reported value.
    """
    if tail_cut < 2:
        raise ValueError("tail_cut must be at least 2")
    eta1 = eta_inf(l, tail_cut, start=2)
    value = eta1 / (module_order(lam, l) * aut_count(lam, l))
    return ClWeight(value=value, error_bound=value * eta_tail_bound(l, tail_cut))


def partitions_bounded(max_sum: int, max_part: int):
    """All partitions (as Partition values) with size <= max_sum, parts <= max_part."""

    def gen(remaining: int, cap: int, prefix: tuple[int, ...]):
        yield Partition(prefix)
        for p in range(min(cap, remaining), 0, -1):
            yield from gen(remaining - p, p, prefix + (p,))

    yield from gen(max_sum, max_part, ())


def rank_prefix_prob(prefix: tuple[int, ...], l: int, tail_cut: int = 64) -> float:
    """Measure of modules whose first rank entries match the given prefix.

    For prefix (i_1 >= ... >= i_j):
    eta / (l^(i_1 (i_1 + 1)) eta_{i_1} eta_{i_1 + 1}) * prod P(i_{k+1} | i_k)
    with eta the full unit product and P the conditional rank kernel.
    """
    check_modulus(l)
    if not prefix:
        raise ValueError("prefix must be nonempty")
    if any(i < 0 for i in prefix):
        raise ValueError("prefix entries must be nonnegative")
    if any(a < b for a, b in zip(prefix, prefix[1:])):
        raise ValueError("prefix must be non-increasing")
    i1 = prefix[0]
    value = eta_inf(l, tail_cut) / (
        float(l) ** (i1 * (i1 + 1)) * eta(l, i1) * eta(l, i1 + 1)
    )
    for a, b in zip(prefix, prefix[1:]):
        value *= float(p_cond(b, a, l))
    return value
