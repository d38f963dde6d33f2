"""Combinatorics of l-additive systems on product spaces.

A cube over a coordinate set S carries an l-tuple of labels in each
S-coordinate and a single label elsewhere; its faces are multisets of
lower cubes counted with multiplicity.  An l-additive system attaches
to every S a value group, a domain of cubes closed under faces, and a
function obeying the l-term additivity axiom.

Point functions differentiate to cube functions by summing over the
bottom face with multiplicity.  The module computes densities of the
zero-sets against the recursive lower bound, dimensions of the spaces
of differentials, exact unbalanced-image fractions at micro scale, and
product-subset extraction from dense sets.

Labels are opaque hashable tokens; nothing here assumes they are primes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from .flinalg import check_modulus


@dataclass(frozen=True)
class ProductSpace:
    """Product of pairwise disjoint finite label sets."""

    factors: tuple[tuple, ...]

    def __post_init__(self):
        seen: set = set()
        for f in self.factors:
            if not f:
                raise ValueError("factors must be nonempty")
            fs = set(f)
            if len(fs) != len(f):
                raise ValueError("labels within a factor must be distinct")
            if seen & fs:
                raise ValueError("factors must be pairwise disjoint")
            seen |= fs
        object.__setattr__(self, "factors", tuple(tuple(f) for f in self.factors))

    @property
    def d(self) -> int:
        return len(self.factors)

    @property
    def size(self) -> int:
        return math.prod(len(f) for f in self.factors)

    def points(self):
        return product(*self.factors)

    def index_maps(self) -> list[dict]:
        return [{x: i for i, x in enumerate(f)} for f in self.factors]


@dataclass(frozen=True)
class Cube:
    """Element of the S-cube space: l-tuples on S, single labels elsewhere."""

    S: frozenset
    coords: tuple

    def tuple_at(self, i: int) -> tuple:
        if i not in self.S:
            raise ValueError(f"coordinate {i} is not expanded")
        return self.coords[i]

    def bottom_points(self):
        """The underlying set of the bottom face x(empty)."""
        choices = [
            c if isinstance(c, tuple) and i in self.S else (c,)
            for i, c in enumerate(self.coords)
        ]
        return set(product(*choices))


@dataclass(frozen=True)
class FaceMultiset:
    """Face multiset x(T) of a cube: lower cubes with multiplicities."""

    base: Cube
    T: frozenset
    counts: dict

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def support(self):
        return set(self.counts)


def cube_space(space: ProductSpace, S, l: int):
    """Iterate all cubes of the S-cube space."""
    S = frozenset(S)
    choices = [
        list(product(f, repeat=l)) if i in S else list(f)
        for i, f in enumerate(space.factors)
    ]
    for coords in product(*choices):
        yield Cube(S=S, coords=tuple(coords))


def cube_face(x: Cube, T) -> FaceMultiset:
    """The multiset of T-cubes obtained by collapsing the coordinates in S - T.

    Each collapsed coordinate independently picks one slot of its
    l-tuple; the multiplicity of a face is the product over collapsed
    coordinates of the number of slots carrying the chosen label.
    """
    T = frozenset(T)
    if not T <= x.S:
        raise ValueError("T must be a subset of the cube's coordinate set")
    U = sorted(x.S - T)
    counts: dict[Cube, int] = {}
    label_counts = []
    for i in U:
        tup = x.coords[i]
        cnt: dict = {}
        for lab in tup:
            cnt[lab] = cnt.get(lab, 0) + 1
        label_counts.append(sorted(cnt.items()))
    for picks in product(*label_counts):
        coords = list(x.coords)
        mult = 1
        for (lab, c), i in zip(picks, U):
            coords[i] = lab
            mult *= c
        face = Cube(S=T, coords=tuple(coords))
        counts[face] = counts.get(face, 0) + mult
    return FaceMultiset(base=x, T=T, counts=counts)


# ---------------------------------------------------------------------------
# array-backed additive systems
#
# For a coordinate set S the cube space is stored as an array with l
# axes per S-coordinate and one axis per other coordinate, in
# coordinate order.  Boolean arrays hold the domains, and the value
# function is an integer array with one leading axis per value-group
# component.


def _axes_of(space: ProductSpace, S, l: int) -> list[int]:
    shape = []
    for i, f in enumerate(space.factors):
        shape.extend([len(f)] * (l if i in S else 1))
    return shape


def _axis_offsets(space: ProductSpace, S, l: int) -> list[int]:
    """Starting axis of each coordinate in the S-cube array."""
    out = []
    pos = 0
    for i in range(space.d):
        out.append(pos)
        pos += l if i in S else 1
    return out


def _expand_lower(
    space: ProductSpace, S: frozenset, T: frozenset, slots: dict[int, int],
    arr: np.ndarray, l: int,
) -> np.ndarray:
    """Broadcast a T-cube array into the S-cube shape.

    For each coordinate in S - T the lower array has a single axis; it
    is routed to the chosen slot of that coordinate's l axes and
    broadcast over the rest.
    """
    s_axes = _axis_offsets(space, S, l)
    view = arr
    for i in range(space.d):
        if i in S and i not in T:
            base = s_axes[i]
            slot = slots[i]
            for new_ax in range(l):
                if new_ax != slot:
                    view = np.expand_dims(view, axis=base + new_ax)
    return np.broadcast_to(view, _axes_of(space, S, l))


@dataclass
class Layer:
    """Data of one coordinate set: value group dimension, domains, function."""

    dim: int
    Y: np.ndarray
    Y0: np.ndarray
    F: np.ndarray  # shape (dim, *cube_shape), entries mod l


@dataclass
class AdditiveSystem:
    space: ProductSpace
    l: int
    layers: dict[frozenset, Layer]

    def layer(self, S) -> Layer:
        return self.layers[frozenset(S)]

    def value_group_sizes(self) -> dict[frozenset, int]:
        return {S: self.l**lay.dim for S, lay in self.layers.items()}

    def max_value_group(self) -> int:
        return max(self.value_group_sizes().values())

    def density(self, S) -> float:
        lay = self.layer(S)
        return float(lay.Y0.sum()) / lay.Y0.size

    def cube_index(self, x: Cube) -> tuple:
        maps = self.space.index_maps()
        idx = []
        for i, c in enumerate(x.coords):
            if i in x.S:
                idx.extend(maps[i][lab] for lab in c)
            else:
                idx.append(maps[i][c])
        return tuple(idx)


def subsets(d: int):
    items = list(range(d))
    for r in range(d + 1):
        for combo in combinations(items, r):
            yield frozenset(combo)


def face_closure_mask(system: AdditiveSystem, S: frozenset) -> np.ndarray:
    """Mask of cubes whose every proper face lies in the lower zero-sets."""
    space, l = system.space, system.l
    mask = np.ones(_axes_of(space, S, l), dtype=bool)
    for T in subsets(space.d):
        if not (T < S):
            continue
        lower = system.layers[T].Y0
        U = sorted(S - T)
        for slot_choice in product(range(l), repeat=len(U)):
            slots = dict(zip(U, slot_choice))
            mask &= _expand_lower(space, S, T, slots, lower, l)
    return mask


def differential_array(
    space: ProductSpace, S: frozenset, g: np.ndarray, l: int
) -> np.ndarray:
    """dF of a point array over the full S-cube space (component-wise mod l).

    g has one leading component axis and one spatial axis per coordinate.
    """
    S = frozenset(S)
    out = np.zeros((g.shape[0], *_axes_of(space, S, l)), dtype=np.int64)
    offsets = _axis_offsets(space, S, l)
    for slot_choice in product(range(l), repeat=len(S)):
        slots = dict(zip(sorted(S), slot_choice))
        # route every S-coordinate's point axis to its chosen tuple slot
        view = g
        for i in sorted(S):
            base = offsets[i] + 1  # +1 for the component axis
            slot = slots[i]
            for new_ax in range(l):
                if new_ax != slot:
                    view = np.expand_dims(view, axis=base + new_ax)
        out += np.broadcast_to(view, out.shape)
    return out % l


def build_additive_system(
    space: ProductSpace,
    l: int,
    base_domain: np.ndarray,
    base_values: np.ndarray,
    point_functions: dict[frozenset, np.ndarray],
) -> AdditiveSystem:
    """Assemble a valid system from base data and per-set point functions.

    The empty-set layer is (base_domain, zero set of base_values); for
    S nonempty the domain is the face closure and the value function is
    the differential of the given point function, which satisfies the
    additivity axiom by construction.
    """
    check_modulus(l)
    layers: dict[frozenset, Layer] = {}
    F0 = base_values % l
    Y0_empty = base_domain & (F0 == 0).all(axis=0)
    layers[frozenset()] = Layer(dim=F0.shape[0], Y=base_domain, Y0=Y0_empty, F=F0)
    system = AdditiveSystem(space=space, l=l, layers=layers)
    for S in sorted(subsets(space.d), key=len):
        if not S:
            continue
        g = point_functions[S] % l
        Y = face_closure_mask(system, S)
        F = differential_array(space, S, g, l)
        Y0 = Y & (F == 0).all(axis=0)
        layers[S] = Layer(dim=g.shape[0], Y=Y, Y0=Y0, F=F)
    return system


def random_additive_system(
    rng: np.random.Generator,
    l: int = 3,
    max_d: int = 3,
    max_size: int = 6,
    cost_cap: int = 300_000,
    max_dim: int = 2,
) -> AdditiveSystem:
    """A random valid system within the size bounds, cost-capped.

    Sizes are resampled until the total cube count over all coordinate
    sets fits the cap, so every factor size up to max_size remains
    reachable (large sizes pair with small ones).
    """
    while True:
        d = int(rng.integers(1, max_d + 1))
        sizes = [int(rng.integers(1, max_size + 1)) for _ in range(d)]
        if sum(math.prod([n**l if i in S else n for i, n in enumerate(sizes)])
               for S in subsets(d)) <= cost_cap:
            break
    offset = 0
    factors = []
    for n in sizes:
        factors.append(tuple(range(offset, offset + n)))
        offset += n + 1
    space = ProductSpace(factors=tuple(factors))
    shape = tuple(len(f) for f in space.factors)
    dim0 = int(rng.integers(1, max_dim + 1))
    base_domain = rng.random(shape) < rng.uniform(0.5, 1.0)
    # bias values toward zero so zero-set densities are usually positive
    base_values = np.where(
        rng.random((dim0, *shape)) < 0.5, 0, rng.integers(0, l, (dim0, *shape))
    ).astype(np.int64)
    point_functions = {}
    for S in subsets(d):
        if not S:
            continue
        dim = int(rng.integers(1, max_dim + 1))
        point_functions[S] = rng.integers(0, l, (dim, *shape), dtype=np.int64)
    return build_additive_system(space, l, base_domain, base_values, point_functions)


# ---------------------------------------------------------------------------
# validation and the density bound


@dataclass
class Diagnostics:
    valid: bool
    violation: str | None = None


def validate_additive_system(system: AdditiveSystem) -> Diagnostics:
    """Exhaustively check the zero-set, face-closure and additivity axioms."""
    space, l = system.space, system.l
    d = space.d
    for S in subsets(d):
        if S not in system.layers:
            return Diagnostics(False, f"missing layer {sorted(S)}")
    for S, lay in system.layers.items():
        expected_shape = tuple(_axes_of(space, S, l))
        if lay.Y.shape != expected_shape or lay.Y0.shape != expected_shape:
            return Diagnostics(False, f"bad domain shapes at {sorted(S)}")
        if lay.F.shape[1:] != expected_shape:
            return Diagnostics(False, f"bad value shape at {sorted(S)}")
        zero = (lay.F % l == 0).all(axis=0)
        if not np.array_equal(lay.Y0, lay.Y & zero):
            return Diagnostics(False, f"zero-set mismatch at {sorted(S)}")
        if (lay.Y0 & ~lay.Y).any():
            return Diagnostics(False, f"zero set escapes domain at {sorted(S)}")
    for S in subsets(d):
        if not S:
            continue
        expected = face_closure_mask(system, S)
        if not np.array_equal(system.layers[S].Y, expected):
            return Diagnostics(False, f"face closure violated at {sorted(S)}")
    viol = _additivity_violation(system)
    if viol is not None:
        return Diagnostics(False, viol)
    return Diagnostics(True, None)


def _additivity_violation(system: AdditiveSystem) -> str | None:
    """First additivity violation, or None; loops over axis frames."""
    space, l = system.space, system.l
    for S in subsets(space.d):
        if not S:
            continue
        lay = system.layers[S]
        offsets = _axis_offsets(space, S, l)
        for s in sorted(S):
            n = len(space.factors[s])
            base = offsets[s]
            # move coordinate s's l axes to the front
            order = list(range(lay.Y.ndim))
            s_axes = list(range(base, base + l))
            rest = [a for a in order if a not in s_axes]
            Y = np.transpose(lay.Y, s_axes + rest).reshape((n,) * l + (-1,))
            F = np.transpose(lay.F, [0] + [a + 1 for a in s_axes] + [a + 1 for a in rest])
            F = F.reshape((lay.dim,) + (n,) * l + (-1,))
            for p in product(range(n), repeat=l - 1):
                for q in product(range(n), repeat=l):
                    m = Y[q]
                    for qi in q:
                        m = m & Y[p + (qi,)]
                    if not m.any():
                        continue
                    lhs = np.zeros_like(F[(slice(None),) + q])
                    for qi in q:
                        lhs = lhs + F[(slice(None),) + p + (qi,)]
                    rhs = F[(slice(None),) + q]
                    bad = ((lhs - rhs) % l != 0).any(axis=0) & m
                    if bad.any():
                        return (
                            f"additivity fails at S={sorted(S)}, s={s}, "
                            f"p={p}, q={q}"
                        )
    return None


@dataclass
class DensityReport:
    delta: float
    max_group: int
    densities: dict
    bounds: dict
    ok: bool


def density_bound_check(system: AdditiveSystem) -> DensityReport:
    """Zero-set density of every layer against delta^(l^|S|) a^(-(l+1)^(|S|+1))."""
    l = system.l
    delta = system.density(frozenset())
    a = system.max_value_group()
    densities = {}
    bounds = {}
    ok = True
    for S in system.layers:
        dens = system.density(S)
        bound = delta ** (l ** len(S)) * a ** (-((l + 1) ** (len(S) + 1)))
        densities[S] = dens
        bounds[S] = bound
        if dens < bound:
            ok = False
    return DensityReport(delta=delta, max_group=a, densities=densities, bounds=bounds, ok=ok)


# ---------------------------------------------------------------------------
# differentials of point functions on subsets, balance, micro-scale counts


def differential(F: dict, space: ProductSpace, S, l: int) -> dict:
    """dF on every S-cube whose bottom face stays inside the domain of F."""
    S = frozenset(S)
    Z = set(F)
    out = {}
    per_coord = [sorted({z[i] for z in Z}) for i in range(space.d)]
    choices = [
        list(product(per_coord[i], repeat=l)) if i in S else per_coord[i]
        for i in range(space.d)
    ]
    for coords in product(*choices):
        cube = Cube(S=S, coords=tuple(coords))
        pts = cube.bottom_points()
        if not pts <= Z:
            continue
        val = 0
        for pt, mult in _bottom_multiplicities(cube).items():
            val += mult * F[pt]
        out[cube] = val % l
    return out


def _bottom_multiplicities(cube: Cube) -> dict:
    face = cube_face(cube, frozenset())
    return {f.coords: c for f, c in face.counts.items()}


def is_balanced(F: dict, eps: float, l: int) -> bool:
    """Every fiber of F within (1/l +- eps) of its share of the domain."""
    if not F:
        raise ValueError("empty domain")
    n = len(F)
    counts = [0] * l
    for v in F.values():
        counts[v % l] += 1
    lo, hi = (1 / l - eps) * n, (1 / l + eps) * n
    return all(lo <= c <= hi for c in counts)


def _np_rank_mod(A: np.ndarray, l: int) -> int:
    """Rank over F_l of an integer matrix; rows should be the short side."""
    A = (A % l).astype(np.int64)
    if A.shape[0] > A.shape[1]:
        A = A.T.copy()
    rows, cols = A.shape
    inv_table = np.array([0] + [pow(x, l - 2, l) for x in range(1, l)], dtype=np.int64)
    r = 0
    for _ in range(rows):
        remaining = A[r:]
        col_any = (remaining != 0).any(axis=0)
        if not col_any.any():
            break
        c = int(col_any.argmax())
        pivot = r + int((remaining[:, c] != 0).argmax())
        if pivot != r:
            A[[r, pivot]] = A[[pivot, r]]
        A[r] = A[r] * inv_table[A[r, c]] % l
        fac = A[:, c].copy()
        fac[r] = 0
        A -= fac[:, None] * A[r][None, :]
        A %= l
        r += 1
        if r == rows:
            break
    return r


def differential_matrix(space: ProductSpace, S, l: int) -> np.ndarray:
    """Multiplicity matrix of the differential on the full space.

    Rows are indexed by points, columns by S-cubes, built as the
    Kronecker product of per-coordinate slot-count matrices (identity on
    coordinates outside S); entry = multiplicity of the point in the
    cube's bottom face, mod l.
    """
    S = frozenset(S)
    out = np.ones((1, 1), dtype=np.int64)
    for i, f in enumerate(space.factors):
        n = len(f)
        if i in S:
            M = np.zeros((n, n**l), dtype=np.int64)
            for col, tup in enumerate(product(range(n), repeat=l)):
                for v in tup:
                    M[v, col] += 1
        else:
            M = np.eye(n, dtype=np.int64)
        out = np.kron(out, M)
    return out % l


def g_space_dimension(space: ProductSpace, S, l: int) -> int:
    """Dimension of the image of the differential, by explicit rank.

    Asserts agreement with prod_{i in S}(|X_i| - 1) * prod_{j not in S} |X_j|.
    """
    check_modulus(l)
    S = frozenset(S)
    D = differential_matrix(space, S, l)
    dim = _np_rank_mod(D, l)
    formula = math.prod(
        len(f) - 1 if i in S else len(f) for i, f in enumerate(space.factors)
    )
    if dim != formula:
        raise AssertionError(
            f"image dimension {dim} differs from the product formula {formula}"
        )
    return dim


def unbalanced_image_fraction(
    Z: list, space: ProductSpace, S, eps: float, l: int
) -> tuple[float, float]:
    """Exact fraction of differential images witnessed by unbalanced functions,
    with the micro-scale tail bound it must not exceed.

    Z must project to a single point outside S.  All l^|Z| functions are
    enumerated; images are identified through the reduced row space of
    the multiplicity matrix, so the fraction |G_S(eps, Z)| / |G_S(Z)| is
    exact.  Returns (fraction, bound).
    """
    S = frozenset(S)
    check_modulus(l)
    nZ = len(Z)
    if l**nZ > 10**7:
        raise ValueError("domain too large for full function enumeration")
    outside = {tuple(z[i] for i in range(space.d) if i not in S) for z in Z}
    if len(outside) != 1:
        raise ValueError("Z must be constant on the coordinates outside S")
    zindex = {z: i for i, z in enumerate(Z)}
    cubes = []
    per_coord = [sorted({z[i] for z in Z}) for i in range(space.d)]
    choices = [
        list(product(per_coord[i], repeat=l)) if i in S else per_coord[i]
        for i in range(space.d)
    ]
    Zset = set(Z)
    for coords in product(*choices):
        cube = Cube(S=S, coords=tuple(coords))
        if cube.bottom_points() <= Zset:
            cubes.append(cube)
    D = np.zeros((len(cubes), nZ), dtype=np.int64)
    for row, cube in enumerate(cubes):
        for pt, mult in _bottom_multiplicities(cube).items():
            D[row, zindex[pt]] += mult
    D %= l

    R = _row_space_basis(D, l)
    rnk = R.shape[0]
    n_images = l**rnk

    unbalanced_ids: set[int] = set()
    lo = (1 / l - eps) * nZ
    hi = (1 / l + eps) * nZ
    weights = l ** np.arange(rnk, dtype=np.int64) if rnk else np.zeros(0, dtype=np.int64)
    chunk = 1 << 14
    total = l**nZ
    start = 0
    while start < total:
        stop = min(start + chunk, total)
        idx = np.arange(start, stop, dtype=np.int64)
        digits = np.empty((stop - start, nZ), dtype=np.int64)
        t = idx.copy()
        for c in range(nZ):
            digits[:, c] = t % l
            t //= l
        counts = np.stack([(digits == a).sum(axis=1) for a in range(l)], axis=1)
        unbalanced = ((counts < lo) | (counts > hi)).any(axis=1)
        if unbalanced.any():
            im = digits[unbalanced] @ R.T % l
            ids = im @ weights
            unbalanced_ids.update(int(v) for v in ids)
        start = stop
    fraction = len(unbalanced_ids) / n_images

    sizes = [len(space.factors[i]) for i in S]
    n = min(sizes)
    pi_S_size = math.prod(sizes)
    delta = nZ / pi_S_size
    bound = 2 * l * math.exp(
        pi_S_size * (-delta * eps**2 + math.log(l) * 2 ** (len(S) + 2) * n ** (-1.0 / l ** len(S)))
    )
    return fraction, bound


def _row_space_basis(A: np.ndarray, l: int) -> np.ndarray:
    """Reduced basis of the row space of A over F_l (rows x cols, small)."""
    A = (A % l).astype(np.int64).copy()
    rows, cols = A.shape
    inv_table = [0] + [pow(x, l - 2, l) for x in range(1, l)]
    basis: list[np.ndarray] = []
    pivots: list[int] = []
    for i in range(rows):
        row = A[i].copy()
        for b, p in zip(basis, pivots):
            if row[p]:
                row = (row - row[p] * b) % l
        nz = np.flatnonzero(row)
        if nz.size:
            p = int(nz[0])
            row = row * inv_table[int(row[p])] % l
            for bi, (b, bp) in enumerate(zip(basis, pivots)):
                if b[p]:
                    basis[bi] = (b - b[p] * row) % l
            basis.append(row)
            pivots.append(p)
    if not basis:
        return np.zeros((0, cols), dtype=np.int64)
    order = np.argsort(pivots)
    return np.stack([basis[i] for i in order])


# ---------------------------------------------------------------------------
# product-subset extraction


def ram_hypothesis_holds(n: int, d: int, delta: float, r: int) -> bool:
    """The extraction hypothesis r <= n (2^(-d-1) delta)^(2 r^(d-1))."""
    if delta <= 0:
        return False
    return r <= n * (2 ** (-d - 1) * delta) ** (2 * r ** (d - 1))


def find_product_subset(
    Y: set, space: ProductSpace, r: int, search_limit: int = 200_000
) -> tuple | None:
    """Search for Z_1 x ... x Z_d inside Y with every |Z_i| = r.

    Exhaustive over label combinations while the combination count is
    small, greedy (most-covered labels first) beyond that.  Under the
    extraction hypothesis a witness exists; failure to find one at
    feasible sizes is treated as a bug by the test suite.
    """
    d = space.d
    if d == 1:
        hits = sorted(y[0] for y in Y)
        if len(hits) >= r:
            return (tuple(hits[:r]),)
        return None

    first = space.factors[0]
    n_combos = math.comb(len(first), r)
    sub_space = ProductSpace(factors=space.factors[1:])

    def recurse(z1) -> tuple | None:
        fiber = {y[1:] for y in Y if all((lab,) + y[1:] in Y for lab in z1)}
        if not fiber:
            return None
        rest = find_product_subset(fiber, sub_space, r, search_limit)
        if rest is not None:
            return (tuple(z1),) + rest
        return None

    if n_combos <= search_limit:
        candidates = combinations(sorted(first), r)
    else:
        counts = {lab: 0 for lab in first}
        for y in Y:
            counts[y[0]] += 1
        ranked = sorted(first, key=lambda lab: -counts[lab])
        candidates = combinations(ranked[: max(r + 4, 2 * r)], r)
    for z1 in candidates:
        out = recurse(z1)
        if out is not None:
            return out
    return None
