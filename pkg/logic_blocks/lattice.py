# logic_blocks/lattice.py
"""
Lattice core: integer generator matrices, exact membership, shell enumeration and
closest-vector quantization.

Generators are stored as exact integer tuples. Membership never touches floating
point: the inverse generator is kept as an integer matrix A plus a common
denominator D, so v is in the lattice iff v @ A is divisible by D.
"""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple
import itertools
import logging
import math

import numpy as np
import pandas as pd

from logic_blocks.errors import ConfigurationError, ParameterError, UnsupportedDimensionError

logger = logging.getLogger("lattice")

MAX_DIMENSION = 16
# rows per membership batch
_CHUNK_ROWS = 500_000
_TOL = 1e-9


class FamilyTag(str, Enum):
    CUBIC = "Cubic"
    BARNES_WALL = "BarnesWall"
    CUSTOM = "Custom"


class QuantizerKind(str, Enum):
    ROUND_TO_INTEGER = "RoundToInteger"
    DN_FAST = "DnFast"
    EXACT_ENUMERATION = "ExactEnumeration"


@dataclass(frozen=True)
class LatticeSpec:
    dimension: int
    generator: Tuple[Tuple[int, ...], ...]
    family_tag: FamilyTag
    d2min: Fraction
    kissing: int
    volume: Fraction
    coding_gain: float
    inverse_numerators: Tuple[Tuple[int, ...], ...] = field(repr=False, compare=False)
    inverse_denominator: int = field(repr=False, compare=False, default=1)

    @property
    def G(self) -> np.ndarray:
        return np.array(self.generator, dtype=np.int64)

    @property
    def G_inv(self) -> np.ndarray:
        return np.array(self.inverse_numerators, dtype=float) / self.inverse_denominator

    @property
    def coding_gain_db(self) -> float:
        return 10.0 * math.log10(self.coding_gain)


# ---------------- exact rational helpers ----------------
def _fraction_inverse(rows: Sequence[Sequence[int]]) -> List[List[Fraction]]:
    """Gauss-Jordan inverse over Fractions. Raises ParameterError when singular."""
    n = len(rows)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(rows)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ParameterError("generator matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _fraction_det(rows: Sequence[Sequence]) -> Fraction:
    m = [[Fraction(x) for x in row] for row in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return det


def _scaled_inverse(rows: Sequence[Sequence[int]]) -> Tuple[Tuple[Tuple[int, ...], ...], int]:
    inv = _fraction_inverse(rows)
    denom = 1
    for row in inv:
        for x in row:
            denom = denom * x.denominator // math.gcd(denom, x.denominator)
    nums = tuple(tuple(int(x * denom) for x in row) for row in inv)
    return nums, denom


def _as_int_rows(generator) -> Tuple[Tuple[int, ...], ...]:
    rows = []
    for row in generator:
        out = []
        for x in row:
            if Fraction(x).denominator != 1:
                raise ParameterError(f"generator entries must be integers, got {x!r}")
            out.append(int(x))
        rows.append(tuple(out))
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ParameterError("generator must be a nonempty square matrix")
    return tuple(rows)


def _make_spec(rows, family_tag: FamilyTag, d2min, kissing: int) -> LatticeSpec:
    n = len(rows)
    volume = abs(_fraction_det(rows))
    if volume == 0:
        raise ParameterError("generator matrix is singular")
    nums, denom = _scaled_inverse(rows)
    d2min = Fraction(d2min)
    gain = float(d2min) / float(volume) ** (2.0 / n)
    return LatticeSpec(
        dimension=n,
        generator=rows,
        family_tag=family_tag,
        d2min=d2min,
        kissing=int(kissing),
        volume=volume,
        coding_gain=gain,
        inverse_numerators=nums,
        inverse_denominator=denom,
    )


# ---------------- constructors ----------------
def cubic_generator(n: int) -> LatticeSpec:
    if n < 1:
        raise ParameterError("dimension must be >= 1")
    rows = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return _make_spec(rows, FamilyTag.CUBIC, 1, 2 * n)


def scaled_cubic(n: int, k: int) -> LatticeSpec:
    """k * Z^n, the coarse lattice of a cubic nesting."""
    if n < 1 or k < 1:
        raise ParameterError("dimension and scale must be >= 1")
    rows = tuple(tuple(k * int(i == j) for j in range(n)) for i in range(n))
    return _make_spec(rows, FamilyTag.CUBIC, k * k, 2 * n)


def barnes_wall_generator(m: int) -> LatticeSpec:
    """
    Integer Barnes-Wall generator in dimension 2^(m+1).

    Entry (i, j) of the Kronecker power of [[sqrt2, 0], [1, 1]] is nonzero iff the
    bits of j are a subset of the bits of i, and then equals sqrt2^k with k the
    number of zero bits of i. Dropping the irrational sqrt2 leaves 2^(k // 2).
    """
    if m < 0:
        raise ParameterError("m must be >= 0")
    n = 2 ** (m + 1)
    if n > MAX_DIMENSION:
        raise UnsupportedDimensionError(f"Barnes-Wall dimension {n} exceeds cap {MAX_DIMENSION}")
    bits = m + 1
    rows = []
    for i in range(n):
        zeros = bits - bin(i).count("1")
        value = 2 ** (zeros // 2)
        rows.append(tuple(value if (j & ~i) == 0 else 0 for j in range(n)))
    kissing = math.prod(2 ** i + 2 for i in range(1, m + 2))
    return _make_spec(tuple(rows), FamilyTag.BARNES_WALL, 2 ** m, kissing)


def lattice_from_generator(generator, family_tag: FamilyTag = FamilyTag.CUSTOM) -> LatticeSpec:
    """Wrap an arbitrary integer generator; d2min and kissing come from shell enumeration."""
    rows = _as_int_rows(generator)
    n = len(rows)
    if n > MAX_DIMENSION:
        raise UnsupportedDimensionError(f"dimension {n} exceeds cap {MAX_DIMENSION}")
    probe = _make_spec(rows, family_tag, 1, 1)
    bound = min(sum(x * x for x in row) for row in rows)
    shells = enumerate_shells(probe, bound)
    d2min = min(p for p, vecs in shells.items() if p > 0 and len(vecs))
    return _make_spec(rows, family_tag, d2min, len(shells[d2min]))


# ---------------- membership ----------------
def is_member(spec: LatticeSpec, v) -> bool:
    if len(v) != spec.dimension:
        raise ParameterError(f"vector length {len(v)} != lattice dimension {spec.dimension}")
    for j in range(spec.dimension):
        acc = sum(Fraction(v[i]) * spec.inverse_numerators[i][j] for i in range(spec.dimension))
        if (acc / spec.inverse_denominator).denominator != 1:
            return False
    return True


def members_mask(spec: LatticeSpec, vectors: np.ndarray) -> np.ndarray:
    """Vectorised membership for integer rows."""
    vectors = np.asarray(vectors, dtype=np.int64)
    if vectors.ndim == 1:
        vectors = vectors[None, :]
    if spec.inverse_denominator == 1:
        return np.ones(len(vectors), dtype=bool)
    a = np.array(spec.inverse_numerators, dtype=np.int64)
    return np.all((vectors @ a) % spec.inverse_denominator == 0, axis=1)


# ---------------- shell enumeration ----------------
def _magnitude_patterns(power: int, max_len: int, cap: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """Nonincreasing positive integers whose squares sum to power."""
    if power == 0:
        yield ()
        return
    if max_len == 0:
        return
    top = math.isqrt(power) if cap is None else min(cap, math.isqrt(power))
    for a in range(top, 0, -1):
        for rest in _magnitude_patterns(power - a * a, max_len - 1, a):
            yield (a,) + rest


def _placements(n: int, pattern: Tuple[int, ...]) -> Iterator[np.ndarray]:
    """Distinct nonnegative vectors carrying the multiset pattern, one value group at a time."""
    groups = [(value, len(list(g))) for value, g in itertools.groupby(pattern)]

    def place(free: Tuple[int, ...], gi: int, current: Dict[int, int]):
        if gi == len(groups):
            vec = np.zeros(n, dtype=np.int64)
            for pos, value in current.items():
                vec[pos] = value
            yield vec
            return
        value, count = groups[gi]
        for chosen in itertools.combinations(free, count):
            nxt = dict(current)
            nxt.update({pos: value for pos in chosen})
            rest = tuple(p for p in free if p not in chosen)
            yield from place(rest, gi + 1, nxt)

    yield from place(tuple(range(n)), 0, {})


def _signed_batch(abs_rows: np.ndarray, k: int) -> np.ndarray:
    signs = np.array(list(itertools.product((1, -1), repeat=k)), dtype=np.int64)
    out = np.repeat(abs_rows, len(signs), axis=0)
    nz = np.nonzero(abs_rows)
    cols = nz[1].reshape(len(abs_rows), k)
    tiled = np.tile(signs, (len(abs_rows), 1))
    row_idx = np.repeat(np.arange(len(out)), k).reshape(len(out), k)
    out[row_idx, np.repeat(cols, len(signs), axis=0)] *= tiled
    return out


def _lex_sorted(rows: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        return rows
    return rows[np.lexsort(rows.T[::-1])]


def enumerate_shell(spec: LatticeSpec, power: int) -> np.ndarray:
    """All lattice vectors with squared norm exactly `power`, lexicographically ordered."""
    n = spec.dimension
    if n > MAX_DIMENSION:
        raise UnsupportedDimensionError(f"enumeration capped at dimension {MAX_DIMENSION}")
    if power == 0:
        return np.zeros((1, n), dtype=np.int64)
    found = []
    for pattern in _magnitude_patterns(power, n):
        k = len(pattern)
        per_batch = max(1, _CHUNK_ROWS // (2 ** k))
        placements = _placements(n, pattern)
        while True:
            batch = list(itertools.islice(placements, per_batch))
            if not batch:
                break
            rows = _signed_batch(np.vstack(batch), k)
            keep = rows[members_mask(spec, rows)]
            if len(keep):
                found.append(keep)
    if not found:
        return np.zeros((0, n), dtype=np.int64)
    return _lex_sorted(np.vstack(found))


def enumerate_shells(spec: LatticeSpec, p_max: int) -> Dict[int, np.ndarray]:
    if p_max < 0:
        raise ParameterError("p_max must be >= 0")
    return {p: enumerate_shell(spec, p) for p in range(p_max + 1)}


def enumerate_by_power(spec: LatticeSpec, p_max: int) -> np.ndarray:
    """
    Lattice members with ||v||^2 <= p_max, ordered by ascending power then
    lexicographically. Shape (count, n), dtype int64.
    """
    shells = enumerate_shells(spec, p_max)
    out = np.vstack([shells[p] for p in range(p_max + 1)])
    logger.debug("enumerated %d vectors up to power %d in dimension %d", len(out), p_max, spec.dimension)
    return out


def shortest_vectors(spec: LatticeSpec) -> np.ndarray:
    if spec.d2min.denominator != 1:
        raise ConfigurationError("shortest-vector shells need an integral d2min")
    return enumerate_shell(spec, int(spec.d2min))


def dump_shells_csv(spec: LatticeSpec, p_max: int, path) -> Path:
    """Debug dump: one row per enumerated vector with its power."""
    vecs = enumerate_by_power(spec, p_max)
    df = pd.DataFrame(vecs, columns=[f"x{i}" for i in range(spec.dimension)])
    df.insert(0, "power", (vecs ** 2).sum(axis=1))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)
    return path


# ---------------- quantizers ----------------
def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5).astype(np.int64)


def _is_dn(spec: LatticeSpec) -> bool:
    return spec.volume == 2 and all(sum(row) % 2 == 0 for row in spec.generator)


def dn_fast(x: np.ndarray) -> np.ndarray:
    """
    Nearest point of D_n = {v in Z^n : sum(v) even}. Works on (..., n) arrays.

    f rounds every coordinate; g re-rounds the coordinate with the largest
    rounding error the other way (lowest index on ties, delta >= 0 rounds up).
    """
    x = np.asarray(x, dtype=float)
    f = _round_half_up(x)
    delta = x - f
    k = np.argmax(np.abs(delta), axis=-1)
    dk = np.take_along_axis(delta, k[..., None], axis=-1)[..., 0]
    g = f.copy()
    adjust = np.where(dk >= 0, 1, -1)
    np.put_along_axis(g, k[..., None], (np.take_along_axis(f, k[..., None], axis=-1)[..., 0] + adjust)[..., None], axis=-1)
    even = (f.sum(axis=-1) % 2 == 0)[..., None]
    return np.where(even, f, g)


def _zigzag(center: float) -> Iterator[int]:
    k = math.floor(center + 0.5)
    yield k
    lo, hi = k - 1, k + 1
    while True:
        if hi - center <= center - lo:
            yield hi
            hi += 1
        else:
            yield lo
            lo -= 1


def closest_vector(spec: LatticeSpec, x) -> np.ndarray:
    """
    Exact closest lattice point via depth-first Schnorr-Euchner enumeration.

    The search radius starts at the distance of the rounded-coefficient candidate,
    so the result is never worse than Babai rounding.
    """
    x = np.asarray(x, dtype=float)
    g = spec.G.astype(float)
    n = spec.dimension
    c0 = _round_half_up(x @ spec.G_inv)
    best = c0.copy()
    best_d = float(np.sum((x - c0 @ g) ** 2))

    q, r = np.linalg.qr(g.T)
    u = q.T @ x
    rr = r.tolist()
    coeffs = [0] * n

    def search(i: int, dist: float):
        nonlocal best, best_d
        offset = u[i] - sum(rr[i][j] * coeffs[j] for j in range(i + 1, n))
        center = offset / rr[i][i]
        for cand in _zigzag(center):
            d = dist + (offset - rr[i][i] * cand) ** 2
            if d > best_d + _TOL:
                break
            coeffs[i] = cand
            if i == 0:
                c = np.array(coeffs, dtype=np.int64)
                exact = float(np.sum((x - c @ g) ** 2))
                if exact < best_d - _TOL:
                    best, best_d = c, exact
            else:
                search(i - 1, d)

    search(n - 1, 0.0)
    return (best @ spec.G).astype(np.int64)


def quantize(spec: LatticeSpec, kind: QuantizerKind, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.dimension:
        raise ParameterError(f"input length {x.shape[-1]} != lattice dimension {spec.dimension}")
    kind = QuantizerKind(kind)
    if kind is QuantizerKind.ROUND_TO_INTEGER:
        if spec.volume != 1:
            raise ConfigurationError("RoundToInteger needs a unimodular (cubic) lattice")
        return _round_half_up(x)
    if kind is QuantizerKind.DN_FAST:
        if not _is_dn(spec):
            raise ConfigurationError("DnFast needs the even-coordinate-sum lattice D_n")
        return dn_fast(x)
    if x.ndim == 1:
        return closest_vector(spec, x)
    flat = x.reshape(-1, spec.dimension)
    return np.array([closest_vector(spec, row) for row in flat], dtype=np.int64).reshape(x.shape)


def default_quantizer(spec: LatticeSpec) -> QuantizerKind:
    if spec.volume == 1:
        return QuantizerKind.ROUND_TO_INTEGER
    if _is_dn(spec):
        return QuantizerKind.DN_FAST
    return QuantizerKind.EXACT_ENUMERATION


# ---------------- nesting ----------------
def nesting_matrix(fine: LatticeSpec, coarse: LatticeSpec) -> List[List[Fraction]]:
    if fine.dimension != coarse.dimension:
        raise ParameterError("nested lattices must share a dimension")
    inv = [[Fraction(x, fine.inverse_denominator) for x in row] for row in fine.inverse_numerators]
    n = fine.dimension
    return [[sum(Fraction(coarse.generator[i][k]) * inv[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def nested_check(fine: LatticeSpec, coarse: LatticeSpec) -> bool:
    a = nesting_matrix(fine, coarse)
    if any(x.denominator != 1 for row in a for x in row):
        return False
    return abs(_fraction_det(a)) > 1


def nested_voronoi_set(fine: LatticeSpec, coarse: LatticeSpec) -> np.ndarray:
    """
    Fine-lattice points in the zero-centred Voronoi cell of a coarse s*Z^n lattice,
    the half-open box [-s/2, s/2)^n, in power-then-lexicographic order.
    """
    if not nested_check(fine, coarse):
        raise ConfigurationError("coarse lattice is not nested in the fine lattice")
    s = coarse.generator[0][0]
    n = coarse.dimension
    diagonal = all(coarse.generator[i][j] == (s if i == j else 0) for i in range(n) for j in range(n))
    if not diagonal:
        raise ConfigurationError("Voronoi cell extraction supports scaled cubic coarse lattices only")
    lo = math.ceil(-s / 2)
    hi = math.ceil(s / 2)  # exclusive
    grid = np.array(list(itertools.product(range(lo, hi), repeat=n)), dtype=np.int64)
    grid = grid[members_mask(fine, grid)]
    power = (grid ** 2).sum(axis=1)
    keys = [grid[:, j] for j in range(n - 1, -1, -1)] + [power]
    return grid[np.lexsort(keys)]
