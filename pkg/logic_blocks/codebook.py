# logic_blocks/codebook.py
"""
Codebook block - finite transmit signal sets in real-stacked coordinates.

Families:
 - SLM-CB: Z^{2Nt} points with every coordinate in {-M/2, ..., M/2}.
 - SLM-BW: Barnes-Wall points up to a power limit.
 - SM / QSM / SMX baselines built from QAM, cross-QAM or PSK alphabets.

Real layout: in-phase of antenna t at index t, quadrature at Nt + t.
Vectors are kept in pre-normalization coordinates; `scale` is applied at transmit.
"""
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union
import itertools
import json
import math

import numpy as np
from jsonschema import ValidationError, validate

from logic_blocks.errors import ConfigurationError, ParameterError, UnsupportedDimensionError
from logic_blocks.lattice import (
    LatticeSpec,
    barnes_wall_generator,
    cubic_generator,
    enumerate_by_power,
    shortest_vectors,
)

HEADER_SCHEMA_PATH = Path(__file__).resolve().parents[1] / "schemas" / "codebook_header_schema.json"


class Family(str, Enum):
    SLM_CB = "SLM-CB"
    SLM_BW = "SLM-BW"
    SM = "SM"
    QSM = "QSM"
    SMX = "SMX"


LATTICE_FAMILIES = (Family.SLM_CB, Family.SLM_BW)


@dataclass(frozen=True, eq=False)
class Codebook:
    family: Family
    n_t: int
    vectors: np.ndarray
    param: Union[int, str]
    bits: int
    n_selected: int
    scale: float = 1.0
    lattice: Optional[LatticeSpec] = None

    @property
    def dimension(self) -> int:
        return 2 * self.n_t

    @property
    def selected(self) -> np.ndarray:
        return self.vectors[: self.n_selected]

    @property
    def transmit_vectors(self) -> np.ndarray:
        return self.scale * self.selected.astype(float)

    @property
    def is_lattice(self) -> bool:
        return self.family in LATTICE_FAMILIES

    @property
    def p_max_selected(self):
        return (self.selected.astype(float) ** 2).sum(axis=1).max()

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True, eq=False)
class NeighborSet:
    vectors: np.ndarray

    def __len__(self) -> int:
        return len(self.vectors)


def _power_order(vectors: np.ndarray) -> np.ndarray:
    power = (vectors.astype(float) ** 2).sum(axis=1)
    if vectors.dtype.kind == "f":
        power = np.round(power, 9)
        cols = np.round(vectors, 9)
    else:
        cols = vectors
    keys = [cols[:, j] for j in range(vectors.shape[1] - 1, -1, -1)] + [power]
    return vectors[np.lexsort(keys)]


def _new(family: Family, n_t: int, vectors: np.ndarray, param, lattice=None) -> Codebook:
    vectors = _power_order(vectors)
    return Codebook(
        family=family,
        n_t=n_t,
        vectors=vectors,
        param=param,
        bits=int(math.floor(math.log2(len(vectors)))),
        n_selected=len(vectors),
        lattice=lattice,
    )


# ---------------- lattice codebooks ----------------
def build_slm_cb(n_t: int, m: int) -> Codebook:
    if n_t < 1:
        raise ParameterError("n_t must be >= 1")
    if m < 0 or m % 2:
        raise ParameterError(f"SLM-CB needs an even nonnegative M, got {m}")
    levels = range(-m // 2, m // 2 + 1)
    vectors = np.array(list(itertools.product(levels, repeat=2 * n_t)), dtype=np.int64)
    return _new(Family.SLM_CB, n_t, vectors, m, cubic_generator(2 * n_t))


def build_slm_bw(n_t: int, p_max: int) -> Codebook:
    if n_t not in (1, 2, 4, 8):
        raise UnsupportedDimensionError(f"SLM-BW needs 2*n_t in {{2,4,8,16}}, got n_t={n_t}")
    if p_max < 1:
        raise ParameterError("p_max must be >= 1")
    spec = barnes_wall_generator(int(math.log2(2 * n_t)) - 1)
    return _new(Family.SLM_BW, n_t, enumerate_by_power(spec, p_max), p_max, spec)


# ---------------- baseline alphabets ----------------
def qam_points(order: int) -> np.ndarray:
    """Square or cross QAM on the odd-integer grid; order 2 is BPSK {-1, +1}."""
    if order == 2:
        return np.array([-1.0, 1.0], dtype=complex)
    side = math.isqrt(order)
    if side * side == order and side % 2 == 0:
        levels = np.arange(-(side - 1), side, 2)
        return np.array([complex(i, q) for i in levels for q in levels])
    k2 = int(round(math.log2(order)))
    if 2 ** k2 == order and k2 % 2 == 1 and order >= 32:
        k = (k2 - 1) // 2
        side = 3 * 2 ** (k - 1)
        inner = side - 2 * 2 ** (k - 2) - 1
        levels = np.arange(-(side - 1), side, 2)
        return np.array(
            [complex(i, q) for i in levels for q in levels if not (abs(i) > inner and abs(q) > inner)]
        )
    raise ParameterError(f"unsupported QAM order {order}")


def psk_points(order: int) -> np.ndarray:
    if order < 2:
        raise ParameterError("PSK order must be >= 2")
    return np.exp(2j * np.pi * np.arange(order) / order)


def constellation_points(label: str) -> np.ndarray:
    """Parse labels like '16qam', '32qam', '8psk'."""
    text = label.strip().lower().replace("-", "")
    for suffix, builder in (("qam", qam_points), ("psk", psk_points)):
        if text.endswith(suffix):
            try:
                order = int(text[: -len(suffix)])
            except ValueError:
                raise ParameterError(f"bad constellation label {label!r}")
            return builder(order)
    raise ParameterError(f"bad constellation label {label!r}")


def _as_real(points: np.ndarray) -> np.ndarray:
    re, im = points.real, points.imag
    if np.allclose(re, np.round(re)) and np.allclose(im, np.round(im)):
        return np.stack([np.round(re), np.round(im)], axis=1).astype(np.int64)
    return np.stack([re, im], axis=1)


def _check_bits(count: int, kind: str):
    b = math.log2(count)
    if abs(b - round(b)) > 1e-12:
        raise ParameterError(f"{kind} bit count log2({count}) is not an integer")


def build_baseline(kind, n_t: int, constellation: Union[str, int, Sequence[str]]) -> Codebook:
    """
    SM: one active antenna. QSM: independent in-phase/quadrature antennas.
    SMX: every antenna active; accepts one constellation per antenna.
    An integer constellation means square QAM of that order.
    """
    kind = Family(kind)
    if kind in LATTICE_FAMILIES:
        raise ConfigurationError(f"{kind.value} is not a baseline family")
    if n_t < 1:
        raise ParameterError("n_t must be >= 1")
    if isinstance(constellation, int):
        constellation = f"{constellation}qam"
    if kind is Family.SMX:
        labels = [constellation] * n_t if isinstance(constellation, str) else list(constellation)
        if len(labels) != n_t:
            raise ParameterError("SMX needs one constellation per transmit antenna")
        alphabets = [_as_real(constellation_points(lbl)) for lbl in labels]
        for a in alphabets:
            _check_bits(len(a), "SMX")
        if len(set(labels)) > 1:
            # mixed orders: each antenna carries unit mean energy before the common scale
            alphabets = [a / math.sqrt(float((a.astype(float) ** 2).sum(axis=1).mean())) for a in alphabets]
        float_mode = any(a.dtype.kind == "f" for a in alphabets)
        rows = []
        for combo in itertools.product(*alphabets):
            v = np.zeros(2 * n_t, dtype=float if float_mode else np.int64)
            for t, (i, q) in enumerate(combo):
                v[t], v[n_t + t] = i, q
            rows.append(v)
        return _new(kind, n_t, np.array(rows), "/".join(labels))

    if not isinstance(constellation, str):
        raise ParameterError(f"{kind.value} takes a single constellation")
    alphabet = _as_real(constellation_points(constellation))
    rows = []
    if kind is Family.SM:
        _check_bits(n_t * len(alphabet), "SM")
        for t in range(n_t):
            for i, q in alphabet:
                v = np.zeros(2 * n_t, dtype=alphabet.dtype)
                v[t], v[n_t + t] = i, q
                rows.append(v)
    else:
        _check_bits(n_t * n_t * len(alphabet), "QSM")
        if np.any(np.isclose(alphabet, 0)):
            raise ParameterError("QSM needs symbols with nonzero in-phase and quadrature parts")
        for t_i in range(n_t):
            for t_q in range(n_t):
                for i, q in alphabet:
                    v = np.zeros(2 * n_t, dtype=alphabet.dtype)
                    v[t_i], v[n_t + t_q] = i, q
                    rows.append(v)
    return _new(kind, n_t, np.array(rows), constellation.lower())


# ---------------- rate selection / normalization ----------------
def select_rate(cb: Codebook, k: Optional[int] = None, size: Optional[int] = None) -> Codebook:
    """Keep the 2^k (or `size`) lowest-power entries."""
    if (k is None) == (size is None):
        raise ParameterError("give exactly one of k or size")
    if k is not None:
        if k < 1:
            raise ParameterError("k must be >= 1")
        size = 2 ** k
    if size < 1 or size > len(cb):
        raise ParameterError(f"cannot select {size} of {len(cb)} vectors")
    bits = k if k is not None else int(math.floor(math.log2(size)))
    return replace(cb, n_selected=size, bits=bits)


def normalize(cb: Codebook, e_s: Optional[float] = None) -> Codebook:
    """Set scale so the mean of scale^2 * ||v||^2 over the selection equals e_s (default n_t)."""
    e_s = float(cb.n_t if e_s is None else e_s)
    if e_s <= 0:
        raise ParameterError("E_s must be positive")
    total = float((cb.selected.astype(float) ** 2).sum())
    if total == 0:
        raise ParameterError("cannot normalize an all-zero selection")
    return replace(cb, scale=math.sqrt(cb.n_selected * e_s / total))


def neighbor_set(cb: Codebook) -> NeighborSet:
    if not cb.is_lattice or cb.lattice is None:
        raise ConfigurationError(f"{cb.family.value} has no parent lattice")
    return NeighborSet(shortest_vectors(cb.lattice))


# ---------------- bit mapping ----------------
def bits_to_index(bits: str, k: int) -> int:
    if len(bits) != k or any(b not in "01" for b in bits):
        raise ParameterError(f"expected a {k}-bit string, got {bits!r}")
    return int(bits, 2)


def index_to_bits(index: int, k: int) -> str:
    if not 0 <= index < 2 ** k:
        raise ParameterError(f"index {index} outside [0, 2^{k})")
    return format(index, f"0{k}b")


# ---------------- partitions / rate facts ----------------
def shell_partition(cb: Codebook, by: str = "power", selected_only: bool = False) -> Dict:
    vecs = cb.selected if selected_only else cb.vectors
    if by == "power":
        keys = (vecs.astype(float) ** 2).sum(axis=1)
        keys = [int(k) if float(k).is_integer() else float(k) for k in keys]
    elif by == "active":
        keys = [int(k) for k in np.count_nonzero(vecs, axis=1)]
    else:
        raise ParameterError(f"unknown partition key {by!r}")
    out: Dict = {}
    for key in sorted(set(keys)):
        out[key] = keys.count(key)
    return out


def max_entropy_bits(cb: Codebook) -> float:
    return math.log2(cb.n_selected)


def rate_gain_over_smx(n_t: int, m: int) -> float:
    """Extra bits of SLM-CB over SMX with the same M-PAM alphabet."""
    return 2 * n_t * math.log2(1 + 1 / m)


# ---------------- text export / import ----------------
def _fmt(x) -> str:
    if isinstance(x, (np.integer, int)):
        return str(int(x))
    return format(float(x), ".17g")


def export_codebook(cb: Codebook, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"# family: {cb.family.value}",
        f"# n_t: {cb.n_t}",
        f"# param: {cb.param}",
        f"# bits: {cb.bits}",
        f"# scale: {cb.scale!r}",
        f"# selected: {cb.n_selected}",
    ]
    lines += [" ".join(_fmt(x) for x in row) for row in cb.vectors]
    path.write_text("\n".join(lines) + "\n", encoding="utf8")
    return path


def read_header(path) -> Dict:
    header: Dict = {}
    for line in Path(path).read_text(encoding="utf8").splitlines():
        if not line.startswith("#"):
            break
        key, _, value = line[1:].partition(":")
        header[key.strip()] = value.strip()
    for key in ("n_t", "bits", "selected"):
        if key in header and header[key].lstrip("-").isdigit():
            header[key] = int(header[key])
    if "scale" in header:
        try:
            header["scale"] = float(header["scale"])
        except ValueError:
            pass
    return header


def validate_header(header: Dict) -> None:
    schema = json.loads(HEADER_SCHEMA_PATH.read_text(encoding="utf8"))
    try:
        validate(instance=header, schema=schema)
    except ValidationError as e:
        raise ParameterError(f"bad codebook header: {e.message}")


def import_codebook(path) -> Codebook:
    path = Path(path)
    header = read_header(path)
    validate_header(header)
    rows = [line.split() for line in path.read_text(encoding="utf8").splitlines() if line and not line.startswith("#")]
    try:
        vectors = np.array([[int(x) for x in row] for row in rows], dtype=np.int64)
    except ValueError:
        vectors = np.array([[float(x) for x in row] for row in rows])
    family = Family(header["family"])
    n_t = header["n_t"]
    if vectors.ndim != 2 or vectors.shape[1] != 2 * n_t:
        raise ParameterError(f"{path}: expected {2 * n_t} coordinates per vector")
    if header["selected"] > len(vectors):
        raise ParameterError(f"{path}: selected count exceeds vector count")
    param: Union[int, str] = header["param"]
    if family in LATTICE_FAMILIES:
        param = int(param)
    lattice = None
    if family is Family.SLM_CB:
        lattice = cubic_generator(2 * n_t)
    elif family is Family.SLM_BW:
        lattice = barnes_wall_generator(int(math.log2(2 * n_t)) - 1)
    return Codebook(
        family=family,
        n_t=n_t,
        vectors=vectors,
        param=param,
        bits=header["bits"],
        n_selected=header["selected"],
        scale=header["scale"],
        lattice=lattice,
    )


def codebook_index(cb: Codebook) -> Dict[tuple, int]:
    """Map from selected vector (as a tuple) to its index."""
    return {tuple(int(x) for x in row): i for i, row in enumerate(cb.selected)}
