# logic_blocks/detect.py
"""
Detectors over a normalized codebook: exhaustive ML, linear MMSE / ZF, and lattice
sphere decoding (LSD), plus the flop-count formulas used to compare them.

All detectors work in the real-stacked representation and return a DetectorReport.
Ties are broken toward the lowest codebook index everywhere.
"""
from dataclasses import dataclass
from typing import Dict, Optional, Tuple
import math

import numpy as np
from scipy.special import comb

from logic_blocks.codebook import Codebook, Family, codebook_index, neighbor_set
from logic_blocks.errors import ConfigurationError, DomainError
from logic_blocks.lattice import default_quantizer, quantize

# elements of the (B, L, 2Nr) metric tensor evaluated at once
_ML_BLOCK = 4_000_000


@dataclass(frozen=True)
class DetectorReport:
    index: int
    metric: float
    flops: int
    candidates_scored: int


def _h_real(h) -> np.ndarray:
    return h.h_real if hasattr(h, "h_real") else np.asarray(h, dtype=float)


def _check(cb: Codebook):
    if cb.n_selected < 1:
        raise ConfigurationError("empty codebook")


def _ml_costs(vectors: np.ndarray, n_r: int) -> np.ndarray:
    active = np.count_nonzero(vectors, axis=1)
    return 2 * n_r * (active + 1) - 1


# ---------------- flop formulas ----------------
def _maybe_int(value: float):
    r = round(value)
    return int(r) if abs(value - r) < 1e-9 else value


def flops_ml_slm(cb: Codebook, n_r: int) -> int:
    """Sum of per-candidate ML costs over the selected set."""
    return int(_ml_costs(cb.selected, n_r).sum())


def flops_ml_slm_cb_closed_form(n_t: int, n_r: int, m: int) -> int:
    return int(
        sum(comb(2 * n_t, n_a, exact=True) * m ** n_a * (2 * n_r * (n_a + 1) - 1) for n_a in range(2 * n_t + 1))
    )


def flops_ml_sm(n_t: int, n_r: int, m: int):
    return _maybe_int((4 * n_r - 1) * math.log2(n_t * m * m))


def flops_ml_smx(n_t: int, n_r: int, m: int):
    return _maybe_int((2 * n_r * (n_t + 1) - 1) * 2 * n_t * math.log2(m))


def flops_mrrc(n_t: int, n_r: int) -> int:
    return 8 * n_t * n_r + 2


def flops_mmse(n_t: int, n_r: int) -> int:
    return 4 * n_t ** 3 + 12 * n_t ** 2 * n_r + 7 * n_t ** 2 + 6 * n_t * n_r + 2 * n_t


def flops_quantizer(n_t: int) -> int:
    return 8 * n_t - 2


def flops_lsd_worst(n_t: int, n_r: int, kissing: int) -> int:
    base = 4 * n_t ** 3 + 12 * n_t ** 2 * n_r + 7 * n_t ** 2 + 6 * n_t * n_r - 4 * n_t
    return base + kissing * (4 * n_t * n_r + 4 * n_t + 2 * n_r - 1) + flops_quantizer(n_t)


# ---------------- ML ----------------
def _ml_core(y: np.ndarray, hs: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """y (B, 2Nr), hs (B, 2Nr, 2Nt), x (L, 2Nt) -> (argmin index, min metric)."""
    b, two_nr, _ = hs.shape
    step = max(1, _ML_BLOCK // (len(x) * two_nr))
    idx = np.empty(b, dtype=np.int64)
    metric = np.empty(b)
    for start in range(0, b, step):
        sl = slice(start, start + step)
        hx = np.einsum("bij,lj->bli", hs[sl], x)
        d = ((y[sl, None, :] - hx) ** 2).sum(axis=-1)
        k = np.argmin(d, axis=1)
        idx[sl] = k
        metric[sl] = d[np.arange(len(k)), k]
    return idx, metric


def detect_ml_batch(y: np.ndarray, hs: np.ndarray, cb: Codebook) -> np.ndarray:
    _check(cb)
    hs = np.asarray(hs, dtype=float)
    if hs.ndim == 2:
        hs = hs[None]
    idx, _ = _ml_core(np.atleast_2d(np.asarray(y, dtype=float)), hs, cb.transmit_vectors)
    return idx


def detect_ml(y, h, cb: Codebook) -> DetectorReport:
    _check(cb)
    n_r = _h_real(h).shape[0] // 2
    idx, metric = _ml_core(np.asarray(y, dtype=float)[None, :], _h_real(h)[None], cb.transmit_vectors)
    return DetectorReport(int(idx[0]), float(metric[0]), flops_ml_slm(cb, n_r), cb.n_selected)


# ---------------- linear front end ----------------
def linear_estimate(y, h, noise_var: float, e_s: float, n_t: int, zero_forcing: bool = False) -> np.ndarray:
    """(H^T H + lam I)^{-1} H^T y with lam = noise_var / (E_s / Nt); lam = 0 for ZF."""
    hr = _h_real(h)
    if not zero_forcing and noise_var <= 0:
        raise DomainError("MMSE needs a positive noise variance")
    lam = 0.0 if zero_forcing else noise_var / (e_s / n_t)
    gram = hr.T @ hr + lam * np.eye(hr.shape[1])
    try:
        return np.linalg.solve(gram, hr.T @ np.asarray(y, dtype=float))
    except np.linalg.LinAlgError as e:
        raise DomainError(f"singular detector matrix: {e}")


def _slice(cb: Codebook, x: np.ndarray) -> np.ndarray:
    """Per-family slicer in pre-normalization coordinates."""
    if cb.family is Family.SLM_CB:
        half = int(cb.param) // 2
        return np.clip(np.floor(x + 0.5), -half, half).astype(np.int64)
    return quantize(cb.lattice, default_quantizer(cb.lattice), x)


def _nearest_selected(cb: Codebook, x: np.ndarray) -> int:
    d = ((cb.selected.astype(float) - x) ** 2).sum(axis=1)
    return int(np.argmin(d))


def _residual(y, hr, cb: Codebook, index: int) -> float:
    return float(np.sum((np.asarray(y, dtype=float) - hr @ (cb.scale * cb.selected[index])) ** 2))


def _linear_detect(y, h, cb, noise_var, e_s, zero_forcing, lookup) -> DetectorReport:
    _check(cb)
    hr = _h_real(h)
    n_r = hr.shape[0] // 2
    x_hat = linear_estimate(y, h, noise_var, e_s, cb.n_t, zero_forcing) / cb.scale
    index = None
    flops = flops_mmse(cb.n_t, n_r)
    if cb.is_lattice:
        q = _slice(cb, x_hat)
        flops += flops_quantizer(cb.n_t)
        index = (lookup if lookup is not None else codebook_index(cb)).get(tuple(int(v) for v in q))
    if index is None:
        index = _nearest_selected(cb, x_hat)
    return DetectorReport(index, _residual(y, hr, cb, index), flops, 1)


def detect_mmse(y, h, cb: Codebook, noise_var: float, e_s: Optional[float] = None, lookup: Optional[Dict] = None) -> DetectorReport:
    """MMSE estimate, family slicer, then nearest selected entry when the slice falls outside the selection."""
    return _linear_detect(y, h, cb, noise_var, cb.n_t if e_s is None else e_s, False, lookup)


def detect_zf(y, h, cb: Codebook, lookup: Optional[Dict] = None) -> DetectorReport:
    return _linear_detect(y, h, cb, 0.0, float(cb.n_t), True, lookup)


def detect_mmse_batch(
    y: np.ndarray,
    hs: np.ndarray,
    cb: Codebook,
    noise_var: float,
    e_s: Optional[float] = None,
    zero_forcing: bool = False,
    lookup: Optional[Dict] = None,
) -> np.ndarray:
    """Vectorized detect_mmse (or detect_zf) over y (B, 2Nr) and hs (B, 2Nr, 2Nt); returns indices."""
    _check(cb)
    hs = np.asarray(hs, dtype=float)
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if not zero_forcing and noise_var <= 0:
        raise DomainError("MMSE needs a positive noise variance")
    e_s = float(cb.n_t if e_s is None else e_s)
    lam = 0.0 if zero_forcing else noise_var / (e_s / cb.n_t)
    ht = np.swapaxes(hs, 1, 2)
    gram = ht @ hs + lam * np.eye(hs.shape[2])
    try:
        x_hat = np.linalg.solve(gram, np.einsum("bij,bj->bi", ht, y)[..., None])[..., 0] / cb.scale
    except np.linalg.LinAlgError as e:
        raise DomainError(f"singular detector matrix: {e}")
    out = np.full(len(y), -1, dtype=np.int64)
    if cb.is_lattice:
        lookup = lookup if lookup is not None else codebook_index(cb)
        for b, row in enumerate(_slice(cb, x_hat)):
            out[b] = lookup.get(tuple(int(v) for v in row), -1)
    miss = np.nonzero(out < 0)[0]
    if len(miss):
        d = ((x_hat[miss, None, :] - cb.selected[None].astype(float)) ** 2).sum(axis=-1)
        out[miss] = np.argmin(d, axis=1)
    return out


# ---------------- lattice sphere decoding ----------------
class LatticeSphereDecoder:
    """
    Precomputes the selection lookup and D_min once per codebook so repeated calls
    only pay for the linear estimate, one or two quantizations and at most
    kissing + 1 metric evaluations.
    """

    def __init__(self, cb: Codebook):
        _check(cb)
        if not cb.is_lattice:
            raise ConfigurationError(f"LSD needs a lattice codebook, got {cb.family.value}")
        self.cb = cb
        self.lookup = codebook_index(cb)
        self.offsets = np.vstack([np.zeros((1, cb.dimension), dtype=np.int64), neighbor_set(cb).vectors])
        self.p_max = float(cb.p_max_selected)

    def initial_point(self, x_hat: np.ndarray) -> Tuple[np.ndarray, int]:
        """Quantize x_hat; if the result exceeds p_max rescale x_hat to radius sqrt(p_max) once and re-quantize."""
        q = _slice(self.cb, x_hat)
        calls = 1
        if float((q.astype(float) ** 2).sum()) > self.p_max:
            norm = float(np.linalg.norm(x_hat))
            if norm > 0:
                q = _slice(self.cb, math.sqrt(self.p_max) * x_hat / norm)
                calls += 1
        return q, calls

    def candidates(self, q: np.ndarray) -> np.ndarray:
        """Indices of q + (D_min plus zero) that lie in the selection, ascending."""
        found = [self.lookup.get(tuple(int(v) for v in row)) for row in q + self.offsets]
        return np.array(sorted(i for i in found if i is not None), dtype=np.int64)

    def detect(self, y, h, noise_var: float, e_s: Optional[float] = None) -> DetectorReport:
        cb = self.cb
        e_s = cb.n_t if e_s is None else e_s
        hr = _h_real(h)
        n_r = hr.shape[0] // 2
        x_hat = linear_estimate(y, h, noise_var, e_s, cb.n_t) / cb.scale
        q, calls = self.initial_point(x_hat)
        idx = self.candidates(q)
        if len(idx) == 0:
            idx = np.array([_nearest_selected(cb, q)], dtype=np.int64)
        x = cb.scale * cb.selected[idx].astype(float)
        d = ((np.asarray(y, dtype=float) - x @ hr.T) ** 2).sum(axis=1)
        best = int(np.argmin(d))
        per_candidate = (2 * n_r * (np.count_nonzero(cb.selected[idx], axis=1) + 1) - 1).sum()
        flops = flops_mmse(cb.n_t, n_r) + calls * flops_quantizer(cb.n_t) + int(per_candidate)
        return DetectorReport(int(idx[best]), float(d[best]), flops, len(idx))


def detect_lsd(y, h, cb: Codebook, noise_var: float, e_s: Optional[float] = None) -> DetectorReport:
    return LatticeSphereDecoder(cb).detect(y, h, noise_var, e_s)
