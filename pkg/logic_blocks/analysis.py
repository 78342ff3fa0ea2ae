# logic_blocks/analysis.py
"""
Analytic and semi-analytic performance predictors for a normalized codebook.

Pairwise distances are computed once per codebook (PairDistanceTable) and reused
across the SNR grid; every closed form below only walks the distinct distances.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Union
import math

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy import integrate, stats
from scipy.special import comb, logsumexp

from logic_blocks.channel import as_generator, snr_to_noise_var
from logic_blocks.codebook import Codebook
from logic_blocks.errors import DomainError, ParameterError

_LN2 = math.log(2.0)
_PAIR_BLOCK = 256


class CurveKind(str, Enum):
    MI_EXACT = "MI_exact"
    MI_APPROX = "MI_approx"
    MI_LB = "MI_lb"
    MI_GAUSSIAN = "MI_gaussian"
    ASVEP_EXACT_UB = "ASVEP_exact_ub"
    ASVEP_CHERNOFF_UB = "ASVEP_chernoff_ub"
    ASVEP_LB_FORM = "ASVEP_lb_form"
    SVER_SIM = "SVER_sim"


class CurveSeries(BaseModel):
    snr_db: List[float]
    value: List[float]
    label: str
    kind: CurveKind
    ci_low: Optional[List[float]] = None
    ci_high: Optional[List[float]] = None
    trials: Optional[List[int]] = None
    meta: Dict[str, Union[str, int, float]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_grid(self):
        n = len(self.snr_db)
        if n == 0:
            raise ValueError("empty SNR grid")
        for name in ("value", "ci_low", "ci_high", "trials"):
            seq = getattr(self, name)
            if seq is not None and len(seq) != n:
                raise ValueError(f"{name} has {len(seq)} entries, snr_db has {n}")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ValueError("snr_db must be strictly increasing")
        return self

    def points(self) -> List[Dict]:
        """One dict per grid point, the shape the CSV template resolves against."""
        out = []
        for i, snr in enumerate(self.snr_db):
            out.append(
                {
                    "snr_db": snr,
                    "value": self.value[i],
                    "ci_low": None if self.ci_low is None else self.ci_low[i],
                    "ci_high": None if self.ci_high is None else self.ci_high[i],
                    "trials": None if self.trials is None else self.trials[i],
                }
            )
        return out


# ---------------- pairwise distances ----------------
@dataclass(frozen=True, eq=False)
class PairDistanceTable:
    """Multiset of ||v_i - v_j||^2 over ordered pairs i != j of the selection (unscaled)."""

    distances: np.ndarray
    multiplicity: np.ndarray
    size: int
    scale2: float

    @property
    def scaled(self) -> np.ndarray:
        return self.scale2 * self.distances

    @property
    def min_scaled(self) -> float:
        return float(self.scaled.min()) if len(self.distances) else math.inf

    @property
    def pair_count(self) -> int:
        return int(self.multiplicity.sum())


def pair_distance_table(cb: Codebook) -> PairDistanceTable:
    sel = cb.selected
    exact = sel.dtype.kind in "iu"
    x = sel.astype(np.int64 if exact else float)
    norms = (x * x).sum(axis=1)
    acc: Dict = {}
    for start in range(0, len(x), _PAIR_BLOCK):
        block = x[start : start + _PAIR_BLOCK]
        d = norms[start : start + _PAIR_BLOCK, None] + norms[None, :] - 2 * (block @ x.T)
        rows = np.arange(len(block))
        mask = np.ones(d.shape, dtype=bool)
        mask[rows, start + rows] = False
        vals = d[mask]
        if not exact:
            vals = np.round(vals, 9)
        uniq, counts = np.unique(vals, return_counts=True)
        for u, c in zip(uniq.tolist(), counts.tolist()):
            acc[u] = acc.get(u, 0) + c
    keys = sorted(acc)
    return PairDistanceTable(
        distances=np.array(keys, dtype=float),
        multiplicity=np.array([acc[k] for k in keys], dtype=np.int64),
        size=len(sel),
        scale2=cb.scale ** 2,
    )


def _table(source) -> PairDistanceTable:
    return source if isinstance(source, PairDistanceTable) else pair_distance_table(source)


def _positive_noise(noise_var: float):
    if noise_var <= 0:
        raise DomainError("noise variance must be positive")


# ---------------- mutual information ----------------
def mi_exact_mc(cb: Codebook, h, noise_var: float, noise_samples: int, rng) -> float:
    """
    Mutual information for one channel, expectation over noise by Monte Carlo.

    For each transmitted x_i the inner term is log-sum-exp over j of
    -(||H(x_i - x_j)||^2 + 2 (H(x_i - x_j)) . v) / noise_var.
    """
    _positive_noise(noise_var)
    if noise_samples < 1:
        raise ParameterError("noise_samples must be >= 1")
    hr = h.h_real if hasattr(h, "h_real") else np.asarray(h, dtype=float)
    size = cb.n_selected
    if size == 1:
        return 0.0
    hx = cb.transmit_vectors @ hr.T
    v = math.sqrt(noise_var / 2.0) * as_generator(rng).standard_normal((noise_samples, hr.shape[0]))
    proj = hx @ v.T
    sq = (hx * hx).sum(axis=1)
    gram = hx @ hx.T
    block = max(1, 2_000_000 // (size * noise_samples))
    total = 0.0
    for start in range(0, size, block):
        i = slice(start, start + block)
        dist = sq[i, None] + sq[None, :] - 2 * gram[i]
        expo = -(dist[:, :, None] + 2 * (proj[i, None, :] - proj[None, :, :])) / noise_var
        total += float(logsumexp(expo, axis=1).sum())
    mi = math.log2(size) - total / (size * noise_samples * _LN2)
    return float(min(max(mi, 0.0), math.log2(size)))


def mi_avg_approx(source, n_r: int, noise_var: float) -> float:
    """Channel-averaged closed form: 2 log2|S| - log2 sum_ij (1 + d_ij / (2 noise_var))^-Nr."""
    _positive_noise(noise_var)
    t = _table(source)
    s = t.size + float(np.sum(t.multiplicity * (1.0 + t.scaled / (2.0 * noise_var)) ** (-n_r)))
    return float(2 * math.log2(t.size) - math.log2(s))


def mi_lower_bound_c1(size: int, d2min_scaled: float, n_r: int, noise_var: float) -> float:
    if size < 1:
        raise ParameterError("size must be >= 1")
    if d2min_scaled <= 0:
        raise DomainError("d2min must be positive")
    _positive_noise(noise_var)
    term = (size - 1) * (1.0 + d2min_scaled / (2.0 * noise_var)) ** (-n_r)
    return float(math.log2(size) - math.log2(1.0 + term))


def mi_lower_bound_exact_h(cb: Codebook, h, noise_var: float) -> float:
    """Fixed-channel lower bound: log2|S| - Nr log2(e/2) - mean_i log2 sum_j exp(-||H(x_i-x_j)||^2 / (2 noise_var))."""
    _positive_noise(noise_var)
    hr = h.h_real if hasattr(h, "h_real") else np.asarray(h, dtype=float)
    n_r = hr.shape[0] // 2
    hx = cb.transmit_vectors @ hr.T
    sq = (hx * hx).sum(axis=1)
    dist = np.maximum(sq[:, None] + sq[None, :] - 2 * hx @ hx.T, 0.0)
    inner = logsumexp(-dist / (2.0 * noise_var), axis=1) / _LN2
    value = math.log2(cb.n_selected) - n_r * math.log2(math.e / 2.0) - float(inner.mean())
    return float(min(max(value, 0.0), math.log2(cb.n_selected)))


def gaussian_capacity(h, noise_var: float, e_s: float) -> float:
    """log2 det(I + E_s / (Nt noise_var) H H^H) for one complex channel."""
    _positive_noise(noise_var)
    hc = h.h_complex if hasattr(h, "h_complex") else np.asarray(h)
    n_r, n_t = hc.shape
    m = np.eye(n_r) + (e_s / (n_t * noise_var)) * (hc @ hc.conj().T)
    sign, logdet = np.linalg.slogdet(m)
    return float(logdet / _LN2)


# ---------------- error probability ----------------
def psvep_exact(d2: float, n_r: int, noise_var: float) -> float:
    """Pairwise error probability over Rayleigh fading with Nr receive antennas."""
    if d2 <= 0:
        raise DomainError(f"squared distance must be positive, got {d2}")
    if noise_var <= 0:
        return 0.0
    mu = 0.5 * (1.0 - math.sqrt(d2 / (4.0 * noise_var + d2)))
    acc = sum(comb(n_r - 1 + k, k, exact=True) * (1.0 - mu) ** k for k in range(n_r))
    return float(mu ** n_r * acc)


def psvep_quadrature(d2: float, n_r: int, noise_var: float) -> float:
    """E[Q(sqrt(kappa))] with kappa ~ Gamma(shape Nr, scale d2 / (2 noise_var)), by numerical integration."""
    if d2 <= 0:
        raise DomainError(f"squared distance must be positive, got {d2}")
    _positive_noise(noise_var)
    scale = d2 / (2.0 * noise_var)
    value, _ = integrate.quad(
        lambda w: stats.norm.sf(math.sqrt(w)) * stats.gamma.pdf(w, a=n_r, scale=scale),
        0.0,
        np.inf,
        epsabs=1e-12,
        epsrel=1e-10,
        limit=200,
    )
    return float(value)


def asvep_union_bound(source, n_r: int, noise_var: float, form: str = "chernoff") -> float:
    t = _table(source)
    if t.size < 2:
        return 0.0
    _positive_noise(noise_var)
    if form == "chernoff":
        s = float(np.sum(t.multiplicity * (1.0 + t.scaled / (4.0 * noise_var)) ** (-n_r)))
        return s / (2.0 * t.size)
    if form == "exact_pairwise":
        s = sum(int(m) * psvep_exact(float(d), n_r, noise_var) for d, m in zip(t.scaled, t.multiplicity))
        return s / t.size
    raise ParameterError(f"unknown bound form {form!r}")


def asvep_dmin_bound(size: int, d2min_scaled: float, n_r: int, noise_var: float) -> float:
    if size < 2:
        return 0.0
    if d2min_scaled <= 0:
        raise DomainError("d2min must be positive")
    _positive_noise(noise_var)
    return float((size - 1) / 2.0 * (1.0 + d2min_scaled / (4.0 * noise_var)) ** (-n_r))


# ---------------- curve helpers ----------------
def wilson_interval(errors: int, trials: int, confidence: float = 0.95):
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    ci = stats.binomtest(int(errors), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def snr_at_level(snr_db: Sequence[float], values: Sequence[float], level: float) -> Optional[float]:
    """SNR where a decreasing curve first drops below `level`, interpolated in log10(value)."""
    for k in range(len(values) - 1):
        a, b = values[k], values[k + 1]
        if a >= level > b:
            if b > 0:
                frac = (math.log10(a) - math.log10(level)) / (math.log10(a) - math.log10(b))
            else:
                frac = (a - level) / (a - b)
            return float(snr_db[k] + frac * (snr_db[k + 1] - snr_db[k]))
    return None


def bound_curves(cb: Codebook, n_r: int, snr_db: Sequence[float], label: str, e_s: Optional[float] = None) -> List[CurveSeries]:
    """Every closed-form curve over one SNR grid."""
    e_s = float(cb.n_t if e_s is None else e_s)
    table = pair_distance_table(cb)
    grid = [float(s) for s in snr_db]
    noise = [snr_to_noise_var(s, e_s) for s in grid]
    d2min = table.min_scaled
    if cb.lattice is not None:
        d2min = cb.scale ** 2 * float(cb.lattice.d2min)
    curves = {
        CurveKind.MI_APPROX: [mi_avg_approx(table, n_r, nv) for nv in noise],
        CurveKind.MI_LB: [mi_lower_bound_c1(table.size, d2min, n_r, nv) for nv in noise],
        CurveKind.ASVEP_EXACT_UB: [asvep_union_bound(table, n_r, nv, "exact_pairwise") for nv in noise],
        CurveKind.ASVEP_CHERNOFF_UB: [asvep_union_bound(table, n_r, nv, "chernoff") for nv in noise],
        CurveKind.ASVEP_LB_FORM: [asvep_dmin_bound(table.size, d2min, n_r, nv) for nv in noise],
    }
    return [CurveSeries(snr_db=grid, value=vals, label=label, kind=kind) for kind, vals in curves.items()]
