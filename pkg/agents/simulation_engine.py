# agents/simulation_engine.py
"""
SimulationEngineAgent - Monte Carlo sweeps over an SNR grid.

SVER: each grid point is split into fixed-size chunks; chunk k of point p draws
from its own stream (seed, (p, k)), and chunks are merged strictly in index order
with the stopping rule checked after each one. The worker count therefore only
changes wall time, never the numbers.

MI: channel c uses stream (seed, (0, c)) at every SNR point so the exact curve is
smooth across the grid; the noise of (point p, channel c) uses (seed, (1, p, c)).
"""
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Tuple
import logging

import numpy as np

from agents.config_parser import Detector, ExperimentConfig
from logic_blocks.analysis import (
    CurveKind,
    CurveSeries,
    gaussian_capacity,
    mi_avg_approx,
    mi_exact_mc,
    mi_lower_bound_c1,
    pair_distance_table,
    wilson_interval,
)
from logic_blocks.channel import RngStream, sample_channel, sample_channels, snr_to_noise_var, transmit_batch
from logic_blocks.codebook import Codebook, codebook_index
from logic_blocks.detect import (
    LatticeSphereDecoder,
    detect_ml_batch,
    detect_mmse_batch,
    flops_ml_slm,
    flops_mmse,
    flops_quantizer,
)

logger = logging.getLogger("simulation_engine")


def run_chunk(
    cb: Codebook, detector: str, n_r: int, noise_var: float, e_s: float, seed: int, stream: Tuple[int, ...], size: int
) -> Dict:
    """One block of independent transmissions: fresh channel, uniform codeword, noise, detect."""
    gen = RngStream(seed, stream).generator()
    sent = gen.integers(0, cb.n_selected, size=size)
    hs = sample_channels(cb.n_t, n_r, size, gen)
    y = transmit_batch(hs, cb.transmit_vectors[sent], noise_var, gen)
    detector = Detector(detector)
    max_candidates = 0
    flops = 0
    if detector is Detector.ML:
        found = detect_ml_batch(y, hs, cb)
        max_candidates = cb.n_selected
        flops = size * flops_ml_slm(cb, n_r)
    elif detector is Detector.LSD:
        found = np.empty(size, dtype=np.int64)
        lsd = LatticeSphereDecoder(cb)
        for b in range(size):
            rep = lsd.detect(y[b], hs[b], noise_var, e_s)
            found[b] = rep.index
            max_candidates = max(max_candidates, rep.candidates_scored)
            flops += rep.flops
    else:
        lookup = codebook_index(cb) if cb.is_lattice else None
        found = detect_mmse_batch(y, hs, cb, noise_var, e_s, zero_forcing=detector is Detector.ZF, lookup=lookup)
        max_candidates = 1
        flops = size * (flops_mmse(cb.n_t, n_r) + (flops_quantizer(cb.n_t) if cb.is_lattice else 0))
    return {
        "errors": int(np.count_nonzero(found != sent)),
        "trials": size,
        "max_candidates": max_candidates,
        "flops": flops,
    }


def _mi_channel(cb: Codebook, n_r: int, noise_var: float, e_s: float, seed: int, point: int, channel: int, noise_samples: int, exact: bool) -> Tuple[float, float]:
    h = sample_channel(cb.n_t, n_r, RngStream(seed, (0, channel)))
    mi = mi_exact_mc(cb, h, noise_var, noise_samples, RngStream(seed, (1, point, channel))) if exact else float("nan")
    return mi, gaussian_capacity(h, noise_var, e_s)


class SimulationEngineAgent:
    def __init__(self, config: Dict = None):
        self.config = config or {}

    # ---------------- SVER ----------------
    def _point(self, cfg: ExperimentConfig, cb: Codebook, p: int, noise_var: float, pool: Optional[ProcessPoolExecutor]) -> Dict:
        sim = cfg.simulation
        totals = {"errors": 0, "trials": 0, "max_candidates": 0, "flops": 0}
        k = 0
        while totals["errors"] < sim.target_errors and totals["trials"] < sim.trials:
            wave = []
            planned = totals["trials"]
            for _ in range(sim.workers):
                size = min(sim.chunk_size, sim.trials - planned)
                if size <= 0:
                    break
                wave.append((k, size))
                planned += size
                k += 1
            args = [(cb, cfg.detector.value, cfg.n_r, noise_var, cfg.energy, cfg.seed, (p, idx), size) for idx, size in wave]
            if pool is None:
                results = [run_chunk(*a) for a in args]
            else:
                results = list(pool.map(run_chunk, *zip(*args)))
            for res in results:
                totals["errors"] += res["errors"]
                totals["trials"] += res["trials"]
                totals["max_candidates"] = max(totals["max_candidates"], res["max_candidates"])
                totals["flops"] += res["flops"]
                if totals["errors"] >= sim.target_errors or totals["trials"] >= sim.trials:
                    break
        return totals

    def run_sver(self, cfg: ExperimentConfig, cb: Codebook) -> CurveSeries:
        values, lows, highs, trials = [], [], [], []
        max_candidates = 0
        flops, total_trials = 0, 0
        pool = ProcessPoolExecutor(max_workers=cfg.simulation.workers) if cfg.simulation.workers > 1 else None
        try:
            for p, snr in enumerate(cfg.snr_db):
                noise_var = snr_to_noise_var(snr, cfg.energy)
                t = self._point(cfg, cb, p, noise_var, pool)
                low, high = wilson_interval(t["errors"], t["trials"])
                values.append(t["errors"] / t["trials"])
                lows.append(low)
                highs.append(high)
                trials.append(t["trials"])
                max_candidates = max(max_candidates, t["max_candidates"])
                flops += t["flops"]
                total_trials += t["trials"]
                logger.info("%s: %.2f dB -> %d errors / %d trials", cfg.display_label, snr, t["errors"], t["trials"])
        finally:
            if pool is not None:
                pool.shutdown()
        flags = sum(1 for k in range(len(values) - 1) if lows[k + 1] > highs[k])
        if flags:
            logger.warning("%s: SVER rises across %d grid step(s) beyond the confidence band", cfg.display_label, flags)
        return CurveSeries(
            snr_db=list(cfg.snr_db),
            value=values,
            ci_low=lows,
            ci_high=highs,
            trials=trials,
            label=cfg.display_label,
            kind=CurveKind.SVER_SIM,
            meta={"max_candidates": max_candidates, "monotonicity_flags": flags, "mean_flops": flops / max(total_trials, 1)},
        )

    # ---------------- mutual information ----------------
    def run_mi(self, cfg: ExperimentConfig, cb: Codebook) -> List[CurveSeries]:
        mi_cfg = cfg.mi
        table = pair_distance_table(cb)
        d2min = table.min_scaled if cb.lattice is None else cb.scale ** 2 * float(cb.lattice.d2min)
        exact, approx, lower, gauss = [], [], [], []
        pool = ProcessPoolExecutor(max_workers=cfg.simulation.workers) if cfg.simulation.workers > 1 else None
        try:
            for p, snr in enumerate(cfg.snr_db):
                noise_var = snr_to_noise_var(snr, cfg.energy)
                args = [
                    (cb, cfg.n_r, noise_var, cfg.energy, cfg.seed, p, c, mi_cfg.noise_samples, mi_cfg.exact)
                    for c in range(mi_cfg.channels)
                ]
                if pool is None:
                    per_channel = [_mi_channel(*a) for a in args]
                else:
                    per_channel = list(pool.map(_mi_channel, *zip(*args)))
                exact.append(float(np.mean([m for m, _ in per_channel])))
                gauss.append(float(np.mean([g for _, g in per_channel])))
                approx.append(mi_avg_approx(table, cfg.n_r, noise_var))
                lower.append(mi_lower_bound_c1(table.size, d2min, cfg.n_r, noise_var))
                logger.info("%s: %.2f dB -> MI %.4f (approx %.4f)", cfg.display_label, snr, exact[-1], approx[-1])
        finally:
            if pool is not None:
                pool.shutdown()
        grid = list(cfg.snr_db)
        label = cfg.display_label
        curves = [
            CurveSeries(snr_db=grid, value=approx, label=label, kind=CurveKind.MI_APPROX),
            CurveSeries(snr_db=grid, value=lower, label=label, kind=CurveKind.MI_LB),
        ]
        if mi_cfg.exact:
            curves.insert(0, CurveSeries(snr_db=grid, value=exact, label=label, kind=CurveKind.MI_EXACT, meta={"channels": mi_cfg.channels}))
        if mi_cfg.gaussian:
            curves.append(CurveSeries(snr_db=grid, value=gauss, label="Gaussian input", kind=CurveKind.MI_GAUSSIAN))
        return curves
