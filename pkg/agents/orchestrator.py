# agents/orchestrator.py
"""
OrchestratorAgent - config -> codebook -> sweep or closed forms -> CSV.

Stages run in order: ConfigParserAgent, codebook construction, then
SimulationEngineAgent (sver / mi) or the analysis closed forms (bounds), and
finally CurveWriterAgent.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional
import logging
import re

from agents.config_parser import ConfigParserAgent, ExperimentConfig
from logic_blocks.analysis import CurveSeries, bound_curves
from logic_blocks.codebook import (
    Codebook,
    Family,
    build_baseline,
    build_slm_bw,
    build_slm_cb,
    export_codebook,
    normalize,
    select_rate,
)

logger = logging.getLogger("orchestrator")

MODES = ("sver", "mi", "bounds")


def build_codebook(cfg: ExperimentConfig, normalized: bool = True) -> Codebook:
    c = cfg.codebook
    if c.family is Family.SLM_CB:
        cb = build_slm_cb(cfg.n_t, c.m)
    elif c.family is Family.SLM_BW:
        cb = build_slm_bw(cfg.n_t, c.p_max)
    else:
        cb = build_baseline(c.family, cfg.n_t, c.constellation)
    if c.bits is not None:
        cb = select_rate(cb, k=c.bits)
    elif c.size is not None:
        cb = select_rate(cb, size=c.size)
    return normalize(cb, cfg.energy) if normalized else cb


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_").lower()


class OrchestratorAgent:
    def __init__(self, config: dict = None):
        self.config = config or {}

    def load(self, source, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        return ConfigParserAgent().run(source, overrides)

    def codebook(self, cfg: ExperimentConfig, normalized: bool = True) -> Codebook:
        cb = build_codebook(cfg, normalized)
        logger.info(
            "built %s: %d vectors, %d selected, %d bits, scale %.6g",
            cb.family.value, len(cb), cb.n_selected, cb.bits, cb.scale,
        )
        return cb

    def curves(self, mode: str, cfg: ExperimentConfig, cb: Codebook) -> List[CurveSeries]:
        # lazy import keeps the process pool out of bounds-only runs
        from agents.simulation_engine import SimulationEngineAgent

        if mode == "sver":
            return [SimulationEngineAgent().run_sver(cfg, cb)]
        if mode == "mi":
            return SimulationEngineAgent().run_mi(cfg, cb)
        if mode == "bounds":
            return bound_curves(cb, cfg.n_r, cfg.snr_db, cfg.display_label, cfg.energy)
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")

    def run(self, mode: str, source, overrides: Optional[Dict[str, Any]] = None, outputs_dir: str = "outputs") -> Dict:
        """Run one experiment end to end and return the written path plus the curves."""
        from agents.curve_writer import CurveWriterAgent

        if isinstance(source, (str, Path)) and not Path(source).exists():
            raise FileNotFoundError(f"Config not found: {source}")
        cfg = self.load(source, overrides)
        cb = self.codebook(cfg)
        curves = self.curves(mode, cfg, cb)
        output = Path(cfg.output) if cfg.output else Path(outputs_dir) / f"{mode}_{_slug(cfg.display_label)}.csv"
        path = CurveWriterAgent().run(curves, output)
        logger.info("wrote %s", path)
        return {"output": path, "curves": curves, "config": cfg}

    def export(self, source, path, overrides: Optional[Dict[str, Any]] = None, normalized: bool = True) -> str:
        cfg = self.load(source, overrides)
        cb = self.codebook(cfg, normalized)
        return str(export_codebook(cb, path))
