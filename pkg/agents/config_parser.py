# agents/config_parser.py
"""
ConfigParserAgent - turn a raw JSON experiment document (plus command-line
overrides) into a validated ExperimentConfig.

Two passes: jsonschema against schemas/experiment_config_schema.json for shape,
then the pydantic model for normalization and cross-field rules.
"""
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union
import copy
import json
import logging
import re

from jsonschema import ValidationError as SchemaError
from jsonschema import validate
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from logic_blocks.codebook import LATTICE_FAMILIES, Family
from logic_blocks.errors import ConfigurationError

logger = logging.getLogger("config_parser")

SCHEMA_PATH = Path(__file__).resolve().parents[1] / "schemas" / "experiment_config_schema.json"
GRID_RE = re.compile(r"^\s*(-?[\d.]+)\s*:\s*(-?[\d.]+)\s*:\s*([\d.]+)\s*$")


class Detector(str, Enum):
    ML = "ml"
    MMSE = "mmse"
    ZF = "zf"
    LSD = "lsd"


class CodebookConfig(BaseModel):
    family: Family
    m: Optional[int] = None
    p_max: Optional[int] = None
    constellation: Optional[Union[str, List[str]]] = None
    bits: Optional[int] = Field(default=None, ge=1)
    size: Optional[int] = Field(default=None, ge=1)

    @field_validator("family", mode="before")
    @classmethod
    def normalize_family(cls, v):
        if isinstance(v, str):
            text = v.strip().upper().replace("_", "-")
            aliases = {"SLMCB": "SLM-CB", "SLMBW": "SLM-BW", "CB": "SLM-CB", "BW": "SLM-BW"}
            return aliases.get(text.replace("-", ""), text)
        return v

    @field_validator("constellation", mode="before")
    @classmethod
    def normalize_constellation(cls, v):
        if v is None:
            return None
        if isinstance(v, int):
            return f"{v}qam"
        if isinstance(v, str):
            return v.strip().lower()
        if isinstance(v, list):
            return [str(s).strip().lower() for s in v]
        raise ValueError("constellation must be a label or a list of labels")

    @model_validator(mode="after")
    def check_parameters(self):
        if self.bits is not None and self.size is not None:
            raise ValueError("give at most one of codebook.bits and codebook.size")
        if self.family is Family.SLM_CB and self.m is None:
            raise ValueError("SLM-CB needs codebook.m")
        if self.family is Family.SLM_BW and self.p_max is None:
            raise ValueError("SLM-BW needs codebook.p_max")
        if self.family not in LATTICE_FAMILIES and self.constellation is None:
            raise ValueError(f"{self.family.value} needs codebook.constellation")
        return self


class SimulationConfig(BaseModel):
    trials: int = Field(default=1_000_000, ge=1)
    target_errors: int = Field(default=200, ge=1)
    chunk_size: int = Field(default=2000, ge=1)
    workers: int = Field(default=1, ge=1)


class MiConfig(BaseModel):
    channels: int = Field(default=100, ge=1)
    noise_samples: int = Field(default=100, ge=1)
    exact: bool = True
    gaussian: bool = True


class ExperimentConfig(BaseModel):
    label: Optional[str] = None
    n_t: int = Field(ge=1)
    n_r: int = Field(ge=1)
    snr_db: List[float]
    detector: Detector = Detector.ML
    seed: int = Field(default=2017, ge=0)
    e_s: Optional[float] = Field(default=None, gt=0)
    output: Optional[str] = None
    codebook: CodebookConfig
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    mi: MiConfig = Field(default_factory=MiConfig)

    @field_validator("snr_db", mode="before")
    @classmethod
    def parse_grid(cls, v):
        # Accept "start:stop:step" (stop inclusive) or a list
        if isinstance(v, str):
            match = GRID_RE.match(v)
            if not match:
                raise ValueError(f"bad SNR grid {v!r}, expected start:stop:step")
            start, stop, step = (float(g) for g in match.groups())
            if step <= 0:
                raise ValueError("SNR grid step must be positive")
            count = int(round((stop - start) / step)) + 1
            return [round(start + k * step, 10) for k in range(max(count, 0))]
        if isinstance(v, (int, float)):
            return [float(v)]
        return v

    @field_validator("snr_db")
    @classmethod
    def check_grid(cls, v):
        if not v:
            raise ValueError("SNR grid is empty")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("SNR grid must be strictly increasing")
        return v

    @field_validator("detector", mode="before")
    @classmethod
    def normalize_detector(cls, v):
        return v.strip().lower() if isinstance(v, str) else v

    @model_validator(mode="after")
    def check_detector(self):
        if self.detector is Detector.LSD and self.codebook.family not in LATTICE_FAMILIES:
            raise ValueError(f"lsd detection needs a lattice codebook, not {self.codebook.family.value}")
        return self

    @property
    def energy(self) -> float:
        return float(self.n_t if self.e_s is None else self.e_s)

    @property
    def display_label(self) -> str:
        if self.label:
            return self.label
        cb = self.codebook
        param = cb.m if cb.m is not None else cb.p_max if cb.p_max is not None else cb.constellation
        if isinstance(param, list):
            param = "/".join(param)
        return f"{cb.family.value}({self.n_t},{param}) {self.n_t}x{self.n_r} {self.detector.value}"


def _coerce(text: str) -> Any:
    try:
        return json.loads(text)
    except (TypeError, ValueError):
        return text


def apply_overrides(raw: Dict[str, Any], overrides: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """Merge dotted-key overrides (e.g. {'simulation.trials': 5000}) into a copy of raw."""
    merged = copy.deepcopy(raw)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        parts = key.split(".")
        node = merged
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigurationError(f"override {key!r} walks through a non-section value")
        node[parts[-1]] = value
    return merged


def parse_set_options(items: Optional[List[str]]) -> Dict[str, Any]:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"--set expects section.key=value, got {item!r}")
        out[key.strip()] = _coerce(value.strip())
    return out


def _format_location(path) -> str:
    return ".".join(str(p) for p in path) or "<root>"


def parse_experiment(raw: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    merged = apply_overrides(raw, overrides)
    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf8"))
    try:
        validate(instance=merged, schema=schema)
    except SchemaError as e:
        raise ConfigurationError(f"config field {_format_location(e.absolute_path)}: {e.message}")
    try:
        return ExperimentConfig(**merged)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigurationError(f"config field {_format_location(first['loc'])}: {first['msg']}")


class ConfigParserAgent:
    def __init__(self, config: Dict = None):
        self.config = config or {}

    def load(self, path) -> Dict[str, Any]:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"Config not found: {p}")
        try:
            return json.loads(p.read_text(encoding="utf8"))
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{p}: not valid JSON ({e.msg} at line {e.lineno})")

    def run(self, source: Union[str, Path, Dict[str, Any]], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        raw = source if isinstance(source, dict) else self.load(source)
        cfg = parse_experiment(raw, overrides)
        logger.info("loaded config %s", cfg.display_label)
        return cfg
