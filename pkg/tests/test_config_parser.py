# tests/test_config_parser.py
import json
from pathlib import Path

import pytest

from agents.config_parser import (
    ConfigParserAgent,
    Detector,
    apply_overrides,
    parse_experiment,
    parse_set_options,
)
from logic_blocks.codebook import Family
from logic_blocks.errors import ConfigurationError

INPUTS = Path(__file__).resolve().parents[1] / "inputs"


def _base(**extra):
    raw = {"n_t": 2, "n_r": 4, "snr_db": [0, 10], "codebook": {"family": "SLM-CB", "m": 2}}
    raw.update(extra)
    return raw


def test_defaults():
    cfg = parse_experiment(_base())
    assert cfg.detector is Detector.ML
    assert cfg.seed == 2017
    assert cfg.simulation.target_errors == 200
    assert cfg.simulation.trials == 1_000_000
    assert cfg.simulation.chunk_size == 2000 and cfg.simulation.workers == 1
    assert cfg.mi.channels == 100 and cfg.mi.noise_samples == 100
    assert cfg.energy == 2.0
    assert cfg.display_label == "SLM-CB(2,2) 2x4 ml"


def test_grid_string_is_inclusive():
    cfg = parse_experiment(_base(snr_db="-10:40:5"))
    assert cfg.snr_db[0] == -10 and cfg.snr_db[-1] == 40
    assert len(cfg.snr_db) == 11


def test_scalar_grid():
    assert parse_experiment(_base(snr_db=12)).snr_db == [12.0]


def test_grid_must_increase():
    with pytest.raises(ConfigurationError, match="snr_db"):
        parse_experiment(_base(snr_db=[10, 0]))


def test_family_aliases_and_constellation():
    cfg = parse_experiment(_base(codebook={"family": "bw", "p_max": 6}))
    assert cfg.codebook.family is Family.SLM_BW
    cfg = parse_experiment(_base(codebook={"family": "smx", "constellation": ["16QAM", "32qam"]}))
    assert cfg.codebook.constellation == ["16qam", "32qam"]


def test_missing_family_parameter():
    with pytest.raises(ConfigurationError, match="p_max"):
        parse_experiment(_base(codebook={"family": "SLM-BW"}))
    with pytest.raises(ConfigurationError, match="constellation"):
        parse_experiment(_base(codebook={"family": "SM"}))


def test_schema_rejects_unknown_keys():
    with pytest.raises(ConfigurationError, match="config field"):
        parse_experiment(_base(colour="blue"))
    with pytest.raises(ConfigurationError, match="simulation"):
        parse_experiment(_base(simulation={"trials": 0}))


def test_lsd_needs_lattice_family():
    raw = _base(detector="LSD", codebook={"family": "SMX", "constellation": "4qam"})
    with pytest.raises(ConfigurationError, match="lattice"):
        parse_experiment(raw)
    assert parse_experiment(_base(detector="lsd")).detector is Detector.LSD


def test_overrides_merge_dotted_keys():
    raw = _base(simulation={"trials": 100})
    merged = apply_overrides(raw, {"simulation.workers": 4, "n_r": 8, "label": None})
    assert merged["simulation"] == {"trials": 100, "workers": 4}
    assert merged["n_r"] == 8 and "label" not in merged
    assert raw["n_r"] == 4
    with pytest.raises(ConfigurationError):
        apply_overrides(raw, {"n_r.value": 3})


def test_set_options_are_coerced():
    out = parse_set_options(["simulation.trials=5000", "detector=mmse", "mi.exact=false", "snr_db=[0, 5]"])
    assert out == {"simulation.trials": 5000, "detector": "mmse", "mi.exact": False, "snr_db": [0, 5]}
    with pytest.raises(ConfigurationError):
        parse_set_options(["trials"])


def test_agent_loads_every_shipped_input():
    agent = ConfigParserAgent()
    for path in sorted(INPUTS.glob("*.json")):
        cfg = agent.run(path)
        assert cfg.n_t >= 1 and len(cfg.snr_db) >= 1


def test_agent_reports_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf8")
    with pytest.raises(ConfigurationError, match="not valid JSON"):
        ConfigParserAgent().run(path)
    with pytest.raises(FileNotFoundError):
        ConfigParserAgent().run(tmp_path / "missing.json")


def test_agent_applies_overrides(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(_base()), encoding="utf8")
    cfg = ConfigParserAgent().run(path, {"detector": "zf", "seed": 7})
    assert cfg.detector is Detector.ZF and cfg.seed == 7
