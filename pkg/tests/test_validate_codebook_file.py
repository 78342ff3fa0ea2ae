# tests/test_validate_codebook_file.py
import importlib.util
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def _load():
    spec = importlib.util.spec_from_file_location("validate_codebook_file", ROOT / "scripts" / "validate_codebook_file.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def test_default_golden_passes(capsys):
    assert _load().main([]) == 0
    assert "145 vectors" in capsys.readouterr().out


def test_bad_header_fails(tmp_path):
    path = tmp_path / "cb.txt"
    path.write_text("# family: SLM-CB\n# n_t: 0\n# param: 2\n# bits: 0\n# scale: 1.0\n# selected: 1\n0 0\n")
    assert _load().main([str(path)]) == 1


def test_short_vector_fails(tmp_path, capsys):
    path = tmp_path / "cb.txt"
    path.write_text("# family: SLM-CB\n# n_t: 1\n# param: 2\n# bits: 0\n# scale: 1.0\n# selected: 1\n0 0\n1\n")
    assert _load().main([str(path)]) == 1
    assert "vector 1" in capsys.readouterr().out


def test_missing_file(tmp_path):
    assert _load().main([str(tmp_path / "none.txt")]) == 2
