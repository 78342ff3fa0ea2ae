# scripts/validate_codebook_file.py
"""Validate a codebook text file header against schemas/codebook_header_schema.json."""
import json
from pathlib import Path
import sys

from jsonschema import ValidationError, validate

ROOT = Path(__file__).resolve().parents[1]
SCHEMA_PATH = ROOT / "schemas" / "codebook_header_schema.json"
DEFAULT_PATH = ROOT / "goldens" / "slm_bw_2_6.txt"

if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from logic_blocks.codebook import read_header  # noqa: E402


def main(argv=None):
    args = sys.argv[1:] if argv is None else argv
    path = Path(args[0]) if args else DEFAULT_PATH
    if not SCHEMA_PATH.exists():
        print("Schema not found:", SCHEMA_PATH)
        return 2
    if not path.exists():
        print("Codebook file not found:", path)
        return 2

    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf8"))
    header = read_header(path)

    try:
        validate(instance=header, schema=schema)
    except ValidationError as e:
        print("Validation failed:")
        print(e.message)
        return 1

    width = 2 * header["n_t"]
    rows = [line.split() for line in path.read_text(encoding="utf8").splitlines() if line and not line.startswith("#")]
    bad = [i for i, row in enumerate(rows) if len(row) != width]
    if bad:
        print(f"Validation failed: vector {bad[0]} has {len(rows[bad[0]])} coordinates, expected {width}")
        return 1
    if header["selected"] > len(rows):
        print(f"Validation failed: selected {header['selected']} exceeds {len(rows)} vectors")
        return 1

    print(f"Validation passed: {len(rows)} vectors")
    return 0


if __name__ == "__main__":
    sys.exit(main())
