# agents/curve_writer.py
"""
CurveWriterAgent: flatten CurveSeries into CSV rows through a column template.

Each template column names a dotted `source` resolved against either the
series (`series.label`) or the current grid point (`point.value`). Required
columns must resolve to a non-null value on every row.
"""
from pathlib import Path
from typing import Any, Dict, List, Sequence
import json
import logging

import pandas as pd

from logic_blocks.analysis import CurveSeries

logger = logging.getLogger("curve_writer")

TEMPLATES_DIR = Path(__file__).resolve().parents[1] / "templates"


class CurveWriterAgent:
    def __init__(self, templates_dir: str = None, config: Dict = None):
        self.templates_dir = Path(templates_dir) if templates_dir else TEMPLATES_DIR
        self.config = config or {}

    def _load_template(self, name: str) -> Dict[str, Any]:
        path = self.templates_dir / f"{name}.json"
        if not path.exists():
            raise FileNotFoundError(f"Template not found: {path}")
        return json.loads(path.read_text(encoding="utf8"))

    def _resolve_source(self, source: str, series: Dict, point: Dict) -> Any:
        if not source:
            return None
        parts = source.split(".")
        roots = {"series": series, "point": point}
        val = roots.get(parts[0])
        for p in parts[1:]:
            val = val.get(p) if isinstance(val, dict) else None
        return val

    def rows(self, curves: Sequence[CurveSeries], template: str = "curve_template") -> List[Dict[str, Any]]:
        tpl = self._load_template(template)
        columns = tpl.get("columns", {})
        required = tpl.get("required", [])
        out = []
        for curve in curves:
            series = curve.model_dump(mode="json")
            for point in curve.points():
                row = {name: self._resolve_source(meta.get("source"), series, point) for name, meta in columns.items()}
                missing = [r for r in required if row.get(r) is None]
                if missing:
                    raise ValueError(f"Missing required columns for {template}: {missing}")
                out.append(row)
        return out

    def to_frame(self, curves: Sequence[CurveSeries], template: str = "curve_template") -> pd.DataFrame:
        tpl = self._load_template(template)
        return pd.DataFrame(self.rows(curves, template), columns=list(tpl.get("columns", {})))

    def run(self, curves: Sequence[CurveSeries], output_path) -> str:
        df = self.to_frame(curves)
        path = Path(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if "trials" in df:
            df["trials"] = df["trials"].astype("Int64")
        df.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
        logger.info("wrote %d rows to %s", len(df), path)
        return str(path)
