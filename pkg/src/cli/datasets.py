# src/cli/datasets.py
import json
import logging
import math
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from jsonschema import validate
from pydantic import BaseModel, ConfigDict, Field, model_validator

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).resolve().parents[1] / "schema" / "schema.json"
SIGNIFICANT_DIGITS = 12
FLOAT_FORMAT = f"%.{SIGNIFICANT_DIGITS}g"

COLUMN_UNITS = {
    "eta": "1",
    "nu_r": "quanta",
    "n_r": "quanta",
    "sle": "1",
    "svne": "nat",
    "sle_closed": "1",
    "svne_closed": "nat",
    "sle_numeric": "1",
    "svne_numeric": "nat",
    "bd_position": "bit",
    "bd_momentum": "bit",
    "bd_average": "bit",
    "kl_average": "bit",
    "ipr": "1",
    "value": "bit",
}

FIGURE_COLUMNS = {
    "fig1": ["nu_r", "sle", "svne"],
    "fig2": ["eta", "sle", "svne"],
    "fig3": ["eta", "n_r", "sle", "svne"],
    "fig4": ["eta", "n_r", "bd_position", "bd_momentum", "bd_average"],
    "fig5": ["eta", "n_r", "kl_average"],
    "fig6": ["n_r", "ipr"],
    "measures": ["eta", "n_r", "sle_closed", "svne_closed", "sle_numeric", "svne_numeric"],
    "tei": ["eta", "n_r", "value"],
}


@lru_cache(maxsize=1)
def load_schema() -> Dict[str, Any]:
    with open(SCHEMA_PATH, encoding="utf-8") as f:
        return json.load(f)


def round_significant(value: Optional[float]) -> Optional[float]:
    """Round to the printed precision so CSV and JSON carry the same numbers."""
    if value is None:
        return None
    return float(FLOAT_FORMAT % value)


class Column(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    unit: str


class FigureDataset(BaseModel):
    """A table of sweep results. Column layout is fixed by the figure id."""

    model_config = ConfigDict(frozen=True)

    figure: str
    columns: List[Column]
    rows: List[List[Optional[float]]] = Field(default_factory=list)
    manifest: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_layout(self):
        if self.figure not in FIGURE_COLUMNS:
            raise ValueError(f"unknown figure id {self.figure!r}")
        names = [column.name for column in self.columns]
        if names != FIGURE_COLUMNS[self.figure]:
            raise ValueError(f"{self.figure} expects columns {FIGURE_COLUMNS[self.figure]}, got {names}")
        eta_index = names.index("eta") if "eta" in names else None
        for i, row in enumerate(self.rows):
            if len(row) != len(names):
                raise ValueError(f"{self.figure} row {i} has {len(row)} values, expected {len(names)}")
            if any(v is not None and not math.isfinite(v) for v in row):
                raise ValueError(f"{self.figure} row {i} contains NaN or Inf: {row}")
            if eta_index is not None and not (row[eta_index] is not None and row[eta_index] > 0):
                raise ValueError(f"{self.figure} row {i} has a nonpositive eta: {row[eta_index]}")
        return self

    @classmethod
    def build(
        cls,
        figure: str,
        rows: List[List[Optional[float]]],
        manifest: Optional[Dict[str, Any]] = None,
        units: Optional[Dict[str, str]] = None,
    ) -> "FigureDataset":
        units = {**COLUMN_UNITS, **(units or {})}
        columns = [Column(name=name, unit=units[name]) for name in FIGURE_COLUMNS[figure]]
        return cls(figure=figure, columns=columns, rows=rows, manifest={"figure": figure, **(manifest or {})})

    @property
    def column_names(self) -> List[str]:
        return [column.name for column in self.columns]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.column_names, dtype=float)

    def to_payload(self) -> Dict[str, Any]:
        payload = {
            "manifest": self.manifest,
            "columns": [column.model_dump() for column in self.columns],
            "rows": [[round_significant(v) for v in row] for row in self.rows],
        }
        validate(instance=payload, schema=load_schema()["definitions"]["FigureDataset"])
        return payload

    def render(self, fmt: str = "csv") -> str:
        """CSV (header row, LF endings, 12 significant digits) or JSON text."""
        if fmt == "csv":
            return self.to_frame().to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        if fmt == "json":
            return json.dumps(self.to_payload(), indent=2) + "\n"
        raise ValueError(f"unknown output format {fmt!r}")

    def write(self, path: Path, fmt: str = "csv") -> Path:
        path = Path(path)
        text = self.render(fmt)
        try:
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        except OSError as e:
            raise OSError(f"cannot write {self.figure} dataset to {path}: {e}") from e
        logger.info(f"Wrote {len(self.rows)} {self.figure} rows to {path}")
        return path


def read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, encoding="utf-8")
