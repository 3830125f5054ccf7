"""
Diagnostics report: scalar constants plus per-functional time series.

Written as ``<run_id>_report.json`` (schema version 1) and one plot-ready
``<run_id>_<functional>.csv`` per series.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from common.config_utils import write_json
from common.constants import REPORT_SCHEMA_VERSION
from common.utils import format_float


@dataclass
class Series:
    """Rows of one functional; the first column is always t."""

    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.columns or self.columns[0] != "t":
            raise ValueError(f"Series columns must start with 't', got {self.columns}")

    def append(self, *values: float) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"Row {values} does not match columns {self.columns}")
        self.rows.append([float(value) for value in values])

    @property
    def times(self) -> list[float]:
        return [row[0] for row in self.rows]

    def column(self, name: str) -> list[float]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]


@dataclass
class DiagnosticsReport:
    run_id: str
    scenario: str
    scalars: dict[str, Any] = field(default_factory=dict)
    series: dict[str, Series] = field(default_factory=dict)
    schema_version: int = REPORT_SCHEMA_VERSION

    def add_series(self, name: str, columns: list[str]) -> Series:
        self.series[name] = Series(columns=list(columns))
        return self.series[name]

    def non_finite(self) -> list[str]:
        """Names of series holding a NaN or infinite entry."""
        return [
            name for name, series in self.series.items()
            if any(not math.isfinite(value) for row in series.rows for value in row)
        ]

    def to_data(self) -> dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "run_id": self.run_id,
            "scenario": self.scenario,
            "scalars": self.scalars,
            "series": {name: {"columns": s.columns, "rows": s.rows} for name, s in self.series.items()},
        }

    def write(self, out_dir: Path) -> list[Path]:
        """Write the JSON report and the CSV files; returns every written path."""
        out_dir = Path(out_dir)
        paths = [write_json(out_dir / f"{self.run_id}_report.json", self.to_data())]
        for name, series in self.series.items():
            path = out_dir / f"{self.run_id}_{name}.csv"
            with open(path, "w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                writer.writerow(series.columns)
                writer.writerows([format_float(value) for value in row] for row in series.rows)
            paths.append(path)
        return paths


def load_report(path: Path) -> DiagnosticsReport:
    """
    Read a report JSON file.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the file is not a report of a supported schema version.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Report not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValueError(f"Report {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict) or data.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise ValueError(f"Report {path} has unsupported schema version {data.get('schema_version')!r}")
    series = {
        name: Series(columns=list(entry["columns"]),
                     rows=[[math.nan if value is None else float(value) for value in row] for row in entry["rows"]])
        for name, entry in data.get("series", {}).items()
    }
    return DiagnosticsReport(
        run_id=data["run_id"], scenario=data["scenario"], scalars=data.get("scalars", {}), series=series
    )


def series_table(report: DiagnosticsReport, name: str) -> Series:
    """
    The series called ``name``.

    Raises:
        ValueError: If the report has no such functional; the message lists the available ones.
    """
    if name not in report.series:
        raise ValueError(f"Unknown functional {name!r}; available: {', '.join(sorted(report.series))}")
    return report.series[name]
