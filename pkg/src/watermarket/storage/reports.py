"""Experiment report emission."""

from __future__ import annotations

import json
import math
from typing import TYPE_CHECKING, Any

from loguru import logger

from watermarket.errors import ReportError
from watermarket.storage._atomic import atomic_target
from watermarket.storage.tables import string_table, write_table

if TYPE_CHECKING:
    from pathlib import Path

    from watermarket.models.scenario import ExperimentReport, ReportFormat

JSON_DIGITS = 17
INDENT = "  "


def report_path(directory: Path, experiment: str, fmt: ReportFormat) -> Path:
    return directory / f"{experiment}.{fmt}"


def _flat_rows(report: ExperimentReport) -> list[dict[str, Any]]:
    rows = report.details.get("rows")
    if isinstance(rows, list) and rows and all(isinstance(row, dict) for row in rows):
        return rows
    return [{"experiment": report.experiment, "verdict": report.verdict, **report.metrics}]


def _columns(rows: list[dict[str, Any]]) -> list[str]:
    columns: list[str] = []
    for row in rows:
        columns.extend(key for key in row if key not in columns)
    return columns


def _json_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, f".{JSON_DIGITS}g")
    return text if "." in text or "e" in text else f"{text}.0"


def _json_text(value: Any, depth: int = 0) -> str:
    """Indented JSON with every float written to 17 significant digits."""
    pad, inner = INDENT * depth, INDENT * (depth + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = (f"{inner}{json.dumps(str(k))}: {_json_text(v, depth + 1)}" for k, v in value.items())
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, list | tuple):
        if not value:
            return "[]"
        items = (f"{inner}{_json_text(v, depth + 1)}" for v in value)
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(value, float):
        return _json_float(value)
    return json.dumps(value)


def emit_report(report: ExperimentReport, fmt: ReportFormat, path: Path) -> Path:
    """Write one report as nested JSON or as a flat CSV of its ``details["rows"]``."""
    try:
        if fmt == "json":
            with atomic_target(path) as tmp:
                tmp.write_text(_json_text(report.model_dump(mode="json")) + "\n", encoding="utf-8")
        else:
            rows = _flat_rows(report)
            write_table(string_table(rows, _columns(rows)), path)
    except OSError as exc:
        raise ReportError(f"cannot write report {path}: {exc}") from exc
    logger.info("Wrote {} report for {} to {}", fmt, report.experiment, path)
    return path
