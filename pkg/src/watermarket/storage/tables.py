"""CSV ingestion and emission for market and yield tables."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, TypeVar

import pyarrow as pa
import pyarrow.csv as pacsv
from loguru import logger
from pydantic import BaseModel, ValidationError

from watermarket.errors import ParseError
from watermarket.models.calibration import MarketRow, YieldDatum
from watermarket.storage._atomic import atomic_target

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

MARKET_COLUMNS = ("month", "water_gl", "actual_price", "crop_price", "model_price", "residual")
MARKET_REQUIRED = ("month", "water_gl", "actual_price", "crop_price")
YIELD_COLUMNS = ("water", "yield")
CSV_DIGITS = 6

M = TypeVar("M", bound=BaseModel)


def format_number(value: float | None) -> str:
    """Six significant digits; empty for missing values."""
    if value is None:
        return ""
    return f"{value:.{CSV_DIGITS}g}"


def _read_strings(path: Path, columns: Sequence[str], required: Sequence[str]) -> list[dict[str, str]]:
    convert = pacsv.ConvertOptions(column_types=dict.fromkeys(columns, pa.string()), strings_can_be_null=False)
    try:
        table = pacsv.read_csv(path, convert_options=convert)
    except FileNotFoundError as exc:
        raise ParseError(f"file not found: {path}") from exc
    except pa.ArrowInvalid as exc:
        if "empty" in str(exc).lower():
            raise ParseError(f"no header in {path}") from exc
        raise ParseError(f"malformed CSV {path}: {exc}") from exc

    names = [name.strip() for name in table.column_names]
    for name in required:
        if name not in names:
            raise ParseError(f"missing required column in {path}", line=1, column=name)
    table = table.rename_columns(names)
    present = [name for name in columns if name in names]
    # Non-declared columns may have been type-inferred; cast everything we read to text.
    return [
        {name: "" if value is None else str(value).strip() for name, value in row.items()}
        for row in table.select(present).to_pylist()
    ]


def _number(raw: str, *, line: int, column: str, percent: bool = False) -> float | None:
    if raw == "":
        return None
    text = raw
    scale = 1.0
    if percent and text.endswith("%"):
        text = text[:-1].strip()
        scale = 0.01
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"not a number: {raw!r}", line=line, column=column) from None
    if not math.isfinite(value):
        raise ParseError(f"not a finite number: {raw!r}", line=line, column=column)
    return value * scale


def _build(model: type[M], fields: dict[str, object], *, line: int) -> M:
    try:
        return model.model_validate(fields)
    except ValidationError as exc:
        error = exc.errors()[0]
        column = str(error["loc"][0]) if error["loc"] else None
        raise ParseError(error["msg"], line=line, column=column) from None


def ingest_market_csv(path: Path) -> list[MarketRow]:
    """Parse monthly market rows. Water stays in GL; residuals accept ``0.25`` or ``25%``."""
    rows: list[MarketRow] = []
    for offset, raw in enumerate(_read_strings(path, MARKET_COLUMNS, MARKET_REQUIRED)):
        line = offset + 2
        month = raw["month"]
        if not month:
            raise ParseError("empty month label", line=line, column="month")
        fields: dict[str, object] = {"month": month}
        for column in MARKET_COLUMNS[1:]:
            if column not in raw:
                continue
            value = _number(raw[column], line=line, column=column, percent=column == "residual")
            if value is None and column in MARKET_REQUIRED:
                raise ParseError("missing value", line=line, column=column)
            fields[column] = value
        rows.append(_build(MarketRow, fields, line=line))
    logger.info("Ingested {} market rows from {}", len(rows), path)
    return rows


def ingest_yield_csv(path: Path) -> list[YieldDatum]:
    """Parse ``water,yield`` observations."""
    data: list[YieldDatum] = []
    for offset, raw in enumerate(_read_strings(path, YIELD_COLUMNS, YIELD_COLUMNS)):
        line = offset + 2
        fields: dict[str, object] = {}
        for column in YIELD_COLUMNS:
            value = _number(raw[column], line=line, column=column)
            if value is None:
                raise ParseError("missing value", line=line, column=column)
            fields[column] = value
        data.append(_build(YieldDatum, fields, line=line))
    logger.info("Ingested {} yield observations from {}", len(data), path)
    return data


def string_table(records: Sequence[dict[str, object]], columns: Sequence[str]) -> pa.Table:
    """Render records as an all-string table, numbers at CSV precision."""

    def render(value: object) -> str:
        if value is None:
            return ""
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return format_number(value)
        return str(value)

    return pa.table({name: pa.array([render(r.get(name)) for r in records], type=pa.string()) for name in columns})


def write_table(table: pa.Table, path: Path) -> Path:
    """Write a CSV atomically."""
    with atomic_target(path) as tmp:
        pacsv.write_csv(table, tmp, write_options=pacsv.WriteOptions(quoting_style="needed"))
    return path


def write_market_csv(rows: Sequence[MarketRow], path: Path) -> Path:
    """Emit market rows in the ingestion layout; residuals are written as fractions."""
    table = string_table([row.model_dump() for row in rows], MARKET_COLUMNS)
    write_table(table, path)
    logger.info("Wrote {} market rows to {}", len(rows), path)
    return path
