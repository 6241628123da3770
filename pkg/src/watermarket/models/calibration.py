"""Calibration data and fit result models."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

FitKind = Literal["yield", "market"]
PriceTarget = Literal["model", "actual"]


class YieldDatum(BaseModel):
    """One observation of diverted water (ML) against crop yield (T)."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    water: float = Field(ge=0)
    crop_yield: float = Field(ge=0, alias="yield")


class MarketRow(BaseModel):
    """Monthly aggregate market observation, Table 1 layout."""

    model_config = ConfigDict(frozen=True)

    month: str
    water_gl: float = Field(gt=0)
    actual_price: float = Field(gt=0)
    crop_price: float = Field(gt=0)
    model_price: float | None = Field(default=None, gt=0)
    residual: float | None = Field(default=None, ge=0)


class CalibrationFit(BaseModel):
    """Best multi-start least-squares fit."""

    kind: FitKind
    params: dict[str, float]
    residuals: list[float]
    rms: float = Field(ge=0)
    cost: float = Field(ge=0)
    starts: int = Field(ge=1)
    converged: int = Field(ge=0)
    metadata: dict[str, float | int | str] = Field(default_factory=dict)


class TableRow(BaseModel):
    """Reproduced Table 1 month."""

    month: str
    water_gl: float
    crop_price: float
    actual_price: float
    model_price: float
    residual: float
    residual_pct: int
    published_model_price: float | None = None
    within_threshold: bool
    pricing: Literal["overestimated", "underestimated", "exact"]
    note: str = ""


class TableReport(BaseModel):
    """Reproduction of the monthly price table from a market fit."""

    rows: list[TableRow]
    months_within: int
    threshold: float
    rms_vs_actual: float
    rms_vs_published_model: float | None = None
