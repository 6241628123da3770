"""Runtime settings."""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment."""

    model_config = SettingsConfigDict(
        env_prefix="WATERMARKET_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    output_dir: Path = Path("./reports")
    report_format: Literal["json", "csv"] = "json"

    clearing_tol: float = Field(default=1e-10, gt=0, le=1e-3)
    price_rtol: float = Field(default=1e-8, gt=0, le=1e-2)
    kkt_rtol: float = Field(default=1e-8, gt=0, le=1e-2)
    welfare_tol: float = Field(default=1e-9, gt=0, le=1e-2)
    fprime_tol: float = Field(default=1e-6, gt=0, le=1e-1)
    bracket_expansions: int = Field(default=60, ge=1, le=200)

    pareto_step: float = Field(default=1e-7, gt=0, le=1e-2)
    pareto_grid: int = Field(default=20, ge=3, le=500)
    pareto_samples: int = Field(default=100, ge=0, le=100_000)
    nash_samples: int = Field(default=100, ge=1, le=100_000)
    compare_seeds: int = Field(default=10, ge=1, le=10_000)

    classification_reference: Literal["equilibrium", "median"] = "equilibrium"

    yield_fit_grid: int = Field(default=3, ge=1, le=10)
    market_fit_grid: int = Field(default=5, ge=1, le=10)
    growing_period_min: float = Field(default=0.2, gt=0)
    growing_period_max: float = Field(default=1.2, gt=0)

    murray_rate: float = Field(default=0.06, ge=0, le=1)
    murray_participants: int = Field(default=15, ge=1)
    gl_to_ml: float = Field(default=1000.0, gt=0)
    residual_threshold: float = Field(default=0.10, gt=0, le=1)
    table_rms_target: float = Field(default=0.05, gt=0, le=1)
