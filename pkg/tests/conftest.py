"""Shared pytest fixtures."""

from __future__ import annotations

from pathlib import Path

import pytest

from tests.factories import make_config, make_three
from watermarket.datasets import table1_path, wheat_yield_path
from watermarket.models.calibration import MarketRow, YieldDatum
from watermarket.models.market import MarketConfig, Participant
from watermarket.storage.tables import ingest_market_csv, ingest_yield_csv

CONTRACT_EXAMPLES = Path(__file__).resolve().parents[1] / "contracts" / "examples"


@pytest.fixture
def three() -> list[Participant]:
    return make_three()


@pytest.fixture
def murray() -> MarketConfig:
    return make_config()


@pytest.fixture
def table1_rows() -> list[MarketRow]:
    return ingest_market_csv(table1_path())


@pytest.fixture
def wheat_yield() -> list[YieldDatum]:
    return ingest_yield_csv(wheat_yield_path())


@pytest.fixture
def examples_dir() -> Path:
    return CONTRACT_EXAMPLES


@pytest.fixture
def tmp_output_dir(tmp_path: Path) -> Path:
    return tmp_path / "reports"
