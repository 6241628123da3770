"""Shipped CSV fixtures."""

from __future__ import annotations

from pathlib import Path


def datasets_root() -> Path:
    return Path(__file__).resolve().parents[2] / "datasets"


def table1_path() -> Path:
    """Monthly Murray market observations, July through June."""
    return datasets_root() / "table1.csv"


def wheat_yield_path() -> Path:
    """Synthetic wheat yield against diverted water."""
    return datasets_root() / "wheat_yield.csv"
