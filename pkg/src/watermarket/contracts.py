"""JSON schema helpers for scenario and report files."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal

ContractName = Literal["scenario", "report"]


def contracts_root() -> Path:
    """Return repository contract directory."""

    return Path(__file__).resolve().parents[2] / "contracts"


def load_contract(name: ContractName) -> dict[str, Any]:
    """Load the JSON schema for scenario or report files."""

    path = contracts_root() / f"{name}.schema.json"
    payload = json.loads(path.read_text())
    if not isinstance(payload, dict):
        raise TypeError(f"{name} contract must be a JSON object")
    return payload


def load_example(name: str) -> dict[str, Any]:
    """Load an example document from ``contracts/examples``."""

    path = contracts_root() / "examples" / f"{name}.json"
    payload = json.loads(path.read_text())
    if not isinstance(payload, dict):
        raise TypeError(f"Example {name} must be a JSON object")
    return payload
