"""Verify Python models stay in sync with the JSON schema contracts."""

from __future__ import annotations

from typing import get_args

import pytest

from watermarket.contracts import load_contract, load_example
from watermarket.models.scenario import ExperimentOptions, ExperimentReport, ExperimentTag, Scenario, Verdict


def test_scenario_fields_match_schema() -> None:
    schema = load_contract("scenario")
    assert set(schema["properties"]) == set(Scenario.model_fields)


def test_options_fields_match_schema() -> None:
    schema = load_contract("scenario")
    assert set(schema["properties"]["options"]["properties"]) == set(ExperimentOptions.model_fields)


def test_report_fields_match_schema() -> None:
    schema = load_contract("report")
    assert set(schema["properties"]) == set(ExperimentReport.model_fields)
    assert set(schema["required"]) == set(ExperimentReport.model_fields)


def test_experiment_enums_match_schema() -> None:
    scenario = load_contract("scenario")
    report = load_contract("report")
    tags = set(get_args(ExperimentTag))
    assert set(scenario["properties"]["experiments"]["items"]["enum"]) == tags
    assert set(report["properties"]["experiment"]["enum"]) == tags
    assert set(report["properties"]["verdict"]["enum"]) == set(get_args(Verdict))


def test_market_config_schema_uses_lambda_key() -> None:
    schema = load_contract("scenario")
    assert "lambda" in schema["$defs"]["MarketConfig"]["properties"]


@pytest.mark.parametrize("name", ["three_participant", "murray", "generated"])
def test_examples_validate_against_models(name: str) -> None:
    Scenario.model_validate(load_example(name))
