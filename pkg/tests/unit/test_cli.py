"""Tests for CLI module."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
import typer
from typer.testing import CliRunner

from watermarket.cli import _load, _murray_config, _settings_from_args, app
from watermarket.settings import Settings

runner = CliRunner()


def test_settings_from_args_defaults() -> None:
    s = _settings_from_args()
    assert s.output_dir == Path("./reports")
    assert s.report_format == "json"


def test_settings_from_args_overrides() -> None:
    s = _settings_from_args(output_dir=Path("/tmp/test"), report_format="csv")
    assert s.output_dir == Path("/tmp/test")
    assert s.report_format == "csv"


def test_settings_from_args_rejects_format() -> None:
    with pytest.raises(typer.BadParameter):
        _settings_from_args(report_format="xml")


def test_load_overrides_experiment_and_output(examples_dir: Path, tmp_path: Path) -> None:
    scenario = _load(examples_dir / "three_participant.json", "nash", tmp_path, "csv")
    assert scenario.experiments == ["nash"]
    assert scenario.output.path == tmp_path
    assert scenario.output.format == "csv"


def test_load_missing_scenario(tmp_path: Path) -> None:
    with pytest.raises(typer.BadParameter):
        _load(tmp_path / "missing.json", None, None, None)


def test_murray_config_uses_settings() -> None:
    cfg = _murray_config(Settings(murray_rate=0.05, murray_participants=12))
    assert cfg.lambda_ == 0.05
    assert cfg.n == 12


def test_nash_command_writes_report(tmp_path: Path) -> None:
    result = runner.invoke(app, ["nash", "--seed", "5", "--n", "4", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "nash.json").read_text(encoding="utf-8"))
    assert payload["verdict"] == "pass"
    assert payload["metrics"]["participants"] == 4


def test_pairwise_command_requires_seed(tmp_path: Path) -> None:
    result = runner.invoke(app, ["pairwise", "--n", "4", "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_calibrate_rejects_unknown_target(tmp_path: Path) -> None:
    result = runner.invoke(app, ["calibrate", "--target", "median", "--out", str(tmp_path)])
    assert result.exit_code == 2
