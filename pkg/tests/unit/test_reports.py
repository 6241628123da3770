"""Tests for report emission."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from watermarket.errors import ReportError
from watermarket.models.scenario import ExperimentReport
from watermarket.storage.reports import emit_report, report_path

HASH = "0" * 64


def _report(**details: object) -> ExperimentReport:
    return ExperimentReport(
        scenario_hash=HASH, experiment="clear", verdict="pass", metrics={"q": 89.1, "clamped": 0}, details=details
    )


def test_report_path() -> None:
    assert report_path(Path("out"), "nash", "csv") == Path("out/nash.csv")


def test_emit_json(tmp_path: Path) -> None:
    path = emit_report(_report(rows=[{"id": "p1"}]), "json", tmp_path / "clear.json")
    text = path.read_text(encoding="utf-8")
    assert text.endswith("\n")
    payload = json.loads(text)
    assert set(payload) == {"scenario_hash", "experiment", "verdict", "metrics", "details"}
    assert payload["metrics"]["q"] == 89.1


def test_emit_json_writes_seventeen_digits(tmp_path: Path) -> None:
    metrics = {"q": 0.1, "third": 1.0 / 3.0, "whole": 2.0, "tiny": 1e-20, "count": 3, "ok": True}
    report = ExperimentReport(scenario_hash=HASH, experiment="clear", verdict="pass", metrics=metrics)
    text = emit_report(report, "json", tmp_path / "clear.json").read_text(encoding="utf-8")
    assert '"q": 0.10000000000000001' in text
    assert '"third": 0.33333333333333331' in text
    assert '"whole": 2.0' in text
    assert '"count": 3,' in text
    payload = json.loads(text)
    assert payload["metrics"] == metrics
    assert isinstance(payload["metrics"]["whole"], float)
    assert payload["details"] == {}


def test_emit_csv_from_rows(tmp_path: Path) -> None:
    rows = [{"id": "p1", "w_ag": 2.225, "clamped": False}, {"id": "p2", "w_ag": 4.55, "clamped": True}]
    path = emit_report(_report(rows=rows), "csv", tmp_path / "clear.csv")
    lines = path.read_text(encoding="utf-8").replace('"', "").splitlines()
    assert lines == ["id,w_ag,clamped", "p1,2.225,false", "p2,4.55,true"]


def test_emit_csv_without_rows_uses_metrics(tmp_path: Path) -> None:
    path = emit_report(_report(), "csv", tmp_path / "clear.csv")
    lines = path.read_text(encoding="utf-8").replace('"', "").splitlines()
    assert lines[0] == "experiment,verdict,q,clamped"
    assert lines[1] == "clear,pass,89.1,0"


def test_emit_into_directory_raises(tmp_path: Path) -> None:
    target = tmp_path / "clear.json"
    target.mkdir()
    with pytest.raises(ReportError):
        emit_report(_report(), "json", target)
