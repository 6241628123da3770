"""Scenario loading and the batch experiment flow."""

from __future__ import annotations

import hashlib
import json
from typing import TYPE_CHECKING

from loguru import logger
from prefect import flow
from pydantic import ValidationError

from watermarket.errors import ParseError
from watermarket.market.utility import require_valid
from watermarket.models.scenario import EmittedReport, Scenario
from watermarket.pipeline.experiments import ExperimentContext, run_experiment
from watermarket.pipeline.generator import generate_population
from watermarket.settings import Settings
from watermarket.storage.reports import emit_report, report_path

if TYPE_CHECKING:
    from pathlib import Path

    from watermarket.models.market import Participant


def load_scenario(path: Path) -> Scenario:
    """Parse and validate a scenario JSON file."""
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ParseError(f"scenario file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc.msg}", line=exc.lineno) from exc
    try:
        return Scenario.model_validate(payload)
    except ValidationError as exc:
        raise ParseError(f"invalid scenario {path}: {exc}") from exc


def scenario_hash(scenario: Scenario) -> str:
    """SHA-256 of the canonical scenario JSON."""
    return hashlib.sha256(scenario.model_dump_json(by_alias=True).encode("utf-8")).hexdigest()


def resolve_population(scenario: Scenario) -> list[Participant]:
    """Explicit participants, or the seeded generator draw; empty when no experiment needs one."""
    if scenario.participants is not None:
        return list(scenario.participants)
    if scenario.generator is not None and scenario.seed is not None:
        return generate_population(scenario.generator, scenario.seed)
    return []


@flow(name="watermarket-scenario")
def run_scenario(scenario: Scenario, settings: Settings | None = None) -> list[EmittedReport]:
    """Run every experiment in declaration order and write one report per experiment."""
    settings = settings or Settings()
    digest = scenario_hash(scenario)
    participants = resolve_population(scenario)
    if scenario.needs_population:
        require_valid(participants, scenario.config)

    ctx = ExperimentContext(
        cfg=scenario.config,
        participants=participants,
        seed=scenario.seed,
        options=scenario.options,
        settings=settings,
    )
    fmt = scenario.output.format
    emitted: list[EmittedReport] = []
    for tag in scenario.experiments:
        report = run_experiment(tag, ctx, digest)
        path = emit_report(report, fmt, report_path(scenario.output.path, tag, fmt))
        emitted.append(EmittedReport(report=report, path=path))

    failed = [item.report.experiment for item in emitted if item.report.verdict != "pass"]
    logger.info("Scenario {} ran {} experiments, {} not passing", digest[:12], len(emitted), len(failed))
    return emitted
