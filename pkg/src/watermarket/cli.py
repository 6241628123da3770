"""Watermarket CLI."""

from __future__ import annotations

from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console
from rich.table import Table

from watermarket.errors import DomainError, ParseError, ReportError
from watermarket.models.market import MarketConfig
from watermarket.models.scenario import (
    EmittedReport,
    ExperimentOptions,
    ExperimentTag,
    GeneratorSpec,
    OutputSpec,
    Scenario,
)
from watermarket.pipeline.scenario import load_scenario, run_scenario
from watermarket.settings import Settings

app = typer.Typer(help="Common-pool and pair-wise water market experiments")
console = Console()

INPUT_ERRORS = frozenset({"ParseError", "DomainError"})

ScenarioOpt = Annotated[Path | None, typer.Option("--scenario", help="Scenario JSON file; flags below are ignored")]
SeedOpt = Annotated[int | None, typer.Option("--seed", help="Seed for population draws and sampling")]
CountOpt = Annotated[int, typer.Option("--n", min=1, help="Number of generated participants")]
GammaOpt = Annotated[float, typer.Option("--gamma", help="HARA curvature γ in (0, 1)")]
RateOpt = Annotated[float, typer.Option("--lambda", help="Risk-free rate λ (1/year)")]
PeriodOpt = Annotated[float, typer.Option("--T", help="Growing period T (years)")]
CropPriceOpt = Annotated[float, typer.Option("--crop-price", help="Crop price p_cr ($/T)")]
OutOpt = Annotated[Path | None, typer.Option("--out", help="Report directory")]
FormatOpt = Annotated[str | None, typer.Option("--format", help="Report format: json or csv")]
DataOpt = Annotated[Path | None, typer.Option("--data", help="Market CSV (defaults to the shipped Table 1)")]
TargetOpt = Annotated[str, typer.Option("--target", help="Fit target column: model or actual")]


def _settings_from_args(output_dir: Path | None = None, report_format: str | None = None) -> Settings:
    if report_format is not None and report_format not in ("json", "csv"):
        raise typer.BadParameter(f"--format must be 'json' or 'csv', got {report_format!r}")
    settings = Settings()
    if output_dir is not None:
        settings.output_dir = output_dir
    if report_format == "json" or report_format == "csv":
        settings.report_format = report_format
    return settings


def _check_target(target: str) -> None:
    if target not in ("model", "actual"):
        raise typer.BadParameter(f"--target must be 'model' or 'actual', got {target!r}")


def _load(scenario_path: Path, tag: ExperimentTag | None, out: Path | None, fmt: str | None) -> Scenario:
    try:
        scenario = load_scenario(scenario_path)
    except ParseError as exc:
        raise typer.BadParameter(str(exc)) from exc
    update: dict[str, object] = {}
    if tag is not None:
        update["experiments"] = [tag]
    if out is not None or fmt is not None:
        update["output"] = OutputSpec(path=out or scenario.output.path, format=fmt or scenario.output.format)
    if not update:
        return scenario
    try:
        return Scenario.model_validate({**scenario.model_dump(by_alias=True), **update})
    except ValueError as exc:
        raise typer.BadParameter(str(exc)) from exc


def _build(settings: Settings, **fields: object) -> Scenario:
    fields.setdefault("output", OutputSpec(path=settings.output_dir, format=settings.report_format))
    try:
        return Scenario.model_validate(fields)
    except ValueError as exc:
        raise typer.BadParameter(str(exc)) from exc


def _execute(scenario: Scenario, settings: Settings) -> None:
    try:
        emitted = run_scenario.fn(scenario, settings)
    except (ParseError, DomainError) as exc:
        raise typer.BadParameter(str(exc)) from exc
    except ReportError as exc:
        console.print(f"[red]{exc}[/red]")
        raise typer.Exit(code=1) from exc

    _print_summary(emitted)
    reports = [item.report for item in emitted]
    if any(r.verdict == "error" and r.metrics.get("error") in INPUT_ERRORS for r in reports):
        raise typer.Exit(code=2)
    if any(r.verdict != "pass" for r in reports):
        raise typer.Exit(code=1)


def _print_summary(emitted: list[EmittedReport]) -> None:
    table = Table(title="Experiments")
    table.add_column("Experiment")
    table.add_column("Verdict")
    table.add_column("Report")
    for item in emitted:
        colour = {"pass": "green", "fail": "red", "error": "yellow"}[item.report.verdict]
        table.add_row(item.report.experiment, f"[{colour}]{item.report.verdict}[/{colour}]", str(item.path))
    console.print(table)


def _population_command(
    tag: ExperimentTag,
    scenario_path: Path | None,
    seed: int | None,
    n: int,
    gamma: float,
    rate: float,
    period: float,
    crop_price: float,
    out: Path | None,
    fmt: str | None,
) -> None:
    settings = _settings_from_args(out, fmt)
    if scenario_path is not None:
        scenario = _load(scenario_path, tag, out, fmt)
    else:
        try:
            config = MarketConfig(gamma=gamma, lambda_=rate, T=period, p_cr=crop_price, n=n)
        except ValueError as exc:
            raise typer.BadParameter(str(exc)) from exc
        scenario = _build(settings, config=config, generator=GeneratorSpec(count=n), experiments=[tag], seed=seed)
    _execute(scenario, settings)


@app.command("clear")
def clear(
    scenario: ScenarioOpt = None,
    seed: SeedOpt = None,
    n: CountOpt = 10,
    gamma: GammaOpt = 0.5,
    rate: RateOpt = 0.06,
    period: PeriodOpt = 0.5,
    crop_price: CropPriceOpt = 280.0,
    out: OutOpt = None,
    fmt: FormatOpt = None,
) -> None:
    """Clear the common pool and verify the KKT conditions."""
    _population_command("clear", scenario, seed, n, gamma, rate, period, crop_price, out, fmt)


@app.command("pairwise")
def pairwise(
    scenario: ScenarioOpt = None,
    seed: SeedOpt = None,
    n: CountOpt = 10,
    gamma: GammaOpt = 0.5,
    rate: RateOpt = 0.06,
    period: PeriodOpt = 0.5,
    crop_price: CropPriceOpt = 280.0,
    out: OutOpt = None,
    fmt: FormatOpt = None,
) -> None:
    """Run pair-wise trading under each pairing strategy."""
    _population_command("pairwise", scenario, seed, n, gamma, rate, period, crop_price, out, fmt)


@app.command("compare")
def compare(
    scenario: ScenarioOpt = None,
    seed: SeedOpt = None,
    n: CountOpt = 10,
    gamma: GammaOpt = 0.5,
    rate: RateOpt = 0.06,
    period: PeriodOpt = 0.5,
    crop_price: CropPriceOpt = 280.0,
    out: OutOpt = None,
    fmt: FormatOpt = None,
) -> None:
    """Compare common-pool welfare with pair-wise welfare."""
    _population_command("compare", scenario, seed, n, gamma, rate, period, crop_price, out, fmt)


@app.command("pareto")
def pareto(
    scenario: ScenarioOpt = None,
    seed: SeedOpt = None,
    n: CountOpt = 10,
    gamma: GammaOpt = 0.5,
    rate: RateOpt = 0.06,
    period: PeriodOpt = 0.5,
    crop_price: CropPriceOpt = 280.0,
    out: OutOpt = None,
    fmt: FormatOpt = None,
) -> None:
    """Scan two-party perturbations of the pool equilibrium."""
    _population_command("pareto", scenario, seed, n, gamma, rate, period, crop_price, out, fmt)


@app.command("nash")
def nash(
    scenario: ScenarioOpt = None,
    seed: SeedOpt = None,
    n: CountOpt = 10,
    gamma: GammaOpt = 0.5,
    rate: RateOpt = 0.06,
    period: PeriodOpt = 0.5,
    crop_price: CropPriceOpt = 280.0,
    out: OutOpt = None,
    fmt: FormatOpt = None,
) -> None:
    """Test unilateral deviations from the pool equilibrium."""
    _population_command("nash", scenario, seed, n, gamma, rate, period, crop_price, out, fmt)


@app.command("calibrate")
def calibrate(
    scenario: ScenarioOpt = None,
    data: DataOpt = None,
    yield_data: Annotated[Path | None, typer.Option("--yield-data", help="Yield CSV with water,yield")] = None,
    target: TargetOpt = "model",
    out: OutOpt = None,
    fmt: FormatOpt = None,
) -> None:
    """Fit the HARA yield curve and the aggregate market parameters."""
    _check_target(target)
    settings = _settings_from_args(out, fmt)
    if scenario is not None:
        built = _load(scenario, "calibrate", out, fmt)
    else:
        options = ExperimentOptions(yield_data=yield_data, market_data=data, target=target)
        built = _build(settings, config=_murray_config(settings), experiments=["calibrate"], options=options)
    _execute(built, settings)


@app.command("table1")
def table1(
    scenario: ScenarioOpt = None,
    data: DataOpt = None,
    target: TargetOpt = "model",
    out: OutOpt = None,
    fmt: FormatOpt = None,
) -> None:
    """Reproduce the monthly water price table from a market fit."""
    _check_target(target)
    settings = _settings_from_args(out, fmt)
    if scenario is not None:
        built = _load(scenario, "table1", out, fmt)
    else:
        options = ExperimentOptions(market_data=data, target=target)
        built = _build(settings, config=_murray_config(settings), experiments=["table1"], options=options)
    _execute(built, settings)


@app.command("run")
def run(
    scenario: Annotated[Path, typer.Option("--scenario", help="Scenario JSON file")],
    out: OutOpt = None,
    fmt: FormatOpt = None,
) -> None:
    """Run every experiment listed in a scenario file."""
    settings = _settings_from_args(out, fmt)
    _execute(_load(scenario, None, out, fmt), settings)


def _murray_config(settings: Settings) -> MarketConfig:
    # Only λ enters the aggregate fit; the remaining constants are placeholders.
    return MarketConfig(gamma=0.5, lambda_=settings.murray_rate, T=0.5, p_cr=280.0, n=settings.murray_participants)


if __name__ == "__main__":
    app()
