"""Scenario file and experiment report models."""

from __future__ import annotations

from pathlib import Path  # noqa: TC003
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from watermarket.models.calibration import PriceTarget  # noqa: TC001
from watermarket.models.market import MarketConfig, PairingStrategy, Participant  # noqa: TC001

ExperimentTag = Literal["clear", "pairwise", "compare", "pareto", "nash", "calibrate", "table1"]
ReportFormat = Literal["json", "csv"]
Verdict = Literal["pass", "fail", "error"]

SAMPLING_EXPERIMENTS: frozenset[str] = frozenset({"pairwise", "compare", "pareto", "nash"})
POPULATION_EXPERIMENTS: frozenset[str] = SAMPLING_EXPERIMENTS | {"clear"}


class GeneratorSpec(BaseModel):
    """Seeded random population: uniform draws of a, b and w over closed ranges."""

    model_config = ConfigDict(frozen=True)

    count: int = Field(ge=1, le=10_000)
    a_range: tuple[float, float] = (0.1, 5.0)
    b_range: tuple[float, float] = (0.0, 2.0)
    w_range: tuple[float, float] = (0.0, 100.0)

    @model_validator(mode="after")
    def _check_ranges(self) -> GeneratorSpec:
        for name in ("a_range", "b_range", "w_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} lower bound exceeds upper bound")
        if self.a_range[0] <= 0:
            raise ValueError("a_range must be strictly positive")
        if self.b_range[0] < 0 or self.w_range[0] < 0:
            raise ValueError("b_range and w_range must be nonnegative")
        return self


class OutputSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    path: Path = Path("./reports")
    format: ReportFormat = "json"


class ExperimentOptions(BaseModel):
    """Per-experiment knobs; unset values fall back to Settings."""

    model_config = ConfigDict(frozen=True)

    strategies: list[PairingStrategy] = Field(default_factory=lambda: ["random", "greedy", "stable"])
    compare_seeds: int | None = Field(default=None, ge=1)
    pareto_samples: int | None = Field(default=None, ge=0)
    nash_samples: int | None = Field(default=None, ge=1)
    yield_data: Path | None = None
    market_data: Path | None = None
    target: PriceTarget = "model"


class Scenario(BaseModel):
    """Batch experiment definition loaded from a JSON scenario file."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    config: MarketConfig
    participants: list[Participant] | None = None
    generator: GeneratorSpec | None = None
    experiments: list[ExperimentTag] = Field(min_length=1)
    seed: int | None = None
    output: OutputSpec = Field(default_factory=OutputSpec)
    options: ExperimentOptions = Field(default_factory=ExperimentOptions)

    @model_validator(mode="after")
    def _check_population_source(self) -> Scenario:
        if self.participants is not None and self.generator is not None:
            raise ValueError("exactly one of 'participants' or 'generator' must be provided")
        if self.needs_population and self.participants is None and self.generator is None:
            raise ValueError("exactly one of 'participants' or 'generator' must be provided")
        needs_seed = self.generator is not None or any(tag in SAMPLING_EXPERIMENTS for tag in self.experiments)
        if needs_seed and self.seed is None:
            raise ValueError("'seed' is required with a generator or sampling experiments")
        return self

    @property
    def needs_population(self) -> bool:
        return any(tag in POPULATION_EXPERIMENTS for tag in self.experiments)


class ExperimentReport(BaseModel):
    """Single-experiment report. Carries no timestamps, so reruns are byte-identical."""

    scenario_hash: str
    experiment: ExperimentTag
    verdict: Verdict
    metrics: dict[str, float | int | str | bool | None] = Field(default_factory=dict)
    details: dict[str, Any] = Field(default_factory=dict)


class EmittedReport(BaseModel):
    """A report together with the file it was written to."""

    report: ExperimentReport
    path: Path
