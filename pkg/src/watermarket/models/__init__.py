"""Pydantic models."""

from .calibration import CalibrationFit, MarketRow, TableReport, TableRow, YieldDatum
from .market import (
    Allocation,
    BilateralDeal,
    CheckResult,
    ClearingResult,
    Matching,
    MarketConfig,
    PairwiseOutcome,
    ParetoScan,
    Participant,
    Preferences,
    ValidationReport,
    VerificationReport,
    WelfareReport,
)
from .scenario import ExperimentReport, GeneratorSpec, Scenario

__all__ = [
    "Allocation",
    "BilateralDeal",
    "CalibrationFit",
    "CheckResult",
    "ClearingResult",
    "ExperimentReport",
    "GeneratorSpec",
    "MarketConfig",
    "MarketRow",
    "Matching",
    "PairwiseOutcome",
    "ParetoScan",
    "Participant",
    "Preferences",
    "Scenario",
    "TableReport",
    "TableRow",
    "ValidationReport",
    "VerificationReport",
    "WelfareReport",
    "YieldDatum",
]
