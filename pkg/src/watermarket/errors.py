"""Exception hierarchy."""

from __future__ import annotations


class WaterMarketError(Exception):
    """Base class for every error raised by watermarket."""


class DomainError(WaterMarketError, ValueError):
    """Raised when an input leaves the HARA domain or a population is invalid."""


class BracketError(WaterMarketError):
    """Raised when no sign change of excess demand is found within the bracket cap."""

    def __init__(self, lo: float, hi: float, expansions: int) -> None:
        self.lo = lo
        self.hi = hi
        self.expansions = expansions
        super().__init__(f"no sign change of excess demand in [{lo:.6g}, {hi:.6g}] after {expansions} expansions")


class DegenerateError(WaterMarketError):
    """Raised when one side of the buyer/seller classification is empty."""


class FitError(WaterMarketError):
    """Raised when a calibration fit is underdetermined or no start converges."""


class ParseError(WaterMarketError):
    """Raised on malformed CSV or scenario input."""

    def __init__(self, message: str, *, line: int | None = None, column: str | None = None) -> None:
        self.line = line
        self.column = column
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column '{column}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


class ReportError(WaterMarketError, OSError):
    """Raised when a report file cannot be written."""
