"""Domain models for participants, clearing results and pair-wise outcomes."""

from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

ClearingMethod = Literal["closed-form", "numeric"]
PairingStrategy = Literal["random", "greedy", "stable"]
ClassificationReference = Literal["equilibrium", "median"]
Role = Literal["buyer", "seller", "outsider"]


class Participant(BaseModel):
    """A water-rights holder with HARA parameters and an initial endowment (ML).

    Field constraints are checked by :func:`watermarket.market.utility.validate`
    so that invalid participants can be reported rather than rejected at parse time.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    id: str
    a: float
    b: float
    w: float


class MarketConfig(BaseModel):
    """Market-wide constants shared by every participant."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, allow_inf_nan=False)

    gamma: float
    lambda_: float = Field(alias="lambda")
    T: float
    p_cr: float
    n: int = 1

    @property
    def growth(self) -> float:
        """Forward compounding factor e^{λT} applied to traded water."""
        return math.exp(self.lambda_ * self.T)


class Allocation(BaseModel):
    """Split of one participant's endowment between irrigation and trade."""

    model_config = ConfigDict(frozen=True)

    w_ag: float
    w_tr: float

    def share(self) -> float | None:
        """Return α = w_ag / w, or None for a zero endowment."""
        total = self.w_ag + self.w_tr
        if total == 0:
            return None
        return self.w_ag / total


class ClearingResult(BaseModel):
    """Outcome of common-pool clearing."""

    model_config = ConfigDict(frozen=True)

    q: float
    m: float
    allocations: dict[str, Allocation]
    method: ClearingMethod
    clamped: list[str] = Field(default_factory=list)
    passes: int = Field(default=1, ge=1)
    total_water: float


class BilateralDeal(BaseModel):
    """Two-party clearing between participants ``i`` and ``j``."""

    model_config = ConfigDict(frozen=True)

    i: str
    j: str
    q_tilde: float
    alloc_i: Allocation
    alloc_j: Allocation
    gain_i: float = 0.0
    gain_j: float = 0.0

    @property
    def surplus(self) -> float:
        return self.gain_i + self.gain_j

    def gain_of(self, pid: str) -> float:
        if pid == self.i:
            return self.gain_i
        if pid == self.j:
            return self.gain_j
        raise KeyError(pid)

    def allocation_of(self, pid: str) -> Allocation:
        if pid == self.i:
            return self.alloc_i
        if pid == self.j:
            return self.alloc_j
        raise KeyError(pid)


class Preferences(BaseModel):
    """Strict preference lists of buyers over sellers and sellers over buyers."""

    model_config = ConfigDict(frozen=True)

    buyers: dict[str, list[str]]
    sellers: dict[str, list[str]]
    reference_price: float | None = None


class Matching(BaseModel):
    """Buyer-seller pairing produced by deferred acceptance."""

    model_config = ConfigDict(frozen=True)

    pairs: list[tuple[str, str]]
    unmatched: list[str] = Field(default_factory=list)
    stages: int = Field(default=0, ge=0)
    proposals: int = Field(default=0, ge=0)
    n_buyers: int = Field(default=0, ge=0)
    n_sellers: int = Field(default=0, ge=0)

    @property
    def size(self) -> int:
        return max(self.n_buyers, self.n_sellers)

    @property
    def stage_bound(self) -> int:
        """Upper bound n² − 2n + 2 on the number of stages."""
        n = self.size
        return n * n - 2 * n + 2


class PairwiseOutcome(BaseModel):
    """Whole-market result of one round of pair-wise trading."""

    model_config = ConfigDict(frozen=True)

    deals: list[BilateralDeal]
    autarky: list[str] = Field(default_factory=list)
    allocations: dict[str, Allocation]
    prices: dict[str, float | None]
    total_welfare: float
    strategy: PairingStrategy
    matching: Matching | None = None


class AgentWelfare(BaseModel):
    """Per-participant utility under both mechanisms."""

    id: str
    common: float
    pairwise: float


class WelfareReport(BaseModel):
    """Welfare comparison of the common pool against one pair-wise outcome."""

    u_common: float
    u_pairwise: float
    gap: float
    scale: float
    strategy: PairingStrategy
    seed: int | None = None
    per_agent: list[AgentWelfare] = Field(default_factory=list)

    def common_pool_dominates(self, tol: float = 1e-9) -> bool:
        """Common-pool welfare is at least the pair-wise welfare up to tol·scale."""
        return self.gap >= -tol * self.scale


class CheckResult(BaseModel):
    """One pass/fail check with its residual magnitude."""

    name: str
    passed: bool
    residual: float
    threshold: float
    participant: str | None = None


class VerificationReport(BaseModel):
    """Collection of numerical checks; failures are the payload."""

    checks: list[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]


class ValidationReport(BaseModel):
    """Invariant violations of participants and market constants."""

    violations: list[str] = Field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


class ParetoSample(BaseModel):
    i: str
    j: str
    d: float
    f: float


class DerivativeEstimate(BaseModel):
    i: str
    j: str
    value: float


class ParetoScan(BaseModel):
    """Samples of the two-party perturbation gain f(d) around an allocation."""

    samples: list[ParetoSample] = Field(default_factory=list)
    max_f: float
    fprime_at_zero: list[DerivativeEstimate] = Field(default_factory=list)
    max_second_difference: float
    scale: float
    passed: bool
