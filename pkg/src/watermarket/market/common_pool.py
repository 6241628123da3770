"""Common-pool ("smart market") clearing.

A single equilibrium price q clears the catchment: every participant irrigates
its individual optimum at q and sells (or buys) the rest, and aggregate trade
sums to zero. The closed-form price follows from substituting the individual
optimum into the budget identity; the bracketing bisection is the independent
oracle used to check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger
from scipy import optimize

from watermarket.errors import BracketError, DomainError
from watermarket.market.utility import autarky_price, marginal_agricultural_utility, require_valid
from watermarket.models.market import Allocation, CheckResult, ClearingResult, VerificationReport

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from watermarket.models.market import ClearingMethod, MarketConfig, Participant

CLEARING_TOL = 1e-10
PRICE_RTOL = 1e-8
BUDGET_TOL = 1e-12
MAX_EXPANSIONS = 60


@dataclass(frozen=True)
class Population:
    """Column view of a participant list for vectorised demand evaluation."""

    ids: tuple[str, ...]
    a: np.ndarray
    b: np.ndarray
    w: np.ndarray

    @classmethod
    def of(cls, ps: Sequence[Participant]) -> Population:
        return cls(
            ids=tuple(p.id for p in ps),
            a=np.array([p.a for p in ps], dtype=float),
            b=np.array([p.b for p in ps], dtype=float),
            w=np.array([p.w for p in ps], dtype=float),
        )

    @property
    def total(self) -> float:
        return float(self.w.sum())


def _desired(q: float, a: np.ndarray, b: np.ndarray, cfg: MarketConfig) -> np.ndarray:
    """Unclamped first-order irrigation demand; negative entries want to sell more than they own."""
    gamma = cfg.gamma
    base = (q * cfg.growth / (a * cfg.p_cr)) ** (1.0 / (gamma - 1.0))
    return (base - b) * (1.0 - gamma) / a


def desired_irrigation(q: float, p: Participant, cfg: MarketConfig) -> float:
    """Irrigation level solving the first-order condition at price q, before the w_ag ≥ 0 clamp."""
    if not q > 0:
        raise DomainError(f"price must be positive, got {q}")
    return float(_desired(q, np.array([p.a]), np.array([p.b]), cfg)[0])


def individual_optimum(q: float, p: Participant, cfg: MarketConfig) -> Allocation:
    """Best response of a price-taking participant; w_ag is clamped at zero."""
    w_ag = desired_irrigation(q, p, cfg)
    if w_ag < 0:
        logger.debug("Participant {} clamped at w_ag=0 (desired {:.6g}) at q={:.6g}", p.id, w_ag, q)
        w_ag = 0.0
    return Allocation(w_ag=w_ag, w_tr=p.w - w_ag)


def excess_demand(q: float, ps: Sequence[Participant], cfg: MarketConfig) -> float:
    """E(q) = Σ w_ag,i(q) − W with clamped demands; nonincreasing in q."""
    return _excess(q, Population.of(ps), cfg)


def _excess(q: float, pop: Population, cfg: MarketConfig) -> float:
    demand = np.maximum(_desired(q, pop.a, pop.b, cfg), 0.0)
    return float(demand.sum() - pop.total)


def _bracket(pop: Population, ps: Sequence[Participant], cfg: MarketConfig, max_expansions: int) -> tuple[float, float]:
    prices = [price for price in (autarky_price(p, cfg) for p in ps) if math.isfinite(price)]
    lo, hi = min(prices), max(prices)

    expansions = 0
    while _excess(lo, pop, cfg) < 0:
        if expansions >= max_expansions:
            raise BracketError(lo, hi, expansions)
        lo /= 2.0
        expansions += 1
    expansions = 0
    while _excess(hi, pop, cfg) > 0:
        if expansions >= max_expansions:
            raise BracketError(lo, hi, expansions)
        hi *= 2.0
        expansions += 1
    logger.debug("Clearing bracket [{:.6g}, {:.6g}]", lo, hi)
    return lo, hi


def clearing_price_numeric(
    ps: Sequence[Participant],
    cfg: MarketConfig,
    *,
    tol: float = CLEARING_TOL,
    max_expansions: int = MAX_EXPANSIONS,
) -> float:
    """Root of excess demand by geometric bracketing and bisection."""
    require_valid(ps, cfg)
    pop = Population.of(ps)
    lo, hi = _bracket(pop, ps, cfg, max_expansions)
    if _excess(lo, pop, cfg) == 0:
        return lo
    if _excess(hi, pop, cfg) == 0:
        return hi

    q = float(
        optimize.bisect(
            _excess,
            lo,
            hi,
            args=(pop, cfg),
            xtol=float(np.finfo(float).tiny),
            rtol=4 * float(np.finfo(float).eps),
            maxiter=2000,
        )
    )
    residual = abs(_excess(q, pop, cfg))
    if residual > tol * pop.total:
        logger.warning("Bisection residual {:.3g} exceeds {:.3g}·W", residual, tol)
    return q


def _aggregates(pop: Population, cfg: MarketConfig, mask: np.ndarray, exponent: float) -> tuple[float, float]:
    a = pop.a[mask]
    s_b = float((pop.b[mask] / a).sum())
    s_a = float(((1.0 / a) ** exponent).sum())
    return s_b, s_a


def _closed_form(pop: Population, cfg: MarketConfig, mask: np.ndarray, exponent: float) -> float:
    gamma = cfg.gamma
    s_b, s_a = _aggregates(pop, cfg, mask, exponent)
    ratio = (pop.total / (1.0 - gamma) + s_b) / s_a
    return ratio ** (gamma - 1.0) * cfg.p_cr / cfg.growth


def clearing_price_closed_form(ps: Sequence[Participant], cfg: MarketConfig) -> float:
    """Equilibrium price for an interior solution, using the denominator exponent γ/(γ−1)."""
    require_valid(ps, cfg)
    pop = Population.of(ps)
    gamma = cfg.gamma
    return _closed_form(pop, cfg, np.ones(len(ps), dtype=bool), gamma / (gamma - 1.0))


def clearing_price_printed_form(ps: Sequence[Participant], cfg: MarketConfig) -> float:
    """Equilibrium price with the exponent 1/(γ−1) as originally printed; for comparison only."""
    require_valid(ps, cfg)
    pop = Population.of(ps)
    return _closed_form(pop, cfg, np.ones(len(ps), dtype=bool), 1.0 / (cfg.gamma - 1.0))


def compare_price_forms(ps: Sequence[Participant], cfg: MarketConfig) -> dict[str, float]:
    """Derived and printed closed forms side by side with the bisection oracle."""
    numeric = clearing_price_numeric(ps, cfg)
    derived = clearing_price_closed_form(ps, cfg)
    printed = clearing_price_printed_form(ps, cfg)
    return {
        "numeric": numeric,
        "derived": derived,
        "printed": printed,
        "derived_rel_error": abs(derived - numeric) / numeric,
        "printed_rel_error": abs(printed - numeric) / numeric,
    }


def clear_market(
    ps: Sequence[Participant],
    cfg: MarketConfig,
    *,
    method: ClearingMethod = "closed-form",
    tol: float = CLEARING_TOL,
    max_expansions: int = MAX_EXPANSIONS,
) -> ClearingResult:
    """Clear the pool and allocate every participant its individual optimum.

    The closed-form path runs a complementarity loop: participants whose
    first-order irrigation is negative are fixed at w_ag = 0 and the price is
    re-solved over the rest until no new clamp appears.
    """
    require_valid(ps, cfg)
    pop = Population.of(ps)
    gamma = cfg.gamma

    if method == "numeric":
        q = clearing_price_numeric(ps, cfg, tol=tol, max_expansions=max_expansions)
        active = _desired(q, pop.a, pop.b, cfg) >= 0
        passes = 1
    else:
        active = np.ones(len(ps), dtype=bool)
        passes = 0
        while True:
            passes += 1
            if not active.any():
                raise DomainError("every participant clamped at w_ag = 0; market cannot clear")
            q = _closed_form(pop, cfg, active, gamma / (gamma - 1.0))
            newly_clamped = active & (_desired(q, pop.a, pop.b, cfg) < 0)
            if not newly_clamped.any():
                break
            logger.debug("Clamping {} participants on pass {}", int(newly_clamped.sum()), passes)
            active &= ~newly_clamped

    desired = _desired(q, pop.a, pop.b, cfg)
    allocations: dict[str, Allocation] = {}
    clamped: list[str] = []
    for idx, pid in enumerate(pop.ids):
        w_ag = float(desired[idx]) if active[idx] else 0.0
        if not active[idx]:
            clamped.append(pid)
        allocations[pid] = Allocation(w_ag=w_ag, w_tr=float(pop.w[idx]) - w_ag)

    result = ClearingResult(
        q=q,
        m=q * cfg.growth,
        allocations=allocations,
        method=method,
        clamped=clamped,
        passes=passes,
        total_water=pop.total,
    )
    logger.debug(
        "Cleared {} participants: q={:.6g} method={} clamped={} passes={}",
        len(ps),
        q,
        method,
        len(clamped),
        passes,
    )
    return result


def verify_kkt(
    res: ClearingResult,
    ps: Sequence[Participant],
    cfg: MarketConfig,
    *,
    rtol: float = PRICE_RTOL,
    clearing_tol: float = 1e-9,
) -> VerificationReport:
    """Check stationarity, complementary slackness, budgets and market clearing."""
    checks: list[CheckResult] = []
    m = res.q * cfg.growth
    clamped = set(res.clamped)

    checks.append(
        CheckResult(name="shadow_price", passed=abs(res.m - m) <= rtol * m, residual=abs(res.m - m), threshold=rtol * m)
    )

    for p in ps:
        alloc = res.allocations[p.id]
        budget = abs(alloc.w_ag + alloc.w_tr - p.w)
        budget_tol = BUDGET_TOL * max(1.0, p.w)
        checks.append(
            CheckResult(
                name="budget", passed=budget <= budget_tol, residual=budget, threshold=budget_tol, participant=p.id
            )
        )
        checks.append(
            CheckResult(
                name="nonnegativity",
                passed=alloc.w_ag >= 0,
                residual=max(0.0, -alloc.w_ag),
                threshold=0.0,
                participant=p.id,
            )
        )
        try:
            marginal = marginal_agricultural_utility(alloc.w_ag, p, cfg)
        except DomainError:
            marginal = math.inf
        if p.id in clamped:
            excess = marginal - m
            checks.append(
                CheckResult(
                    name="complementarity",
                    passed=excess <= rtol * m,
                    residual=max(0.0, excess),
                    threshold=rtol * m,
                    participant=p.id,
                )
            )
        else:
            gap = abs(marginal - m)
            checks.append(
                CheckResult(
                    name="stationarity", passed=gap <= rtol * m, residual=gap, threshold=rtol * m, participant=p.id
                )
            )

    total = sum(p.w for p in ps)
    imbalance = abs(sum(res.allocations[p.id].w_tr for p in ps))
    checks.append(
        CheckResult(
            name="market_clearing",
            passed=imbalance <= clearing_tol * total,
            residual=imbalance,
            threshold=clearing_tol * total,
        )
    )
    return VerificationReport(checks=checks)


def price_curve(
    ps: Sequence[Participant], cfg: MarketConfig, totals: Iterable[float]
) -> list[tuple[float, float]]:
    """Clearing price against total allocation W, scaling every endowment proportionally."""
    base = sum(p.w for p in ps)
    if not base > 0:
        raise DomainError("total endowment W must be positive")
    curve: list[tuple[float, float]] = []
    for total in totals:
        factor = total / base
        scaled = [p.model_copy(update={"w": p.w * factor}) for p in ps]
        curve.append((total, clear_market(scaled, cfg).q))
    return curve
