"""Welfare comparison of the common pool against pair-wise trading."""

from __future__ import annotations

from typing import TYPE_CHECKING

from loguru import logger

from watermarket.analysis.aggregate import agent_utilities
from watermarket.market.common_pool import clear_market
from watermarket.market.pairwise import DealBook, enumerate_pairings, execute_pairing, pairwise_market
from watermarket.models.market import AgentWelfare, CheckResult, VerificationReport, WelfareReport

if TYPE_CHECKING:
    from collections.abc import Sequence

    from watermarket.models.market import ClassificationReference, MarketConfig, PairingStrategy, Participant

WELFARE_TOL = 1e-9


def welfare_scale(u_common: float) -> float:
    """Reference magnitude for relative welfare tolerances."""
    return abs(u_common) or 1.0


def welfare_gap(
    ps: Sequence[Participant],
    cfg: MarketConfig,
    strategy: PairingStrategy,
    seed: int | None = None,
    *,
    reference: ClassificationReference = "equilibrium",
    book: DealBook | None = None,
) -> WelfareReport:
    """Clear the same population both ways and report the welfare difference."""
    res = clear_market(ps, cfg)
    outcome = pairwise_market(ps, strategy, cfg, seed, reference=reference, book=book)

    common = agent_utilities(res.allocations, res.q, ps, cfg)
    pairwise = agent_utilities(outcome.allocations, outcome.prices, ps, cfg)
    u_common = sum(common.values())
    u_pairwise = sum(pairwise.values())
    report = WelfareReport(
        u_common=u_common,
        u_pairwise=u_pairwise,
        gap=u_common - u_pairwise,
        scale=welfare_scale(u_common),
        strategy=strategy,
        seed=seed,
        per_agent=[AgentWelfare(id=p.id, common=common[p.id], pairwise=pairwise[p.id]) for p in ps],
    )
    logger.debug("Welfare gap {:.6g} under {} pairing (seed={})", report.gap, strategy, seed)
    return report


def best_pairing_welfare(
    ps: Sequence[Participant], cfg: MarketConfig, *, book: DealBook | None = None
) -> tuple[float, list[tuple[str, str]]]:
    """Maximum pair-wise welfare over every possible pairing, by exhaustive enumeration."""
    book = book or DealBook(ps, cfg)
    best_welfare = float("-inf")
    best_pairs: list[tuple[str, str]] = []
    for pairs in enumerate_pairings([p.id for p in ps]):
        welfare = execute_pairing(pairs, ps, cfg, strategy="random", book=book).total_welfare
        if welfare > best_welfare:
            best_welfare, best_pairs = welfare, pairs
    return best_welfare, best_pairs


def pairing_dominance(
    ps: Sequence[Participant], cfg: MarketConfig, *, tol: float = WELFARE_TOL, book: DealBook | None = None
) -> VerificationReport:
    """Check common-pool welfare against every pairing of the population."""
    book = book or DealBook(ps, cfg)
    res = clear_market(ps, cfg)
    u_common = sum(agent_utilities(res.allocations, res.q, ps, cfg).values())
    threshold = tol * welfare_scale(u_common)

    checks: list[CheckResult] = []
    for pairs in enumerate_pairings([p.id for p in ps]):
        welfare = execute_pairing(pairs, ps, cfg, strategy="random", book=book).total_welfare
        excess = welfare - u_common
        checks.append(
            CheckResult(
                name="pairing:" + ",".join(f"{i}-{j}" for i, j in pairs),
                passed=excess <= threshold,
                residual=max(0.0, excess),
                threshold=threshold,
            )
        )
    return VerificationReport(checks=checks)
