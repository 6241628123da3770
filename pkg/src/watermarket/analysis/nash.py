"""Unilateral-deviation test of the pool equilibrium."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from watermarket.analysis.aggregate import total_welfare
from watermarket.analysis.welfare import welfare_scale
from watermarket.market.utility import total_utility
from watermarket.models.market import Allocation, CheckResult, VerificationReport

if TYPE_CHECKING:
    from collections.abc import Sequence

    from watermarket.models.market import ClearingResult, MarketConfig, Participant

NASH_TOL = 1e-9


def deviation_gain(
    res: ClearingResult, p: Participant, alpha: float, cfg: MarketConfig
) -> float:
    """Utility change when ``p`` irrigates α·w instead of its equilibrium share, at the fixed price."""
    alloc = res.allocations[p.id]
    w_ag = alpha * p.w
    deviation = Allocation(w_ag=w_ag, w_tr=p.w - w_ag)
    return total_utility(deviation, res.q, p, cfg) - total_utility(alloc, res.q, p, cfg)


def nash_deviation_test(
    res: ClearingResult,
    ps: Sequence[Participant],
    cfg: MarketConfig,
    n_samples: int = 100,
    seed: int | None = None,
    *,
    tol: float = NASH_TOL,
) -> VerificationReport:
    """Sample deviations per participant; none may beat the equilibrium beyond tol·scale.

    Samples always include α′ = 0 and the equilibrium share. A zero-endowment
    participant deviates in w_ag directly since α is undefined for it.
    """
    scale = welfare_scale(total_welfare(res.allocations, res.q, ps, cfg))
    threshold = tol * scale
    rng = np.random.default_rng(seed)
    checks: list[CheckResult] = []

    for p in ps:
        alloc = res.allocations[p.id]
        if p.w > 0:
            alpha_eq = alloc.w_ag / p.w
            alphas = [0.0, alpha_eq, *rng.uniform(0.0, max(2.0 * alpha_eq, 2.0), n_samples)]
            gains = [deviation_gain(res, p, float(alpha), cfg) for alpha in alphas]
        else:
            levels = [0.0, alloc.w_ag, *rng.uniform(0.0, max(2.0 * alloc.w_ag, 1.0), n_samples)]
            base = total_utility(alloc, res.q, p, cfg)
            gains = [
                total_utility(Allocation(w_ag=float(x), w_tr=-float(x)), res.q, p, cfg) - base for x in levels
            ]
        best = max(gains)
        checks.append(
            CheckResult(
                name="unilateral_deviation",
                passed=best <= threshold,
                residual=max(0.0, best),
                threshold=threshold,
                participant=p.id,
            )
        )
    return VerificationReport(checks=checks)
