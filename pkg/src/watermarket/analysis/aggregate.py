"""Welfare aggregation."""

from __future__ import annotations

from collections.abc import Mapping
from typing import TYPE_CHECKING

from watermarket.market.utility import total_utility

if TYPE_CHECKING:
    from collections.abc import Sequence

    from watermarket.models.market import Allocation, MarketConfig, Participant


def agent_utilities(
    allocs: Mapping[str, Allocation],
    q: float | Mapping[str, float | None],
    ps: Sequence[Participant],
    cfg: MarketConfig,
) -> dict[str, float]:
    """Utility of every participant; ``q`` is one market price or a per-participant price map."""
    utilities: dict[str, float] = {}
    for p in ps:
        alloc = allocs[p.id]
        price = q.get(p.id) if isinstance(q, Mapping) else q
        if price is None:
            if alloc.w_tr != 0:
                raise ValueError(f"participant {p.id} trades without a price")
            price = 0.0
        utilities[p.id] = total_utility(alloc, price, p, cfg)
    return utilities


def total_welfare(
    allocs: Mapping[str, Allocation],
    q: float | Mapping[str, float | None],
    ps: Sequence[Participant],
    cfg: MarketConfig,
) -> float:
    """Overall welfare Σ_i U_i."""
    return sum(agent_utilities(allocs, q, ps, cfg).values())
