"""Pair-wise trading: bilateral clearing, preference lists and whole-market pairing."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from itertools import combinations
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from watermarket.analysis.aggregate import total_welfare
from watermarket.errors import DegenerateError, DomainError
from watermarket.market.common_pool import clear_market
from watermarket.market.matching import deferred_acceptance
from watermarket.market.utility import agricultural_utility, autarky_price, require_valid, total_utility
from watermarket.models.market import Allocation, BilateralDeal, PairwiseOutcome, Preferences

if TYPE_CHECKING:
    from watermarket.models.market import (
        ClassificationReference,
        MarketConfig,
        Matching,
        PairingStrategy,
        Participant,
    )

SIDE_RTOL = 1e-9


def bilateral_clear(pi: Participant, pj: Participant, cfg: MarketConfig) -> BilateralDeal:
    """Clear a two-participant market at its own price q̃."""
    res = clear_market([pi, pj], cfg)
    alloc_i, alloc_j = res.allocations[pi.id], res.allocations[pj.id]
    return BilateralDeal(
        i=pi.id,
        j=pj.id,
        q_tilde=res.q,
        alloc_i=alloc_i,
        alloc_j=alloc_j,
        gain_i=total_utility(alloc_i, res.q, pi, cfg) - agricultural_utility(pi.w, pi, cfg),
        gain_j=total_utility(alloc_j, res.q, pj, cfg) - agricultural_utility(pj.w, pj, cfg),
    )


class DealBook:
    """Memoised bilateral deals over unordered pairs of one population.

    Pairs holding no water at all cannot clear and are reported as ``None``.
    """

    def __init__(self, ps: Sequence[Participant], cfg: MarketConfig) -> None:
        self._by_id = {p.id: p for p in ps}
        self._cfg = cfg
        self._deals: dict[tuple[str, str], BilateralDeal | None] = {}

    def deal(self, i: str, j: str) -> BilateralDeal | None:
        key = (i, j) if i < j else (j, i)
        if key not in self._deals:
            pi, pj = self._by_id[key[0]], self._by_id[key[1]]
            self._deals[key] = bilateral_clear(pi, pj, self._cfg) if pi.w + pj.w > 0 else None
        return self._deals[key]

    def gain(self, pid: str, counterparty: str) -> float:
        deal = self.deal(pid, counterparty)
        return 0.0 if deal is None else deal.gain_of(pid)

    def surplus(self, i: str, j: str) -> float:
        deal = self.deal(i, j)
        return 0.0 if deal is None else deal.surplus


def _reference_price(ps: Sequence[Participant], cfg: MarketConfig, reference: ClassificationReference) -> float:
    if reference == "median":
        return float(np.median([autarky_price(p, cfg) for p in ps]))
    return clear_market(ps, cfg).q


def build_preferences(
    ps: Sequence[Participant],
    cfg: MarketConfig,
    *,
    reference: ClassificationReference = "equilibrium",
    book: DealBook | None = None,
) -> Preferences:
    """Classify buyers and sellers against a reference price and rank counterparties by own gain.

    A participant whose autarky price is within a relative 1e-9 of the
    reference wants no trade and joins neither side.
    """
    require_valid(ps, cfg)
    book = book or DealBook(ps, cfg)
    ref = _reference_price(ps, cfg, reference)

    buyers: list[str] = []
    sellers: list[str] = []
    for p in sorted(ps, key=lambda x: x.id):
        price = autarky_price(p, cfg)
        if price > ref * (1.0 + SIDE_RTOL):
            buyers.append(p.id)
        elif price < ref * (1.0 - SIDE_RTOL):
            sellers.append(p.id)
    if not buyers or not sellers:
        raise DegenerateError(f"cannot match {len(buyers)} buyers with {len(sellers)} sellers")

    def _ranking(pid: str, counterparties: list[str]) -> list[str]:
        return sorted(counterparties, key=lambda other: (-book.gain(pid, other), other))

    return Preferences(
        buyers={b: _ranking(b, sellers) for b in buyers},
        sellers={s: _ranking(s, buyers) for s in sellers},
        reference_price=ref,
    )


def enumerate_pairings(ids: Sequence[str]) -> Iterator[list[tuple[str, str]]]:
    """Every partition of ``ids`` into disjoint pairs; odd populations leave exactly one out."""
    items = list(ids)
    if len(items) % 2:
        for k in range(len(items)):
            yield from _perfect_pairings(items[:k] + items[k + 1 :])
    else:
        yield from _perfect_pairings(items)


def _perfect_pairings(items: list[str]) -> Iterator[list[tuple[str, str]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        for tail in _perfect_pairings(rest[:k] + rest[k + 1 :]):
            yield [(first, partner), *tail]


def _random_pairs(ps: Sequence[Participant], seed: int | None) -> list[tuple[str, str]]:
    order = np.random.default_rng(seed).permutation(len(ps))
    ids = [ps[k].id for k in order]
    return [(ids[k], ids[k + 1]) for k in range(0, len(ids) - 1, 2)]


def _greedy_pairs(ps: Sequence[Participant], book: DealBook) -> list[tuple[str, str]]:
    ids = sorted(p.id for p in ps)
    candidates = sorted(combinations(ids, 2), key=lambda pair: (-book.surplus(*pair), pair))
    taken: set[str] = set()
    pairs: list[tuple[str, str]] = []
    for i, j in candidates:
        if i in taken or j in taken:
            continue
        pairs.append((i, j))
        taken.update((i, j))
    return pairs


def execute_pairing(
    pairs: Sequence[tuple[str, str]],
    ps: Sequence[Participant],
    cfg: MarketConfig,
    *,
    strategy: PairingStrategy,
    book: DealBook | None = None,
    matching: Matching | None = None,
) -> PairwiseOutcome:
    """Run bilateral clearing on every pair; everyone else stays in autarky."""
    book = book or DealBook(ps, cfg)
    allocations: dict[str, Allocation] = {p.id: Allocation(w_ag=p.w, w_tr=0.0) for p in ps}
    prices: dict[str, float | None] = dict.fromkeys(allocations)
    deals: list[BilateralDeal] = []
    for i, j in pairs:
        deal = book.deal(i, j)
        if deal is None:
            logger.debug("Pair ({}, {}) holds no water; both stay in autarky", i, j)
            continue
        deals.append(deal)
        for pid in (deal.i, deal.j):
            allocations[pid] = deal.allocation_of(pid)
            prices[pid] = deal.q_tilde

    traded = {pid for deal in deals for pid in (deal.i, deal.j)}
    return PairwiseOutcome(
        deals=deals,
        autarky=sorted(pid for pid in allocations if pid not in traded),
        allocations=allocations,
        prices=prices,
        total_welfare=total_welfare(allocations, prices, ps, cfg),
        strategy=strategy,
        matching=matching,
    )


def pairwise_market(
    ps: Sequence[Participant],
    strategy: PairingStrategy,
    cfg: MarketConfig,
    seed: int | None = None,
    *,
    reference: ClassificationReference = "equilibrium",
    book: DealBook | None = None,
) -> PairwiseOutcome:
    """One round of pair-wise trading under a pairing strategy."""
    require_valid(ps, cfg)
    book = book or DealBook(ps, cfg)
    matching: Matching | None = None

    if strategy == "random":
        pairs = _random_pairs(ps, seed)
    elif strategy == "greedy":
        pairs = _greedy_pairs(ps, book)
    elif strategy == "stable":
        try:
            prefs = build_preferences(ps, cfg, reference=reference, book=book)
        except DegenerateError as exc:
            logger.warning("Stable pairing degenerate, everyone stays in autarky: {}", exc)
            pairs = []
        else:
            matching = deferred_acceptance(prefs)
            pairs = matching.pairs
    else:
        raise DomainError(f"unknown pairing strategy: {strategy}")

    return execute_pairing(pairs, ps, cfg, strategy=strategy, book=book, matching=matching)


def mechanism_stages(matching: Matching | None) -> dict[str, int]:
    """Stage counts side by side: the common pool clears in one event."""
    if matching is None:
        return {"common_pool": 1, "pairwise": 0, "bound": 0}
    return {"common_pool": 1, "pairwise": matching.stages, "bound": matching.stage_bound}
