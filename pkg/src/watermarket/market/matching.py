"""Buyer-proposing deferred acceptance with stage counting."""

from __future__ import annotations

from collections import defaultdict

from loguru import logger

from watermarket.errors import DomainError
from watermarket.models.market import Matching, Preferences


def check_preferences(prefs: Preferences) -> None:
    """Raise DomainError when a list names an unknown counterparty or repeats one."""
    for side, own, other in (("buyer", prefs.buyers, prefs.sellers), ("seller", prefs.sellers, prefs.buyers)):
        for pid, ranking in own.items():
            unknown = [x for x in ranking if x not in other]
            if unknown:
                raise DomainError(f"{side} {pid} ranks unknown counterparties: {', '.join(unknown)}")
            if len(set(ranking)) != len(ranking):
                raise DomainError(f"{side} {pid} ranks a counterparty twice")


def deferred_acceptance(prefs: Preferences) -> Matching:
    """Stable matching by synchronized proposal rounds.

    In every stage each unmatched buyer that still has sellers left proposes
    to its best seller that has not yet rejected it; each seller keeps its
    favourite among the held offer and the new ones.
    """
    check_preferences(prefs)
    seller_rank = {s: {b: rank for rank, b in enumerate(ranking)} for s, ranking in prefs.sellers.items()}
    next_choice = dict.fromkeys(prefs.buyers, 0)
    held: dict[str, str] = {}
    free = sorted(prefs.buyers)
    stages = 0
    proposals = 0

    while True:
        proposing = [b for b in free if next_choice[b] < len(prefs.buyers[b])]
        if not proposing:
            break
        stages += 1
        offers: dict[str, list[str]] = defaultdict(list)
        for buyer in proposing:
            seller = prefs.buyers[buyer][next_choice[buyer]]
            next_choice[buyer] += 1
            offers[seller].append(buyer)
            proposals += 1

        rejected: list[str] = []
        for seller, bidders in offers.items():
            ranks = seller_rank[seller]
            candidates = [*bidders, held[seller]] if seller in held else list(bidders)
            acceptable = [c for c in candidates if c in ranks]
            keep = min(acceptable, key=ranks.__getitem__) if acceptable else None
            if keep is None:
                held.pop(seller, None)
            else:
                held[seller] = keep
            rejected.extend(c for c in candidates if c != keep)

        free = sorted(set(rejected) | {b for b in free if b not in proposing})
        logger.debug("Stage {}: {} proposals, {} rejected", stages, len(proposing), len(rejected))

    pairs = sorted((buyer, seller) for seller, buyer in held.items())
    matched = {x for pair in pairs for x in pair}
    unmatched = sorted(pid for pid in (*prefs.buyers, *prefs.sellers) if pid not in matched)
    return Matching(
        pairs=pairs,
        unmatched=unmatched,
        stages=stages,
        proposals=proposals,
        n_buyers=len(prefs.buyers),
        n_sellers=len(prefs.sellers),
    )


def find_blocking_pairs(prefs: Preferences, matching: Matching) -> list[tuple[str, str]]:
    """Every (buyer, seller) pair that both prefer each other to their assigned partners."""
    buyer_partner = {b: s for b, s in matching.pairs}
    seller_partner = {s: b for b, s in matching.pairs}
    seller_rank = {s: {b: rank for rank, b in enumerate(ranking)} for s, ranking in prefs.sellers.items()}

    blocking: list[tuple[str, str]] = []
    for buyer, ranking in prefs.buyers.items():
        current = buyer_partner.get(buyer)
        for seller in ranking:
            if seller == current:
                break
            ranks = seller_rank[seller]
            if buyer not in ranks:
                continue
            rival = seller_partner.get(seller)
            if rival is None or ranks[buyer] < ranks.get(rival, len(ranks)):
                blocking.append((buyer, seller))
    return blocking
