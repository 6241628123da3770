"""Tests for the welfare comparison between mechanisms."""

from __future__ import annotations

import numpy as np
import pytest

from tests.factories import random_market
from watermarket.analysis.aggregate import agent_utilities, total_welfare
from watermarket.analysis.welfare import best_pairing_welfare, pairing_dominance, welfare_gap, welfare_scale
from watermarket.market.common_pool import clear_market
from watermarket.market.pairwise import DealBook
from watermarket.models.market import Allocation


@pytest.mark.parametrize("strategy", ["random", "greedy", "stable"])
def test_common_pool_dominates_on_fixture(three, murray, strategy: str) -> None:
    report = welfare_gap(three, murray, strategy, seed=3)
    assert report.gap > 0
    assert report.common_pool_dominates()
    assert report.u_common == pytest.approx(sum(a.common for a in report.per_agent))
    assert report.u_pairwise == pytest.approx(sum(a.pairwise for a in report.per_agent))


def test_best_pairing_below_common_pool(three, murray) -> None:
    best, pairs = best_pairing_welfare(three, murray)
    res = clear_market(three, murray)
    assert best <= total_welfare(res.allocations, res.q, three, murray)
    assert len(pairs) == 1


def test_pairing_dominance_checks_every_pairing(three, murray) -> None:
    report = pairing_dominance(three, murray)
    assert len(report.checks) == 3
    assert report.passed


def test_agent_utilities_without_price_requires_no_trade(three, murray) -> None:
    allocs = {p.id: Allocation(w_ag=p.w, w_tr=0.0) for p in three}
    utilities = agent_utilities(allocs, dict.fromkeys(allocs), three, murray)
    assert set(utilities) == {"p1", "p2", "p3"}
    allocs["p1"] = Allocation(w_ag=9.0, w_tr=1.0)
    with pytest.raises(ValueError, match="without a price"):
        agent_utilities(allocs, dict.fromkeys(allocs), three, murray)


def test_welfare_scale_never_zero() -> None:
    assert welfare_scale(0.0) == 1.0
    assert welfare_scale(-5.0) == 5.0


@pytest.mark.slow
def test_common_pool_beats_every_pairing_exhaustively() -> None:
    rng = np.random.default_rng(3)
    for n in (4, 6):
        for _ in range(200):
            ps, cfg = random_market(rng, n)
            report = pairing_dominance(ps, cfg)
            assert len(report.checks) == {4: 3, 6: 15}[n]
            assert report.passed, report.failures()


@pytest.mark.slow
def test_common_pool_beats_sampled_pairings() -> None:
    rng = np.random.default_rng(4)
    for k in range(500):
        ps, cfg = random_market(rng, int(rng.integers(2, 21)))
        book = DealBook(ps, cfg)
        for strategy in ("random", "greedy", "stable"):
            report = welfare_gap(ps, cfg, strategy, seed=k, book=book)
            assert report.gap >= -1e-9 * report.scale
