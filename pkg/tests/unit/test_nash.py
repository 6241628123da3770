"""Tests for the unilateral-deviation test."""

from __future__ import annotations

import numpy as np
import pytest

from tests.factories import make_participant, random_market
from watermarket.analysis.nash import deviation_gain, nash_deviation_test
from watermarket.analysis.pareto import mispriced_result
from watermarket.market.common_pool import clear_market


def test_equilibrium_share_has_zero_gain(three, murray) -> None:
    res = clear_market(three, murray)
    p = three[0]
    assert deviation_gain(res, p, res.allocations[p.id].w_ag / p.w, murray) == pytest.approx(0.0, abs=1e-9)


def test_no_profitable_deviation_on_fixture(three, murray) -> None:
    report = nash_deviation_test(clear_market(three, murray), three, murray, n_samples=100, seed=1)
    assert report.passed
    assert len(report.checks) == 3


def test_mispriced_allocation_admits_deviation(three, murray) -> None:
    control = mispriced_result(clear_market(three, murray), three, murray, factor=2.0)
    report = nash_deviation_test(control, three, murray, n_samples=100, seed=1)
    assert [c.participant for c in report.failures()] == ["p1"]


def test_zero_endowment_participant_handled(murray) -> None:
    ps = [make_participant("dry", w=0.0), make_participant("wet", a=2.0, w=8.0)]
    report = nash_deviation_test(clear_market(ps, murray), ps, murray, n_samples=20, seed=2)
    assert report.passed


@pytest.mark.slow
def test_no_profitable_deviation_on_random_equilibria() -> None:
    rng = np.random.default_rng(6)
    for k in range(200):
        ps, cfg = random_market(rng, int(rng.integers(2, 21)))
        report = nash_deviation_test(clear_market(ps, cfg), ps, cfg, n_samples=100, seed=k)
        assert report.passed, report.failures()
