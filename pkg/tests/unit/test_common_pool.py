"""Tests for common-pool clearing."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tests.factories import make_config, make_participant, make_three, random_market
from watermarket.errors import BracketError, DomainError
from watermarket.market.common_pool import (
    clear_market,
    clearing_price_closed_form,
    clearing_price_numeric,
    clearing_price_printed_form,
    compare_price_forms,
    desired_irrigation,
    excess_demand,
    individual_optimum,
    price_curve,
    verify_kkt,
)
from watermarket.market.utility import marginal_agricultural_utility
from watermarket.models.market import Allocation

THREE_PRICE = 280.0 * math.exp(-0.03) / math.sqrt(9.3)


def test_individual_optimum_worked_example() -> None:
    p = make_participant(a=1.0, b=0.0, w=2.0)
    cfg = make_config(gamma=0.5, p_cr=1.0, lambda_=0.0, T=1.0)
    alloc = individual_optimum(1.0, p, cfg)
    assert alloc.w_ag == pytest.approx(0.5, rel=1e-14)
    assert alloc.w_tr == pytest.approx(1.5, rel=1e-14)


def test_individual_optimum_at_autarky_price_does_not_trade() -> None:
    p = make_participant(w=5.0)
    cfg = make_config()
    q = marginal_agricultural_utility(p.w, p, cfg) / cfg.growth
    assert individual_optimum(q, p, cfg).w_tr == pytest.approx(0.0, abs=1e-9)


def test_individual_optimum_high_price_sells_everything() -> None:
    p = make_participant(b=0.5, w=5.0)
    alloc = individual_optimum(1e12, p, make_config())
    assert alloc == Allocation(w_ag=0.0, w_tr=5.0)


def test_individual_optimum_rejects_nonpositive_price() -> None:
    with pytest.raises(DomainError):
        individual_optimum(0.0, make_participant(), make_config())


def test_desired_irrigation_can_be_negative() -> None:
    assert desired_irrigation(1e12, make_participant(b=0.5), make_config()) < 0


def test_three_participant_clearing(three, murray) -> None:
    res = clear_market(three, murray)
    assert res.q == pytest.approx(THREE_PRICE, rel=1e-12)
    assert res.m == pytest.approx(res.q * murray.growth, rel=1e-15)
    assert res.allocations["p1"].w_ag == pytest.approx(2.225, rel=1e-12)
    assert res.allocations["p2"].w_ag == pytest.approx(4.55, rel=1e-12)
    assert res.allocations["p3"].w_ag == pytest.approx(9.225, rel=1e-12)
    assert sum(a.w_tr for a in res.allocations.values()) == pytest.approx(0.0, abs=1e-9 * 16.0)
    assert res.clamped == []
    assert res.total_water == 16.0


def test_closed_form_and_numeric_agree_on_fixture(three, murray) -> None:
    closed = clearing_price_closed_form(three, murray)
    numeric = clearing_price_numeric(three, murray)
    assert abs(closed - numeric) / numeric <= 1e-8


def test_numeric_method_result(three, murray) -> None:
    res = clear_market(three, murray, method="numeric")
    assert res.method == "numeric"
    assert verify_kkt(res, three, murray).passed


def test_printed_form_differs_for_unequal_efficiencies(three, murray) -> None:
    forms = compare_price_forms(three, murray)
    assert forms["derived_rel_error"] <= 1e-8
    assert forms["printed_rel_error"] > 1e-3
    assert forms["printed"] == clearing_price_printed_form(three, murray)


def test_homogeneous_population_clears_at_autarky_price() -> None:
    ps = [make_participant(f"p{k}", a=1.0, b=0.2, w=4.0) for k in range(4)]
    cfg = make_config()
    res = clear_market(ps, cfg)
    for alloc in res.allocations.values():
        assert alloc.w_tr == pytest.approx(0.0, abs=1e-10)


def test_single_participant_market_is_autarky() -> None:
    p = make_participant(w=3.0)
    res = clear_market([p], make_config())
    assert res.allocations[p.id].w_ag == pytest.approx(3.0, rel=1e-12)


def test_complementarity_loop_clamps_low_value_participant() -> None:
    ps = [
        make_participant("poor", a=0.1, b=2.0, w=1.0),
        make_participant("rich", a=5.0, b=0.0, w=1.0),
    ]
    cfg = make_config()
    res = clear_market(ps, cfg)
    assert res.clamped == ["poor"]
    assert res.passes == 2
    assert res.allocations["poor"] == Allocation(w_ag=0.0, w_tr=1.0)
    assert res.allocations["rich"].w_ag == pytest.approx(2.0, rel=1e-12)
    assert verify_kkt(res, ps, cfg).passed
    numeric = clearing_price_numeric(ps, cfg)
    assert abs(res.q - numeric) / numeric <= 1e-8


def test_clear_market_rejects_invalid_population() -> None:
    with pytest.raises(DomainError):
        clear_market([make_participant(a=-1.0)], make_config())
    with pytest.raises(DomainError, match="W must be positive"):
        clear_market([make_participant(w=0.0)], make_config())


def test_bracket_error_when_cap_exhausted() -> None:
    ps = [make_participant("dry", b=0.0, w=0.0), make_participant("wet", w=5.0)]
    with pytest.raises(BracketError) as info:
        clearing_price_numeric(ps, make_config(), max_expansions=0)
    assert info.value.expansions == 0


def test_excess_demand_sign_around_clearing_price(three, murray) -> None:
    q = clear_market(three, murray).q
    assert excess_demand(0.5 * q, three, murray) > 0
    assert excess_demand(2.0 * q, three, murray) < 0


def test_verify_kkt_flags_broken_budget(three, murray) -> None:
    res = clear_market(three, murray)
    w_tr = res.allocations["p1"].w_tr
    broken = res.model_copy(update={"allocations": {**res.allocations, "p1": Allocation(w_ag=3.0, w_tr=w_tr)}})
    names = {check.name for check in verify_kkt(broken, three, murray).failures()}
    assert names == {"budget", "stationarity"}


def test_verify_kkt_flags_unbalanced_trade(three, murray) -> None:
    res = clear_market(three, murray)
    shifted = res.model_copy(update={"allocations": {**res.allocations, "p1": Allocation(w_ag=3.0, w_tr=7.0)}})
    names = {check.name for check in verify_kkt(shifted, three, murray).failures()}
    assert names == {"stationarity", "market_clearing"}


def test_price_curve_decreasing_in_total_water(three, murray) -> None:
    curve = price_curve(three, murray, [8.0, 16.0, 32.0])
    prices = [q for _, q in curve]
    assert prices[0] > prices[1] > prices[2]
    assert prices[1] == pytest.approx(THREE_PRICE, rel=1e-12)


@given(scale=st.floats(min_value=0.5, max_value=4.0))
@settings(max_examples=50, deadline=None)
def test_price_linear_in_crop_price(scale: float) -> None:
    ps = make_three()
    base = clear_market(ps, make_config()).q
    scaled = clear_market(ps, make_config(p_cr=280.0 * scale)).q
    assert scaled == pytest.approx(scale * base, rel=1e-12)


@pytest.mark.slow
def test_clearing_oracle_equivalence_and_kkt_suite() -> None:
    rng = np.random.default_rng(1000)
    for _ in range(1000):
        ps, cfg = random_market(rng, int(rng.integers(2, 51)))
        res = clear_market(ps, cfg)
        numeric = clearing_price_numeric(ps, cfg)
        assert abs(res.q - numeric) / numeric <= 1e-8
        if not res.clamped:
            closed = clearing_price_closed_form(ps, cfg)
            assert abs(closed - numeric) / numeric <= 1e-8
        report = verify_kkt(res, ps, cfg)
        assert report.passed, report.failures()
