"""Tests for the HARA utility algebra."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tests.factories import make_config, make_participant
from watermarket.errors import DomainError
from watermarket.market.utility import (
    agricultural_utility,
    autarky_price,
    classify_role,
    crop_yield,
    marginal_agricultural_utility,
    require_valid,
    total_utility,
    trading_utility,
    utility_by_share,
    validate,
    validate_population,
)
from watermarket.models.market import Allocation

gammas = st.floats(min_value=0.1, max_value=0.9)
efficiencies = st.floats(min_value=0.1, max_value=5.0)
intercepts = st.floats(min_value=0.0, max_value=2.0)


def test_crop_yield_reference_point() -> None:
    p = make_participant(a=1.0, b=0.0)
    assert crop_yield(0.5, p, make_config(gamma=0.5)) == pytest.approx(1.0, rel=1e-15)


def test_crop_yield_at_zero_is_intercept_term() -> None:
    p = make_participant(a=2.0, b=0.25)
    assert crop_yield(0.0, p, make_config(gamma=0.5)) == pytest.approx(0.5, rel=1e-15)


def test_crop_yield_negative_argument_raises() -> None:
    p = make_participant(a=1.0, b=0.1)
    with pytest.raises(DomainError, match="HARA argument"):
        crop_yield(-1.0, p, make_config(gamma=0.5))


def test_agricultural_utility_scales_with_crop_price() -> None:
    p = make_participant()
    low = agricultural_utility(3.0, p, make_config(p_cr=100.0))
    high = agricultural_utility(3.0, p, make_config(p_cr=300.0))
    assert high == pytest.approx(3.0 * low, rel=1e-14)


def test_trading_utility_is_symmetric_in_sign() -> None:
    cfg = make_config(lambda_=0.06, T=0.5)
    assert trading_utility(2.0, 100.0, cfg) == pytest.approx(200.0 * math.exp(0.03))
    assert trading_utility(-2.0, 100.0, cfg) == -trading_utility(2.0, 100.0, cfg)


def test_total_utility_adds_both_parts() -> None:
    p = make_participant(w=5.0)
    cfg = make_config()
    alloc = Allocation(w_ag=3.0, w_tr=2.0)
    expected = agricultural_utility(3.0, p, cfg) + trading_utility(2.0, 90.0, cfg)
    assert total_utility(alloc, 90.0, p, cfg) == pytest.approx(expected, rel=1e-15)


def test_marginal_singular_at_zero_base() -> None:
    p = make_participant(b=0.0)
    with pytest.raises(DomainError):
        marginal_agricultural_utility(0.0, p, make_config())


def test_autarky_price_infinite_for_empty_zero_intercept() -> None:
    p = make_participant(b=0.0, w=0.0)
    assert autarky_price(p, make_config()) == math.inf


def test_autarky_price_matches_marginal() -> None:
    p = make_participant()
    cfg = make_config()
    assert autarky_price(p, cfg) * cfg.growth == pytest.approx(marginal_agricultural_utility(p.w, p, cfg))


def test_gradient_suite_matches_central_differences() -> None:
    rng = np.random.default_rng(20240601)
    for _ in range(1000):
        p = make_participant(a=float(rng.uniform(0.1, 5.0)), b=float(rng.uniform(0.0, 2.0)))
        cfg = make_config(gamma=float(rng.uniform(0.1, 0.9)), p_cr=float(rng.uniform(100.0, 400.0)))
        w = float(rng.uniform(0.1, 100.0))
        h = 1e-6 * max(1.0, abs(w))
        numeric = (agricultural_utility(w + h, p, cfg) - agricultural_utility(w - h, p, cfg)) / (2.0 * h)
        analytic = marginal_agricultural_utility(w, p, cfg)
        assert abs(numeric - analytic) <= 1e-6 * abs(analytic)


@given(a=efficiencies, b=intercepts, gamma=gammas, w=st.floats(min_value=0.01, max_value=100.0))
@settings(max_examples=200, deadline=None)
def test_utility_strictly_increasing_and_concave(a: float, b: float, gamma: float, w: float) -> None:
    p = make_participant(a=a, b=b)
    cfg = make_config(gamma=gamma)
    step = 0.5 * w
    lo, mid, hi = (agricultural_utility(x, p, cfg) for x in (w - step, w, w + step))
    assert lo < mid < hi
    assert mid - lo > hi - mid


@given(a=efficiencies, b=intercepts, gamma=gammas, w=st.floats(min_value=0.01, max_value=100.0))
@settings(max_examples=200, deadline=None)
def test_marginal_decreasing(a: float, b: float, gamma: float, w: float) -> None:
    p = make_participant(a=a, b=b)
    cfg = make_config(gamma=gamma)
    assert marginal_agricultural_utility(w, p, cfg) > marginal_agricultural_utility(2.0 * w, p, cfg)


def test_utility_by_share_splits_endowment() -> None:
    p = make_participant(w=4.0)
    cfg = make_config()
    direct = total_utility(Allocation(w_ag=1.0, w_tr=3.0), 80.0, p, cfg)
    assert utility_by_share(0.25, 80.0, p, cfg) == pytest.approx(direct, rel=1e-15)


def test_utility_by_share_rejects_negative_share() -> None:
    with pytest.raises(DomainError):
        utility_by_share(-0.1, 80.0, make_participant(), make_config())


@pytest.mark.parametrize(
    ("alpha", "role"),
    [(0.0, "seller"), (0.4, "seller"), (1.0, "outsider"), (1.0 + 1e-13, "outsider"), (1.5, "buyer")],
)
def test_classify_role(alpha: float, role: str) -> None:
    assert classify_role(alpha) == role


def test_validate_reports_every_violation() -> None:
    report = validate(make_participant(a=0.0, b=-1.0, w=-2.0), make_config(gamma=1.0, T=0.0))
    assert not report.valid
    assert len(report.violations) == 5


def test_validate_accepts_boundary_values() -> None:
    assert validate(make_participant(b=0.0, w=0.0), make_config(lambda_=0.0)).valid


def test_validate_population_duplicates_and_empty_water() -> None:
    ps = [make_participant("x", w=0.0), make_participant("x", w=0.0)]
    report = validate_population(ps, make_config())
    assert any("unique" in v for v in report.violations)
    assert any("W must be positive" in v for v in report.violations)


def test_require_valid_raises_domain_error() -> None:
    with pytest.raises(DomainError, match="γ"):
        require_valid([make_participant()], make_config(gamma=0.0))
    with pytest.raises(DomainError, match="at least one"):
        require_valid([], make_config())
