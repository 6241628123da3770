"""Aggregate market calibration of the closed-form clearing price against monthly data."""

from __future__ import annotations

import itertools
import math
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from watermarket.calibration._multistart import axis, best_least_squares
from watermarket.errors import FitError
from watermarket.models.calibration import CalibrationFit

if TYPE_CHECKING:
    from collections.abc import Sequence

    from watermarket.models.calibration import MarketRow, PriceTarget

GAMMA_BOUNDS = (0.05, 0.95)
SB_RATIO_MAX = 100.0
LOG_SA_BOUND = 700.0
MIN_ROWS = 4


def aggregate_price(
    water_ml: np.ndarray | float,
    crop_price: np.ndarray | float,
    *,
    s_b: float,
    log_s_a: float,
    gamma: float,
    T: float,
    rate: float,
) -> np.ndarray:
    """q = [(W/(1−γ) + S_b)/S_a]^{γ−1}·p_cr·e^{−λT}, evaluated in log space."""
    water = np.asarray(water_ml, dtype=float)
    log_ratio = np.log(water / (1.0 - gamma) + s_b) - log_s_a
    return np.exp((gamma - 1.0) * log_ratio - rate * T) * np.asarray(crop_price, dtype=float)


def _targets(rows: Sequence[MarketRow], target: PriceTarget) -> tuple[np.ndarray, str]:
    if target == "model" and all(row.model_price is not None for row in rows):
        return np.array([row.model_price for row in rows], dtype=float), "model"
    if target == "model":
        logger.info("Model price column incomplete; fitting against actual prices")
    return np.array([row.actual_price for row in rows], dtype=float), "actual"


def fit_market_aggregates(
    rows: Sequence[MarketRow],
    rate: float = 0.06,
    n: int = 15,
    *,
    target: PriceTarget = "model",
    grid: int = 5,
    t_bounds: tuple[float, float] = (0.2, 1.2),
    gl_to_ml: float = 1000.0,
) -> CalibrationFit:
    """Fit (S_b, S_a, γ, T) to monthly prices.

    Only S_b, γ and the price scale S_a^{1−γ}·e^{−λT} are identified by the data;
    S_a and T trade off against each other along that scale. The scale is returned
    as ``params["scale"]`` and is what :func:`market_model_price` relies on.
    """
    if len(rows) < MIN_ROWS:
        raise FitError(f"market fit needs at least {MIN_ROWS} rows, got {len(rows)}")
    if t_bounds[0] <= 0 or t_bounds[0] > t_bounds[1]:
        raise FitError(f"invalid growing period bounds {t_bounds}")
    water = np.array([row.water_gl for row in rows], dtype=float) * gl_to_ml
    crop = np.array([row.crop_price for row in rows], dtype=float)
    q_target, used = _targets(rows, target)
    if np.ptp(water) == 0:
        raise FitError("market fit needs at least two distinct water totals")
    mean_water = float(water.mean())

    def residuals(theta: np.ndarray) -> np.ndarray:
        s_b_ratio, log_s_a, gamma, period = theta
        q = aggregate_price(
            water, crop, s_b=s_b_ratio * mean_water, log_s_a=log_s_a, gamma=gamma, T=period, rate=rate
        )
        return q / q_target - 1.0

    lower = np.array([0.0, -LOG_SA_BOUND, GAMMA_BOUNDS[0], t_bounds[0]])
    upper = np.array([SB_RATIO_MAX, LOG_SA_BOUND, GAMMA_BOUNDS[1], t_bounds[1]])

    starts = []
    log_q = np.log(q_target / crop)
    for s_b_ratio, gamma, period in itertools.product(
        axis(0.0, 2.0, grid),
        axis(GAMMA_BOUNDS[0] + 0.05, GAMMA_BOUNDS[1] - 0.05, grid),
        axis(t_bounds[0], t_bounds[1], grid),
    ):
        # ln S_a enters linearly in log price, so its best value per start is a mean.
        log_base = np.log(water / (1.0 - gamma) + s_b_ratio * mean_water)
        log_s_a = float(np.mean(log_q + rate * period - (gamma - 1.0) * log_base)) / (1.0 - gamma)
        starts.append(np.array([s_b_ratio, log_s_a, gamma, period]))

    best, tried, converged = best_least_squares(residuals, starts, lower, upper, label="market aggregate")
    s_b_ratio, log_s_a, gamma, period = (float(x) for x in best.x)
    relative = best.fun
    s_b = s_b_ratio * mean_water
    return CalibrationFit(
        kind="market",
        params={
            "S_b": s_b,
            "S_a": math.exp(log_s_a),
            "log_S_a": log_s_a,
            "gamma": gamma,
            "T": period,
            "scale": math.exp((1.0 - gamma) * log_s_a - rate * period),
        },
        residuals=[float(r) for r in relative],
        rms=float(np.sqrt(np.mean(relative**2))),
        cost=float(best.cost),
        starts=tried,
        converged=converged,
        metadata={"lambda": rate, "n": n, "gl_to_ml": gl_to_ml, "target": used, "rows": len(rows)},
    )


def market_model_price(fit: CalibrationFit, water_gl: float | np.ndarray, crop_price: float | np.ndarray) -> np.ndarray:
    """Model water price ($/ML) for a total allocation in GL and a crop price."""
    if fit.kind != "market":
        raise FitError(f"expected a market fit, got {fit.kind!r}")
    gl_to_ml = float(fit.metadata.get("gl_to_ml", 1000.0))
    return aggregate_price(
        np.asarray(water_gl, dtype=float) * gl_to_ml,
        crop_price,
        s_b=fit.params["S_b"],
        log_s_a=fit.params["log_S_a"],
        gamma=fit.params["gamma"],
        T=fit.params["T"],
        rate=float(fit.metadata.get("lambda", 0.0)),
    )
