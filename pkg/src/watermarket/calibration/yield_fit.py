"""HARA yield-curve fit against (water, yield) observations."""

from __future__ import annotations

import itertools
from typing import TYPE_CHECKING

import numpy as np

from watermarket.calibration._multistart import axis, best_least_squares
from watermarket.errors import FitError
from watermarket.models.calibration import CalibrationFit

if TYPE_CHECKING:
    from collections.abc import Sequence

    from watermarket.models.calibration import YieldDatum

GAMMA_BOUNDS = (0.05, 0.95)
MIN_POINTS = 4


def hara_yield(water: np.ndarray, a: float, b: float, gamma: float) -> np.ndarray:
    """Y(w) = ((1−γ)/γ)·(a·w/(1−γ) + b)^γ evaluated elementwise."""
    base = a * np.asarray(water, dtype=float) / (1.0 - gamma) + b
    return (1.0 - gamma) / gamma * base**gamma


def _linearised_start(water: np.ndarray, crop: np.ndarray, gamma: float) -> tuple[float, float]:
    # Inverting Y for a fixed γ makes the HARA base linear in water.
    base = (np.maximum(crop, 0.0) * gamma / (1.0 - gamma)) ** (1.0 / gamma)
    slope, intercept = np.polyfit(water, base, 1)
    a = max(float(slope) * (1.0 - gamma), 1e-6)
    b = max(float(intercept), 1e-6 * float(base.max() or 1.0))
    return a, b


def fit_hara_yield(
    data: Sequence[YieldDatum],
    *,
    grid: int = 3,
    gamma_bounds: tuple[float, float] = GAMMA_BOUNDS,
) -> CalibrationFit:
    """Least-squares fit of (a, b, γ) from a grid of starts seeded by a linearised guess."""
    if len(data) < MIN_POINTS:
        raise FitError(f"yield fit needs at least {MIN_POINTS} points, got {len(data)}")
    water = np.array([d.water for d in data], dtype=float)
    crop = np.array([d.crop_yield for d in data], dtype=float)
    if np.ptp(water) == 0:
        raise FitError("yield fit needs at least two distinct water values")
    mean_yield = float(crop.mean())
    if not mean_yield > 0:
        raise FitError("yield fit needs a positive mean yield")

    def residuals(theta: np.ndarray) -> np.ndarray:
        return (hara_yield(water, *theta) - crop) / mean_yield

    lower = np.array([1e-12, 0.0, gamma_bounds[0]])
    upper = np.array([np.inf, np.inf, gamma_bounds[1]])
    gammas = axis(gamma_bounds[0] + 0.1, gamma_bounds[1] - 0.1, grid)
    multipliers = np.geomspace(0.5, 2.0, grid) if grid > 1 else np.array([1.0])

    starts = []
    for gamma in gammas:
        a0, b0 = _linearised_start(water, crop, float(gamma))
        for ma, mb in itertools.product(multipliers, multipliers):
            starts.append(np.array([a0 * ma, b0 * mb, gamma]))

    best, tried, converged = best_least_squares(residuals, starts, lower, upper, label="HARA yield")
    a, b, gamma = (float(x) for x in best.x)
    fitted = hara_yield(water, a, b, gamma)
    relative = np.where(crop > 0, (fitted - crop) / np.where(crop > 0, crop, 1.0), (fitted - crop) / mean_yield)
    return CalibrationFit(
        kind="yield",
        params={"a": a, "b": b, "gamma": gamma},
        residuals=[float(r) for r in relative],
        rms=float(np.sqrt(np.mean(relative**2))),
        cost=float(best.cost),
        starts=tried,
        converged=converged,
        metadata={"points": len(data)},
    )
