"""Shared multi-start driver around scipy's bounded least squares."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from loguru import logger
from scipy import optimize

from watermarket.errors import FitError

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable


def axis(lo: float, hi: float, points: int) -> np.ndarray:
    """Evenly spaced start coordinates; a single point sits mid-range."""
    if points == 1:
        return np.array([(lo + hi) / 2.0])
    return np.linspace(lo, hi, points)


def best_least_squares(
    residuals: Callable[[np.ndarray], np.ndarray],
    starts: Iterable[np.ndarray],
    lower: np.ndarray,
    upper: np.ndarray,
    *,
    label: str,
) -> tuple[optimize.OptimizeResult, int, int]:
    """Run bounded trust-region least squares from every start and keep the lowest cost."""
    best: optimize.OptimizeResult | None = None
    tried = 0
    converged = 0
    for x0 in starts:
        tried += 1
        start = np.clip(x0, lower, upper)
        try:
            result = optimize.least_squares(
                residuals,
                start,
                bounds=(lower, upper),
                method="trf",
                x_scale="jac",
                ftol=1e-14,
                xtol=1e-14,
                gtol=1e-14,
                max_nfev=5000,
            )
        except (ValueError, FloatingPointError) as exc:
            logger.debug("{} start {} failed: {}", label, start, exc)
            continue
        if not result.success or not np.all(np.isfinite(result.fun)):
            logger.debug("{} start {} did not converge: {}", label, start, result.message)
            continue
        converged += 1
        if best is None or result.cost < best.cost:
            best = result

    if best is None:
        raise FitError(f"{label} fit: none of {tried} starts converged")
    if converged < tried:
        logger.warning("{} fit: {} of {} starts converged", label, converged, tried)
    logger.info("{} fit: best cost {:.3g} from {} starts", label, best.cost, tried)
    return best, tried, converged
