"""Month-by-month reproduction of the price table from a market fit."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

from loguru import logger

from watermarket.calibration.market_fit import market_model_price
from watermarket.models.calibration import TableReport, TableRow

if TYPE_CHECKING:
    from collections.abc import Sequence

    from watermarket.models.calibration import CalibrationFit, MarketRow

FILLING_STAGE_MONTHS = frozenset({"DEC"})
FILLING_STAGE_NOTE = "filling stage of wheat: seasonal demand is not modelled"


def _pricing(actual: float, model: float) -> str:
    # Direction of the observed market price relative to the model.
    if actual > model:
        return "overestimated"
    if actual < model:
        return "underestimated"
    return "exact"


def reproduce_table(fit: CalibrationFit, rows: Sequence[MarketRow], threshold: float = 0.10) -> TableReport:
    """Model price and relative residual |model − actual|/actual for each month."""
    out: list[TableRow] = []
    vs_published: list[float] = []
    for row in rows:
        model = float(market_model_price(fit, row.water_gl, row.crop_price))
        residual = abs(model - row.actual_price) / row.actual_price
        within = residual < threshold
        note = ""
        if row.month.upper() in FILLING_STAGE_MONTHS and not within:
            note = FILLING_STAGE_NOTE
        if row.model_price is not None:
            vs_published.append((model - row.model_price) / row.model_price)
        out.append(
            TableRow(
                month=row.month,
                water_gl=row.water_gl,
                crop_price=row.crop_price,
                actual_price=row.actual_price,
                model_price=model,
                residual=residual,
                residual_pct=round(100 * residual),
                published_model_price=row.model_price,
                within_threshold=within,
                pricing=_pricing(row.actual_price, model),
                note=note,
            )
        )

    rms_actual = math.sqrt(sum(r.residual**2 for r in out) / len(out)) if out else 0.0
    rms_published = math.sqrt(sum(v * v for v in vs_published) / len(vs_published)) if vs_published else None
    months_within = sum(r.within_threshold for r in out)
    logger.info("Reproduced {} months, {} within {:.0%}", len(out), months_within, threshold)
    return TableReport(
        rows=out,
        months_within=months_within,
        threshold=threshold,
        rms_vs_actual=rms_actual,
        rms_vs_published_model=rms_published,
    )
