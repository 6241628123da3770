"""HARA utility algebra shared by both trading mechanisms.

Agricultural utility of a participant irrigating ``w_ag`` megalitres is

    U_ag = ((1 - γ) / γ) · (a · w_ag / (1 - γ) + b)^γ · p_cr

and water traded away earns ``w_tr · q · e^{λT}``. Every function here is a
pure function of its (immutable) inputs.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import TYPE_CHECKING

from watermarket.errors import DomainError
from watermarket.models.market import Allocation, ValidationReport

if TYPE_CHECKING:
    from collections.abc import Sequence

    from watermarket.models.market import MarketConfig, Participant, Role

OUTSIDER_TOL = 1e-12


def hara_argument(w_ag: float, p: Participant, cfg: MarketConfig) -> float:
    """Return the HARA base a·w_ag/(1−γ) + b."""
    return p.a * w_ag / (1.0 - cfg.gamma) + p.b


def crop_yield(w_ag: float, p: Participant, cfg: MarketConfig) -> float:
    """Crop yield Y_cr(w_ag) in yield units."""
    base = hara_argument(w_ag, p, cfg)
    if base < 0:
        raise DomainError(f"HARA argument {base:.6g} < 0 for participant {p.id} at w_ag={w_ag:.6g}")
    gamma = cfg.gamma
    return (1.0 - gamma) / gamma * base**gamma


def agricultural_utility(w_ag: float, p: Participant, cfg: MarketConfig) -> float:
    return crop_yield(w_ag, p, cfg) * cfg.p_cr


def trading_utility(w_tr: float, q: float, cfg: MarketConfig) -> float:
    """Value of water sold (w_tr > 0) or bought (w_tr < 0), compounded over the season."""
    return w_tr * q * cfg.growth


def total_utility(alloc: Allocation, q: float, p: Participant, cfg: MarketConfig) -> float:
    return agricultural_utility(alloc.w_ag, p, cfg) + trading_utility(alloc.w_tr, q, cfg)


def marginal_agricultural_utility(w_ag: float, p: Participant, cfg: MarketConfig) -> float:
    """Derivative a·(a·w_ag/(1−γ) + b)^{γ−1}·p_cr; singular at a zero argument."""
    base = hara_argument(w_ag, p, cfg)
    if base <= 0:
        raise DomainError(f"marginal utility undefined at HARA argument {base:.6g} for participant {p.id}")
    return p.a * base ** (cfg.gamma - 1.0) * cfg.p_cr


def autarky_price(p: Participant, cfg: MarketConfig) -> float:
    """Price at which the participant neither buys nor sells; +inf when the marginal is singular."""
    try:
        return marginal_agricultural_utility(p.w, p, cfg) / cfg.growth
    except DomainError:
        return math.inf


def utility_by_share(alpha: float, q: float, p: Participant, cfg: MarketConfig) -> float:
    """Total utility with a share α of the endowment irrigated and the rest traded."""
    if alpha < 0:
        raise DomainError(f"share α must be nonnegative, got {alpha:.6g}")
    return total_utility(Allocation(w_ag=alpha * p.w, w_tr=(1.0 - alpha) * p.w), q, p, cfg)


def classify_role(alpha: float) -> Role:
    """Buyer irrigates more than it owns (α > 1), seller less (α < 1)."""
    if alpha < 0:
        raise DomainError(f"share α must be nonnegative, got {alpha:.6g}")
    if abs(alpha - 1.0) <= OUTSIDER_TOL:
        return "outsider"
    return "buyer" if alpha > 1.0 else "seller"


def validate(p: Participant | None, cfg: MarketConfig | None) -> ValidationReport:
    """List every violated invariant of a participant and/or the market constants."""
    violations: list[str] = []
    if p is not None:
        if not p.a > 0:
            violations.append(f"{p.id}: a > 0 (got {p.a})")
        if not p.b >= 0:
            violations.append(f"{p.id}: b ≥ 0 (got {p.b})")
        if not p.w >= 0:
            violations.append(f"{p.id}: w ≥ 0 (got {p.w})")
    if cfg is not None:
        if not 0 < cfg.gamma < 1:
            violations.append(f"γ ∈ (0,1) (got {cfg.gamma})")
        if not cfg.lambda_ >= 0:
            violations.append(f"λ ≥ 0 (got {cfg.lambda_})")
        if not cfg.T > 0:
            violations.append(f"T > 0 (got {cfg.T})")
        if not cfg.p_cr > 0:
            violations.append(f"p_cr > 0 (got {cfg.p_cr})")
        if not cfg.n >= 1:
            violations.append(f"n ≥ 1 (got {cfg.n})")
    return ValidationReport(violations=violations)


def validate_population(ps: Sequence[Participant], cfg: MarketConfig) -> ValidationReport:
    """Validate constants, every participant, and population-level requirements for clearing."""
    violations = list(validate(None, cfg).violations)
    if not ps:
        violations.append("population must contain at least one participant")
    for p in ps:
        violations.extend(validate(p, None).violations)
    duplicates = sorted(pid for pid, count in Counter(p.id for p in ps).items() if count > 1)
    if duplicates:
        violations.append(f"participant ids must be unique (duplicated: {', '.join(duplicates)})")
    if ps and not sum(p.w for p in ps) > 0:
        violations.append("total endowment W must be positive")
    return ValidationReport(violations=violations)


def require_valid(ps: Sequence[Participant], cfg: MarketConfig) -> None:
    """Raise DomainError listing every violation of a population."""
    report = validate_population(ps, cfg)
    if not report.valid:
        raise DomainError("; ".join(report.violations))
