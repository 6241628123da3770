"""Two-party perturbation scan around an allocation.

Moving ``d`` megalitres of irrigation water from participant ``j`` to
participant ``i`` at the pool price changes joint utility by
f(d) = ΔU_i + ΔU_j. At an equilibrium f(0) = 0, f'(0) = 0 and f is concave,
so no d > 0 is profitable.
"""

from __future__ import annotations

import math
from itertools import permutations
from typing import TYPE_CHECKING

import numpy as np

from watermarket.analysis.aggregate import total_welfare
from watermarket.analysis.welfare import welfare_scale
from watermarket.errors import DomainError
from watermarket.market.common_pool import individual_optimum
from watermarket.market.utility import agricultural_utility, marginal_agricultural_utility, trading_utility
from watermarket.models.market import DerivativeEstimate, ParetoSample, ParetoScan

if TYPE_CHECKING:
    from collections.abc import Sequence

    from watermarket.models.market import ClearingResult, MarketConfig, Participant

F_TOL = 1e-9
FPRIME_TOL = 1e-6
CONCAVITY_TOL = 1e-12
STEP = 1e-7
GRID = 20
EXHAUSTIVE_PAIRS = 30
DERIVATIVE_MARGIN = 1e3


def pareto_f(
    res: ClearingResult, i: str, j: str, d: float, ps: Sequence[Participant], cfg: MarketConfig
) -> float:
    """Joint utility change when i buys d more irrigation water from j at the pool price."""
    if d < 0:
        raise DomainError(f"transfer must be nonnegative, got {d}")
    by_id = {p.id: p for p in ps}
    pi, pj = by_id[i], by_id[j]
    wi, wj = res.allocations[i].w_ag, res.allocations[j].w_ag
    if wj - d < 0:
        raise DomainError(f"participant {j} cannot give {d:.6g} from w_ag={wj:.6g}")
    du_i = agricultural_utility(wi + d, pi, cfg) - agricultural_utility(wi, pi, cfg) + trading_utility(-d, res.q, cfg)
    du_j = agricultural_utility(wj - d, pj, cfg) - agricultural_utility(wj, pj, cfg) + trading_utility(d, res.q, cfg)
    return du_i + du_j


def fprime_at_zero(
    res: ClearingResult,
    i: str,
    j: str,
    ps: Sequence[Participant],
    cfg: MarketConfig,
    *,
    step: float = STEP,
) -> float:
    """Central difference of f at zero; a negative d is the reverse transfer."""
    return (pareto_f(res, i, j, step, ps, cfg) - pareto_f(res, j, i, step, ps, cfg)) / (2.0 * step)


def mispriced_result(
    res: ClearingResult,
    ps: Sequence[Participant],
    cfg: MarketConfig,
    *,
    factor: float = 1.1,
    ids: Sequence[str] | None = None,
) -> ClearingResult:
    """Negative control: the named participants best-respond to factor·q and nobody re-clears."""
    targets = set(ids) if ids is not None else {ps[0].id}
    allocations = dict(res.allocations)
    for p in ps:
        if p.id in targets:
            allocations[p.id] = individual_optimum(factor * res.q, p, cfg)
    return res.model_copy(update={"allocations": allocations})


def _marginal(w_ag: float, p: Participant, cfg: MarketConfig) -> float:
    try:
        return marginal_agricultural_utility(w_ag, p, cfg)
    except DomainError:
        return math.inf


def _scan_pairs(ps: Sequence[Participant], w_ag: dict[str, float], cfg: MarketConfig) -> list[tuple[str, str]]:
    """Ordered (receiver, giver) pairs whose giver irrigates.

    Up to EXHAUSTIVE_PAIRS participants every such pair is scanned. Larger
    markets pair each receiver with the lowest-marginal giver and each giver
    with the highest-marginal receiver, so every participant's steepest
    first-order move is covered.
    """
    ids = [p.id for p in ps]
    givers = [pid for pid in ids if w_ag[pid] > 0]
    if len(ids) <= EXHAUSTIVE_PAIRS:
        return [(i, j) for i, j in permutations(ids, 2) if w_ag[j] > 0]
    marginal = {p.id: _marginal(w_ag[p.id], p, cfg) for p in ps}
    pairs: set[tuple[str, str]] = set()
    for i in ids:
        options = [j for j in givers if j != i]
        if options:
            pairs.add((i, min(options, key=lambda j: (marginal[j], j))))
    for j in givers:
        receiver = max((i for i in ids if i != j), key=lambda i: (marginal[i], i))
        pairs.add((receiver, j))
    return sorted(pairs)


def pareto_scan(
    res: ClearingResult,
    ps: Sequence[Participant],
    cfg: MarketConfig,
    n_samples: int = 100,
    seed: int | None = None,
    *,
    grid: int = GRID,
    step: float = STEP,
    tol: float = F_TOL,
    fprime_tol: float = FPRIME_TOL,
) -> ParetoScan:
    """Scan f(d) on deterministic grids and random triples.

    Each ordered pair gets a log-spaced grid of d up to the giver's irrigation
    (for the sign of f) and a uniform grid (for second differences); pairs
    where both sides irrigate at least DERIVATIVE_MARGIN·``step`` also get an
    f'(0) estimate.
    """
    scale = welfare_scale(total_welfare(res.allocations, res.q, ps, cfg))
    ids = [p.id for p in ps]
    positive = [p.w for p in ps if p.w > 0]
    w_min = min(positive) if positive else 1.0
    w_ag = {pid: res.allocations[pid].w_ag for pid in ids}

    samples: list[ParetoSample] = []
    derivatives: list[DerivativeEstimate] = []
    max_second = float("-inf")

    for i, j in _scan_pairs(ps, w_ag, cfg):
        d_max = w_ag[j]
        for d in np.geomspace(1e-6 * min(w_min, d_max), d_max, grid):
            samples.append(ParetoSample(i=i, j=j, d=float(d), f=pareto_f(res, i, j, float(d), ps, cfg)))
        uniform = [pareto_f(res, i, j, float(d), ps, cfg) for d in np.linspace(0.0, d_max, grid + 1)]
        second = np.diff(np.asarray(uniform), n=2)
        max_second = max(max_second, float(second.max()))
        if i < j and min(w_ag[i], w_ag[j]) >= DERIVATIVE_MARGIN * step:
            derivatives.append(
                DerivativeEstimate(i=i, j=j, value=fprime_at_zero(res, i, j, ps, cfg, step=step))
            )

    rng = np.random.default_rng(seed)
    givers = [pid for pid in ids if w_ag[pid] > 0]
    if len(ids) >= 2 and givers:
        for _ in range(n_samples):
            j = givers[int(rng.integers(len(givers)))]
            others = [pid for pid in ids if pid != j]
            i = others[int(rng.integers(len(others)))]
            d = float(rng.uniform(0.0, w_ag[j]))
            samples.append(ParetoSample(i=i, j=j, d=d, f=pareto_f(res, i, j, d, ps, cfg)))

    max_f = max((s.f for s in samples), default=0.0)
    if max_second == float("-inf"):
        max_second = 0.0
    passed = (
        max_f <= tol * scale
        and all(abs(est.value) <= fprime_tol * scale for est in derivatives)
        and max_second <= CONCAVITY_TOL * scale
    )
    return ParetoScan(
        samples=samples,
        max_f=max_f,
        fprime_at_zero=derivatives,
        max_second_difference=max_second,
        scale=scale,
        passed=passed,
    )
