"""Seeded random populations."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from watermarket.models.market import Participant

if TYPE_CHECKING:
    from watermarket.models.scenario import GeneratorSpec


def participant_ids(count: int) -> list[str]:
    """Zero-padded ids ``p00``, ``p01``, ... that sort in creation order."""
    width = max(2, len(str(count - 1)))
    return [f"p{k:0{width}d}" for k in range(count)]


def generate_population(generator: GeneratorSpec, seed: int) -> list[Participant]:
    """Draw a, b and w uniformly from the generator ranges from one seeded random stream."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(*generator.a_range, size=generator.count)
    b = rng.uniform(*generator.b_range, size=generator.count)
    w = rng.uniform(*generator.w_range, size=generator.count)
    population = [
        Participant(id=pid, a=float(a[k]), b=float(b[k]), w=float(w[k]))
        for k, pid in enumerate(participant_ids(generator.count))
    ]
    logger.debug("Generated {} participants from seed {}", generator.count, seed)
    return population
