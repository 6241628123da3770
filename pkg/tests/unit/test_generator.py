"""Tests for seeded population generation."""

from __future__ import annotations

from watermarket.models.scenario import GeneratorSpec
from watermarket.pipeline.generator import generate_population, participant_ids


def test_participant_ids_sort_in_creation_order() -> None:
    assert participant_ids(3) == ["p00", "p01", "p02"]
    ids = participant_ids(150)
    assert ids[-1] == "p149"
    assert ids == sorted(ids)


def test_population_is_seeded() -> None:
    generator = GeneratorSpec(count=20)
    assert generate_population(generator, 42) == generate_population(generator, 42)
    assert generate_population(generator, 42) != generate_population(generator, 43)


def test_population_respects_ranges() -> None:
    generator = GeneratorSpec(count=200, a_range=(0.5, 1.0), b_range=(0.0, 0.1), w_range=(10.0, 20.0))
    for p in generate_population(generator, 1):
        assert 0.5 <= p.a <= 1.0
        assert 0.0 <= p.b <= 0.1
        assert 10.0 <= p.w <= 20.0
