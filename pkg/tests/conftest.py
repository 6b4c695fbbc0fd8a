"""Pytest configuration and fixtures."""
import os
from decimal import Decimal
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np
import pytest

from src.models.journey import ChannelCatalog, Journey, JourneyStore
from src.services.revenue import CoalitionRevenue

FIXTURES = Path(__file__).parent / "fixtures"


def pytest_collection_modifyitems(config, items):
    """Skip ``slow`` tests unless RUN_SLOW_TESTS is set."""
    if os.getenv("RUN_SLOW_TESTS", "").lower() in ("1", "true", "yes"):
        return
    skip_slow = pytest.mark.skip(reason="set RUN_SLOW_TESTS=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def make_store(journeys: Sequence[tuple], labels: Sequence[str]) -> JourneyStore:
    """Store from (channel labels, revenue) pairs."""
    catalog = ChannelCatalog(tuple(labels))
    built = [
        Journey.from_channels(f"u{k + 1}", [catalog.index[c] for c in channels], Decimal(str(revenue)))
        for k, (channels, revenue) in enumerate(journeys)
    ]
    return JourneyStore(catalog, tuple(built))


def random_revenue(rng: np.random.Generator, p: int, max_coalitions: int = 200) -> CoalitionRevenue:
    """Sparse R(S) with 1..max_coalitions distinct non-empty keys."""
    count = int(rng.integers(1, min(max_coalitions, (1 << p) - 1) + 1))
    keys = rng.choice(np.arange(1, 1 << p), size=count, replace=False)
    values = rng.uniform(0.0, 100.0, size=count)
    return CoalitionRevenue({int(k): float(v) for k, v in zip(keys, values)}, p)


def random_store(rng: np.random.Generator, p: int, journeys: int, max_length: int = 6) -> JourneyStore:
    """Journeys with repeated channels and two-decimal revenue."""
    catalog = ChannelCatalog(tuple(f"C{j + 1}" for j in range(p)))
    built: List[Journey] = []
    for k in range(journeys):
        length = int(rng.integers(1, max_length + 1))
        channels = rng.integers(0, p, size=length).tolist()
        cents = int(rng.integers(0, 100_000))
        built.append(Journey.from_channels(f"u{k + 1}", channels, Decimal(cents).scaleb(-2)))
    return JourneyStore(catalog, tuple(built))


@pytest.fixture
def fixtures_dir() -> Path:
    """Directory of checked-in fixtures and goldens."""
    return FIXTURES


@pytest.fixture
def three_journeys() -> JourneyStore:
    """([A], 10), ([B], 20), ([A, B], 30)."""
    return make_store([(["A"], 10), (["B"], 20), (["A", "B"], 30)], ["A", "B"])


@pytest.fixture
def repeat_store() -> JourneyStore:
    """Journeys with repeated channel visits."""
    return make_store(
        [(["A", "B", "A"], 30), (["B"], 10), (["C", "A"], 20), (["B", "B", "C"], 9)],
        ["A", "B", "C"],
    )


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for property tests."""
    return np.random.default_rng(20240917)


@pytest.fixture
def campaign_dict() -> Dict:
    """Small synthetic campaign spec as JSON-ready data."""
    return {
        "p": 4,
        "journeys": 50,
        "length_weights": [0.4, 0.3, 0.2, 0.1],
        "channel_names": ["Search", "Display", "Video", "Social"],
        "loyal_share": 0.2,
        "loyal_channels": [0],
        "mean_gap_ms": 3_600_000,
        "seed": 7,
    }
