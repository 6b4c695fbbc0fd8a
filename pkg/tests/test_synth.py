"""Test the synthetic campaign generator."""
import json
import math
from decimal import Decimal

import numpy as np
import pytest
from pydantic import ValidationError

from src.schemas.campaign import CampaignSpec
from src.services.ingestion import parse_journeys, serialize_journeys
from src.services.synth import PRNG_ALGORITHM, generate, load_campaign_spec


def test_degenerate_spec():
    """Test a one-channel, length-one, constant-revenue campaign."""
    spec = CampaignSpec(
        p=1, journeys=3, length_weights=[1.0], revenue_mean_log=math.log(10), revenue_sigma_log=0.0, seed=11
    )
    store = generate(spec)
    assert len(store) == 3
    assert store.catalog.names == ("C1",)
    assert all(j.channels == [0] for j in store.journeys)
    assert all(j.revenue == Decimal(10) for j in store.journeys)


def test_same_seed_same_store(campaign_dict):
    """Test generation is deterministic for a fixed seed."""
    spec = CampaignSpec(**campaign_dict)
    first = serialize_journeys(generate(spec))
    second = serialize_journeys(generate(CampaignSpec(**campaign_dict)))
    assert first == second


def test_different_seed_different_store(campaign_dict):
    """Test the seed drives the streams."""
    other = CampaignSpec(**{**campaign_dict, "seed": 8})
    assert serialize_journeys(generate(CampaignSpec(**campaign_dict))) != serialize_journeys(generate(other))


def test_generated_store_shape(campaign_dict):
    """Test lengths, labels, revenue scale and timestamps."""
    spec = CampaignSpec(**campaign_dict)
    store = generate(spec)
    assert store.catalog.names == ("Search", "Display", "Video", "Social")
    assert store.max_length() <= 4
    assert store.provenance == f"synth:{PRNG_ALGORITHM}:7"
    for journey in store.journeys:
        assert journey.revenue >= 0
        assert journey.revenue == journey.revenue.quantize(Decimal("0.01"))
        times = [tp.timestamp for tp in journey.touchpoints]
        assert all(t is not None for t in times)
        assert times == sorted(times)


def test_no_timestamps_without_gap(campaign_dict):
    """Test timestamps are only drawn when a mean gap is given."""
    spec = CampaignSpec(**{**campaign_dict, "mean_gap_ms": None})
    assert all(tp.timestamp is None for j in generate(spec).journeys for tp in j.touchpoints)


def test_loyal_journeys_are_single_touch():
    """Test every loyal journey is one touch on a loyal channel."""
    spec = CampaignSpec(
        p=5, journeys=2000, length_weights=[0, 0, 1], loyal_share=0.4, loyal_channels=[2], seed=3
    )
    store = generate(spec)
    singles = [j for j in store.journeys if len(j) == 1]
    assert all(j.channels == [2] for j in singles)
    assert 0.35 < len(singles) / len(store) < 0.45


def test_large_campaign_shape():
    """Test an 18-channel campaign with journeys up to 11 touchpoints."""
    spec = CampaignSpec(p=18, journeys=153_814, length_weights=[1.0] * 11, seed=2024)
    store = generate(spec)
    assert store.p == 18
    assert len(store) == 153_814
    assert store.max_length() <= 11


def test_length_histogram():
    """Test the empirical length histogram stays within 3 sigma of the spec."""
    weights = [0.5, 0.3, 0.15, 0.05]
    n = 100_000
    store = generate(CampaignSpec(p=6, journeys=n, length_weights=weights, seed=99))
    counts = np.bincount([len(j) for j in store.journeys], minlength=5)[1:]
    for count, weight in zip(counts, weights):
        sigma = math.sqrt(n * weight * (1 - weight))
        assert abs(count - n * weight) <= 3 * sigma


def test_round_trip_through_jsonl(campaign_dict):
    """Test generated journeys survive serialization."""
    store = generate(CampaignSpec(**campaign_dict))
    parsed = parse_journeys(serialize_journeys(store), "journey-jsonl")
    assert [j.revenue for j in parsed.journeys] == [j.revenue for j in store.journeys]
    assert len(parsed) == len(store)


def test_spec_validation():
    """Test invalid specs are rejected."""
    with pytest.raises(ValidationError):
        CampaignSpec(p=0, journeys=1, length_weights=[1.0])
    with pytest.raises(ValidationError):
        CampaignSpec(p=65, journeys=1, length_weights=[1.0])
    with pytest.raises(ValidationError):
        CampaignSpec(p=2, journeys=1, length_weights=[0.0])
    with pytest.raises(ValidationError):
        CampaignSpec(p=2, journeys=1, length_weights=[1.0], channel_weights=[1.0])
    with pytest.raises(ValidationError):
        CampaignSpec(p=2, journeys=1, length_weights=[1.0], loyal_share=0.5)
    with pytest.raises(ValidationError):
        CampaignSpec(p=2, journeys=1, length_weights=[1.0], loyal_channels=[2], loyal_share=0.1)


def test_weights_normalised():
    """Test weights are normalised to probabilities."""
    spec = CampaignSpec(p=2, journeys=1, length_weights=[1, 3], channel_weights=[2, 2])
    assert spec.length_weights == [0.25, 0.75]
    assert spec.channel_weights == [0.5, 0.5]


def test_load_campaign_spec(tmp_path, campaign_dict):
    """Test spec files load into the schema."""
    path = tmp_path / "campaign.json"
    path.write_text(json.dumps(campaign_dict), encoding="utf-8")
    assert load_campaign_spec(path) == CampaignSpec(**campaign_dict)
