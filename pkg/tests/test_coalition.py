"""Test coalition keys and the journey domain types."""
from decimal import Decimal

import pytest

from src.core.coalition import (
    EMPTY,
    CoalitionKey,
    encode_coalition,
    full_coalition,
    iter_members,
    iter_subsets,
)
from src.models.journey import (
    ChannelCatalog,
    GroupMap,
    Journey,
    JourneyStore,
    Touchpoint,
    distinct_channels,
    is_finite_revenue,
    positions_of,
)
from src.services.error_handling import (
    CapacityError,
    ConfigurationError,
    InvalidChannelError,
    JourneyValidationError,
)


def test_encode_empty():
    """Test the empty coalition."""
    key = encode_coalition([])
    assert key == EMPTY
    assert key.cardinality() == 0


def test_encode_members():
    """Test keys hold exactly the given ordinals."""
    assert encode_coalition([0, 2]).members() == [0, 2]
    assert encode_coalition([0, 2]).cardinality() == 2


def test_encode_collapses_duplicates():
    """Test set semantics for repeated ordinals."""
    key = encode_coalition([1, 1, 3])
    assert key.members() == [1, 3]
    assert key.cardinality() == 2


def test_encode_rejects_out_of_catalog():
    """Test ordinals at or above p are invalid channels."""
    with pytest.raises(InvalidChannelError):
        encode_coalition([0, 3], p=3)
    with pytest.raises(InvalidChannelError):
        encode_coalition([-1])


def test_encode_rejects_beyond_key_width():
    """Test ordinals at or above 64 are a capacity error."""
    with pytest.raises(CapacityError):
        encode_coalition([64])


def test_encode_idempotent():
    """Test re-encoding a decoded key returns the same key."""
    key = encode_coalition([5, 0, 9, 9])
    assert encode_coalition(key.members()) == key


def test_subset_and_union():
    """Test containment is consistent with union."""
    small = encode_coalition([1])
    big = encode_coalition([1, 4])
    assert small.is_subset(big)
    assert not big.is_subset(small)
    assert small.union(big) == big
    assert small.with_channel(4) == big
    assert big.contains(4) and not big.contains(2)


def test_full_coalition_and_subsets():
    """Test the grand coalition and subset enumeration."""
    full = full_coalition(3)
    assert full.members() == [0, 1, 2]
    subsets = list(iter_subsets(0b101))
    assert sorted(subsets) == [0b000, 0b001, 0b100, 0b101]
    assert list(iter_members(0)) == []


def test_full_coalition_capacity():
    """Test more than 64 channels cannot be keyed."""
    assert full_coalition(64).cardinality() == 64
    with pytest.raises(CapacityError):
        full_coalition(65)


def test_key_labels_and_repr():
    """Test key rendering with catalog labels."""
    key = CoalitionKey(0b110)
    assert key.labels(["A", "B", "C"]) == ["B", "C"]
    assert repr(key) == "CoalitionKey([1, 2])"


def test_catalog_validation():
    """Test catalog labels must be unique and non-empty."""
    catalog = ChannelCatalog(("A", "B"))
    assert catalog.p == 2
    assert catalog.ordinal("B") == 1
    assert catalog.label(0) == "A"
    with pytest.raises(JourneyValidationError):
        ChannelCatalog(("A", "A"))
    with pytest.raises(JourneyValidationError):
        ChannelCatalog(("A", ""))
    with pytest.raises(InvalidChannelError):
        catalog.ordinal("Z")
    with pytest.raises(CapacityError):
        ChannelCatalog(tuple(f"c{j}" for j in range(65)))


def test_distinct_channels():
    """Test coalition buckets ignore order and repetition."""
    assert distinct_channels(Journey.from_channels("u", [0], 1)).members() == [0]
    assert distinct_channels(Journey.from_channels("u", [0, 1, 0], 1)).members() == [0, 1]
    assert distinct_channels(Journey.from_channels("u", [2, 1, 0], 1)).members() == [0, 1, 2]


def test_distinct_count_not_above_length():
    """Test cardinality never exceeds the touchpoint count."""
    journey = Journey.from_channels("u", [3, 3, 1, 3], 5)
    assert distinct_channels(journey).cardinality() <= len(journey)


def test_positions_of():
    """Test 1-based positions of a channel in a journey."""
    assert positions_of(Journey.from_channels("u", [0, 1], 1), 0) == [1]
    assert positions_of(Journey.from_channels("u", [0, 0, 1], 1), 0) == [1, 2]
    assert positions_of(Journey.from_channels("u", [0, 1], 1), 2) == []


def test_journey_validation():
    """Test journey invariants."""
    with pytest.raises(JourneyValidationError):
        Journey("u", (), Decimal(1))
    with pytest.raises(JourneyValidationError):
        Journey.from_channels("u", [0], Decimal("-0.01"))
    with pytest.raises(JourneyValidationError):
        Journey("u", (Touchpoint(0, 2),), Decimal(1))
    with pytest.raises(JourneyValidationError):
        Journey.from_channels("u", [0, 1], 1, timestamps=[2000, 1000])


def test_journey_rejects_non_finite_revenue():
    """Test revenue must be finite, including after conversion to float."""
    for bad in ("NaN", "Infinity", "-Infinity", "1e400"):
        with pytest.raises(JourneyValidationError, match="non-finite"):
            Journey.from_channels("u", [0], Decimal(bad))
    assert is_finite_revenue(Decimal("1e300"))


def test_journey_allows_equal_timestamps():
    """Test ties in time are allowed."""
    journey = Journey.from_channels("u", [0, 1], 1, timestamps=[1000, 1000])
    assert [tp.timestamp for tp in journey.touchpoints] == [1000, 1000]


def test_store_rejects_foreign_ordinals():
    """Test a journey must stay inside its store's catalog."""
    with pytest.raises(InvalidChannelError):
        JourneyStore(ChannelCatalog(("A",)), (Journey.from_channels("u", [0, 1], 1),))


def test_store_totals(three_journeys):
    """Test store revenue and length helpers."""
    assert three_journeys.total_revenue() == Decimal(60)
    assert three_journeys.max_length() == 2
    assert len(three_journeys) == 3


def test_group_map_for_catalog():
    """Test the group catalog follows catalog order and unmapped channels fail."""
    group_map = GroupMap({"S1": "Search", "P1": "Pub"})
    ordered = group_map.for_catalog(ChannelCatalog(("P1", "S1")))
    assert ordered.groups.names == ("Pub", "Search")
    with pytest.raises(ConfigurationError):
        group_map.for_catalog(ChannelCatalog(("P1", "X")))
