"""In-memory domain types."""
from .journey import (
    ChannelCatalog,
    GroupMap,
    Journey,
    JourneyStore,
    Touchpoint,
    distinct_channels,
    positions_of,
)

__all__ = [
    "ChannelCatalog",
    "GroupMap",
    "Journey",
    "JourneyStore",
    "Touchpoint",
    "distinct_channels",
    "positions_of",
]
