"""In-memory domain types: channel catalogs, touchpoints, journeys and journey stores."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from src.core.coalition import CoalitionKey, check_capacity, encode_coalition
from src.services.error_handling import (
    ConfigurationError,
    InvalidChannelError,
    JourneyValidationError,
)


def is_finite_revenue(value: Decimal) -> bool:
    """True when the value is a number that also stays finite as a float."""
    value = Decimal(value)
    return value.is_finite() and math.isfinite(float(value))


@dataclass(frozen=True)
class ChannelCatalog:
    """Ordered, unique channel labels; a label's list position is its ordinal."""

    names: Tuple[str, ...]
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        for name in names:
            if not isinstance(name, str) or not name:
                raise JourneyValidationError(f"channel labels must be non-empty strings, got {name!r}")
        index = {name: ordinal for ordinal, name in enumerate(names)}
        if len(index) != len(names):
            duplicates = sorted({n for n in names if names.count(n) > 1})
            raise JourneyValidationError(f"duplicate channel labels: {duplicates}")
        check_capacity(len(names))
        object.__setattr__(self, "index", index)

    @property
    def p(self) -> int:
        return len(self.names)

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "ChannelCatalog":
        """Catalog of distinct labels in first-appearance order."""
        return cls(tuple(dict.fromkeys(labels)))

    def ordinal(self, label: str) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise InvalidChannelError(f"unknown channel label {label!r}") from None

    def label(self, ordinal: int) -> str:
        if not 0 <= ordinal < self.p:
            raise InvalidChannelError(f"channel ordinal {ordinal} not in catalog of {self.p}")
        return self.names[ordinal]


@dataclass(frozen=True, slots=True)
class Touchpoint:
    channel: int
    position: int
    timestamp: Optional[int] = None


@dataclass(frozen=True, slots=True)
class Journey:
    """One converted user's ordered touchpoints and the value of the conversion."""

    user_id: str
    touchpoints: Tuple[Touchpoint, ...]
    revenue: Decimal
    coalition: CoalitionKey = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.touchpoints:
            raise JourneyValidationError(f"journey of user {self.user_id!r} has no touchpoints")
        if not is_finite_revenue(self.revenue):
            raise JourneyValidationError(
                f"journey of user {self.user_id!r} has non-finite revenue {self.revenue}"
            )
        if self.revenue < 0:
            raise JourneyValidationError(
                f"journey of user {self.user_id!r} has negative revenue {self.revenue}"
            )
        previous: Optional[int] = None
        timed = all(tp.timestamp is not None for tp in self.touchpoints)
        for expected, tp in enumerate(self.touchpoints, start=1):
            if tp.position != expected:
                raise JourneyValidationError(
                    f"journey of user {self.user_id!r}: touchpoint at slot {expected} "
                    f"has position {tp.position}"
                )
            if timed:
                if previous is not None and tp.timestamp < previous:  # type: ignore[operator]
                    raise JourneyValidationError(
                        f"journey of user {self.user_id!r}: timestamps decrease at position {expected}"
                    )
                previous = tp.timestamp
        object.__setattr__(
            self, "coalition", encode_coalition(tp.channel for tp in self.touchpoints)
        )

    @classmethod
    def from_channels(
        cls,
        user_id: str,
        channels: Sequence[int],
        revenue: Decimal | int | str,
        timestamps: Optional[Sequence[int]] = None,
    ) -> "Journey":
        """Number touchpoints 1..n in the given order."""
        if timestamps is not None and len(timestamps) != len(channels):
            raise JourneyValidationError(
                f"journey of user {user_id!r}: {len(timestamps)} timestamps for "
                f"{len(channels)} touchpoints"
            )
        touchpoints = tuple(
            Touchpoint(channel, position, None if timestamps is None else timestamps[position - 1])
            for position, channel in enumerate(channels, start=1)
        )
        return cls(user_id, touchpoints, Decimal(revenue))

    @property
    def channels(self) -> List[int]:
        return [tp.channel for tp in self.touchpoints]

    def __len__(self) -> int:
        return len(self.touchpoints)


def distinct_channels(journey: Journey) -> CoalitionKey:
    """The journey's coalition bucket: every channel it touched, order and repeats dropped."""
    return journey.coalition


def positions_of(journey: Journey, channel: int) -> List[int]:
    """Sorted 1-based positions where ``channel`` appears; empty when absent."""
    return [tp.position for tp in journey.touchpoints if tp.channel == channel]


@dataclass(frozen=True)
class JourneyStore:
    """A catalog plus the converted journeys recorded against it."""

    catalog: ChannelCatalog
    journeys: Tuple[Journey, ...]
    provenance: str = "<memory>"
    issues: Mapping[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "journeys", tuple(self.journeys))
        limit = self.catalog.p
        for journey in self.journeys:
            if journey.coalition >> limit:
                bad = [c for c in journey.channels if c >= limit]
                raise InvalidChannelError(
                    f"journey of user {journey.user_id!r} uses channel ordinals {bad} "
                    f"outside catalog of {limit}"
                )

    @property
    def p(self) -> int:
        return self.catalog.p

    def total_revenue(self) -> Decimal:
        return sum((j.revenue for j in self.journeys), Decimal(0))

    def max_length(self) -> int:
        return max((len(j) for j in self.journeys), default=0)

    def replace(self, journeys: Iterable[Journey], provenance: Optional[str] = None) -> "JourneyStore":
        return JourneyStore(self.catalog, tuple(journeys), provenance or self.provenance, self.issues)

    def __len__(self) -> int:
        return len(self.journeys)


@dataclass(frozen=True)
class GroupMap:
    """Channel label to group label, with the group catalog in first-appearance order."""

    mapping: Mapping[str, str]
    groups: ChannelCatalog = field(init=False)

    def __post_init__(self) -> None:
        for channel, group in self.mapping.items():
            if not channel or not group:
                raise ConfigurationError(f"empty label in group mapping {channel!r} -> {group!r}")
        if not self.mapping:
            raise ConfigurationError("group map must define at least one group")
        object.__setattr__(self, "groups", ChannelCatalog.from_labels(self.mapping.values()))

    def for_catalog(self, catalog: ChannelCatalog) -> "GroupMap":
        """Reorder so groups appear in the order of the catalog's channels."""
        missing = [name for name in catalog.names if name not in self.mapping]
        if missing:
            raise ConfigurationError(f"channels missing from group map: {missing}")
        return GroupMap({name: self.mapping[name] for name in catalog.names})

    def group_of(self, label: str) -> str:
        try:
            return self.mapping[label]
        except KeyError:
            raise ConfigurationError(f"channel {label!r} is not mapped to a group") from None
