"""Coalition keys: fixed-width bitsets over channel ordinals."""
from __future__ import annotations

from typing import Iterable, Iterator, List, Optional

from src.core.config import settings
from src.services.error_handling import CapacityError, InvalidChannelError

KEY_WIDTH = 64


class CoalitionKey(int):
    """A set of channel ordinals packed into a 64-bit integer.

    Bitwise operators on two keys return plain ints; wrap results with
    ``CoalitionKey(...)`` when the key type matters.
    """

    __slots__ = ()

    def __new__(cls, bits: int = 0) -> "CoalitionKey":
        if bits < 0 or bits >> KEY_WIDTH:
            raise CapacityError(f"coalition bits {bits:#x} do not fit in {KEY_WIDTH} bits")
        return super().__new__(cls, bits)

    def cardinality(self) -> int:
        return self.bit_count()

    def members(self) -> List[int]:
        """Channel ordinals in ascending order."""
        return list(iter_members(self))

    def contains(self, channel: int) -> bool:
        return bool((self >> channel) & 1)

    def is_subset(self, other: int) -> bool:
        return (self & ~other) == 0

    def union(self, other: int) -> "CoalitionKey":
        return CoalitionKey(self | other)

    def with_channel(self, channel: int) -> "CoalitionKey":
        return CoalitionKey(self | (1 << channel))

    def labels(self, names: List[str]) -> List[str]:
        return [names[j] for j in iter_members(self)]

    def __repr__(self) -> str:
        return f"CoalitionKey({self.members()})"


EMPTY = CoalitionKey(0)


def iter_members(bits: int) -> Iterator[int]:
    """Yield set bit positions, lowest first."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


def check_capacity(p: int) -> None:
    if p > settings.MAX_CHANNELS or p > KEY_WIDTH:
        raise CapacityError(
            f"{p} channels exceed coalition key capacity of {min(settings.MAX_CHANNELS, KEY_WIDTH)}; "
            "group channels before attribution"
        )


def encode_coalition(channels: Iterable[int], p: Optional[int] = None) -> CoalitionKey:
    """Build the key holding exactly ``channels``; duplicates collapse.

    ``p`` is the catalog size; when given, ordinals at or above it are rejected.
    """
    bits = 0
    for channel in channels:
        if channel < 0:
            raise InvalidChannelError(f"channel ordinal {channel} is negative")
        if channel >= KEY_WIDTH:
            raise CapacityError(f"channel ordinal {channel} exceeds key width {KEY_WIDTH}")
        if p is not None and channel >= p:
            raise InvalidChannelError(f"channel ordinal {channel} not in catalog of {p} channels")
        bits |= 1 << channel
    return CoalitionKey(bits)


def full_coalition(p: int) -> CoalitionKey:
    check_capacity(p)
    return CoalitionKey((1 << p) - 1)


def iter_subsets(bits: int) -> Iterator[int]:
    """Every subset of ``bits`` including the empty set, in descending order."""
    sub = bits
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & bits
