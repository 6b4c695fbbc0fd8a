"""Coalition revenue aggregation R(S), the ordered tensor R^i(S, j) and the utility v(S)."""
import csv
import io
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, DefaultDict, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.core.coalition import CoalitionKey, full_coalition
from src.core.config import settings
from src.models.journey import ChannelCatalog, Journey, JourneyStore
from src.schemas.run_config import Kpi
from src.services.error_handling import (
    CapacityError,
    DataError,
    PreconditionError,
    StructuredLogger,
)

logger = StructuredLogger(__name__)

OrderedKey = Tuple[int, int, int]  # (coalition bits, channel ordinal, slot)


@dataclass(frozen=True)
class CoalitionRevenue:
    """Sparse map from observed coalitions to their individual contribution R(S)."""

    entries: Mapping[int, float]
    p: int
    total: float = field(init=False)

    def __post_init__(self) -> None:
        for key, value in self.entries.items():
            if value < 0:
                raise DataError(f"coalition {CoalitionKey(key)!r} has negative revenue {value}")
            if key == 0:
                raise DataError("the empty coalition cannot carry revenue")
            if key >> self.p:
                raise DataError(f"coalition {CoalitionKey(key)!r} uses channels outside p={self.p}")
        object.__setattr__(self, "entries", dict(sorted(self.entries.items())))
        object.__setattr__(self, "total", math.fsum(self.entries.values()))

    def __getitem__(self, key: int) -> float:
        return self.entries.get(key, 0.0)

    def __len__(self) -> int:
        return len(self.entries)

    def keys(self) -> List[CoalitionKey]:
        return [CoalitionKey(k) for k in self.entries]

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Keys as uint64 and values as float64, sorted by key."""
        keys = np.fromiter(self.entries.keys(), dtype=np.uint64, count=len(self.entries))
        values = np.fromiter(self.entries.values(), dtype=np.float64, count=len(self.entries))
        return keys, values


@dataclass(frozen=True)
class OrderedRevenue:
    """Sparse map (S, j, i) -> R^i(S): revenue of coalition S split by the slot channel j held."""

    entries: Mapping[OrderedKey, float]
    p: int
    max_position: int = field(init=False)

    def __post_init__(self) -> None:
        for (bits, channel, slot), value in self.entries.items():
            if not (bits >> channel) & 1:
                raise DataError(f"ordered entry channel {channel} not in coalition {CoalitionKey(bits)!r}")
            if slot < 1:
                raise DataError(f"ordered entry slot {slot} must be >= 1")
            if value < 0:
                raise DataError(f"ordered entry {(bits, channel, slot)} has negative revenue {value}")
        object.__setattr__(self, "entries", dict(sorted(self.entries.items())))
        object.__setattr__(
            self, "max_position", max((slot for _, _, slot in self.entries), default=0)
        )

    def __len__(self) -> int:
        return len(self.entries)

    def collapse(self) -> Dict[Tuple[int, int], float]:
        """Sum over slots: (S, j) -> sum_i R^i(S, j)."""
        parts: DefaultDict[Tuple[int, int], List[float]] = defaultdict(list)
        for (bits, channel, _), value in self.entries.items():
            parts[(bits, channel)].append(value)
        return {key: math.fsum(values) for key, values in sorted(parts.items())}


@dataclass(frozen=True)
class UtilityTable:
    """Dense v(S) for every coalition of p channels, indexed by coalition bits."""

    values: np.ndarray
    p: int

    def __getitem__(self, key: int) -> float:
        return float(self.values[key])

    def __len__(self) -> int:
        return len(self.values)


# ============ Aggregation ============
def journey_value(journey: Journey, kpi: Kpi = Kpi.REVENUE) -> float:
    """Conversion value under the chosen KPI."""
    return 1.0 if kpi is Kpi.CONVERSIONS else float(journey.revenue)


def _partition(journeys: Sequence[Journey], threads: int) -> List[Sequence[Journey]]:
    if threads <= 1 or len(journeys) < 2:
        return [journeys]
    size = math.ceil(len(journeys) / threads)
    return [journeys[i : i + size] for i in range(0, len(journeys), size)]


def _fold(
    store: JourneyStore,
    emit: Callable[[Journey, float, DefaultDict], None],
    kpi: Kpi,
    keep_zero: bool,
    threads: int,
) -> Dict:
    """Commutative fold over journeys.

    Workers collect every contribution per key; the merge concatenates the lists
    and each key is summed once with ``math.fsum``, which is correctly rounded,
    so the result is bit-identical for any journey order or partitioning.
    """

    def work(chunk: Sequence[Journey]) -> DefaultDict:
        parts: DefaultDict = defaultdict(list)
        for journey in chunk:
            value = journey_value(journey, kpi)
            if value == 0 and not keep_zero:
                continue
            emit(journey, value, parts)
        return parts

    chunks = _partition(store.journeys, threads)
    if len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            partials = list(pool.map(work, chunks))
    else:
        partials = [work(chunks[0])]

    merged: DefaultDict = defaultdict(list)
    for partial in partials:
        for key, values in partial.items():
            merged[key].extend(values)
    return {key: math.fsum(merged[key]) for key in sorted(merged)}


def aggregate(
    store: JourneyStore,
    kpi: Kpi = Kpi.REVENUE,
    keep_zero: Optional[bool] = None,
    threads: int = 1,
) -> CoalitionRevenue:
    """R(S): each journey's value accrues to exactly its distinct-channel coalition."""

    def emit(journey: Journey, value: float, parts: DefaultDict) -> None:
        parts[int(journey.coalition)].append(value)

    keep = settings.KEEP_ZERO_REVENUE if keep_zero is None else keep_zero
    entries = _fold(store, emit, kpi, keep, threads)
    rev = CoalitionRevenue(entries, store.p)
    logger.debug(
        "Aggregated coalition revenue",
        extra={"coalitions": len(rev), "total": rev.total, "journeys": len(store), "threads": threads},
    )
    return rev


def _emit_split(
    journey: Journey, value: float, parts: DefaultDict, slots: Sequence[int]
) -> None:
    """Each channel's value is split evenly across the slots of its visits."""
    bits = int(journey.coalition)
    by_channel: Dict[int, List[int]] = {}
    for tp, slot in zip(journey.touchpoints, slots):
        by_channel.setdefault(tp.channel, []).append(slot)
    for channel, channel_slots in by_channel.items():
        share = value / len(channel_slots)
        for slot in channel_slots:
            parts[(bits, channel, slot)].append(share)


def aggregate_ordered(
    store: JourneyStore,
    kpi: Kpi = Kpi.REVENUE,
    keep_zero: Optional[bool] = None,
    threads: int = 1,
) -> OrderedRevenue:
    """R^i(S, j) keyed by touchpoint position."""

    def emit(journey: Journey, value: float, parts: DefaultDict) -> None:
        _emit_split(journey, value, parts, [tp.position for tp in journey.touchpoints])

    keep = settings.KEEP_ZERO_REVENUE if keep_zero is None else keep_zero
    return OrderedRevenue(_fold(store, emit, kpi, keep, threads), store.p)


def aggregate_timed(
    store: JourneyStore,
    bucket_ms: int,
    kpi: Kpi = Kpi.REVENUE,
    keep_zero: Optional[bool] = None,
    threads: int = 1,
) -> OrderedRevenue:
    """Like ``aggregate_ordered`` but the slot is the touchpoint's time bucket.

    Slot 1 is the earliest bucket seen anywhere in the store.
    """
    if bucket_ms <= 0:
        raise PreconditionError(f"bucket_ms must be positive, got {bucket_ms}")
    first_bucket: Optional[int] = None
    for journey in store.journeys:
        for tp in journey.touchpoints:
            if tp.timestamp is None:
                raise DataError(
                    f"journey of user {journey.user_id!r} lacks timestamps; time-bucketed "
                    "attribution needs a timestamp on every touchpoint"
                )
            bucket = tp.timestamp // bucket_ms
            first_bucket = bucket if first_bucket is None else min(first_bucket, bucket)
    origin = first_bucket or 0

    def emit(journey: Journey, value: float, parts: DefaultDict) -> None:
        slots = [tp.timestamp // bucket_ms - origin + 1 for tp in journey.touchpoints]  # type: ignore[operator]
        _emit_split(journey, value, parts, slots)

    keep = settings.KEEP_ZERO_REVENUE if keep_zero is None else keep_zero
    return OrderedRevenue(_fold(store, emit, kpi, keep, threads), store.p)


# ============ Utility ============
def utility(rev: CoalitionRevenue, coalition: int) -> float:
    """v(S): sum of R(T) over stored coalitions T contained in S."""
    if coalition >> rev.p:
        raise PreconditionError(f"coalition {CoalitionKey(coalition)!r} not valid for p={rev.p}")
    return math.fsum(value for key, value in rev.entries.items() if CoalitionKey(key).is_subset(coalition))


def zeta_transform(rev: CoalitionRevenue) -> UtilityTable:
    """Dense subset-sum table: table[S] = v(S) for all 2^p coalitions, O(p * 2^p)."""
    if rev.p > settings.NAIVE_MAX_CHANNELS:
        logger.warning(
            "Refusing dense utility table", extra={"p": rev.p, "limit": settings.NAIVE_MAX_CHANNELS}
        )
        raise CapacityError(
            f"dense utility table needs 2^{rev.p} entries; p={rev.p} exceeds "
            f"{settings.NAIVE_MAX_CHANNELS}, use the simplified engine"
        )
    table = np.zeros(1 << rev.p, dtype=np.float64)
    if len(rev):
        keys, values = rev.arrays()
        np.add.at(table, keys.astype(np.int64), values)
    for bit in range(rev.p):
        # view as blocks of [without bit | with bit], each of width 2^bit
        blocks = table.reshape(-1, 2, 1 << bit)
        blocks[:, 1, :] += blocks[:, 0, :]
    return UtilityTable(table, rev.p)


def full_value(rev: CoalitionRevenue) -> float:
    """v(P), the total campaign value."""
    return utility(rev, full_coalition(rev.p)) if rev.p else 0.0


# ============ Debug dump ============
def dump_coalition_revenue(rev: CoalitionRevenue, catalog: ChannelCatalog) -> str:
    """``coalition_labels,revenue`` CSV with sorted labels joined by ``|``."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["coalition_labels", "revenue"])
    rows = sorted(
        ("|".join(sorted(CoalitionKey(key).labels(list(catalog.names)))), value)
        for key, value in rev.entries.items()
    )
    for labels, value in rows:
        writer.writerow([labels, repr(value)])
    return buffer.getvalue()
