"""Journey log ingestion: journey-jsonl and event-csv parsing, grouping, filtering, merging."""
import io
import json
from concurrent.futures import ThreadPoolExecutor
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import BinaryIO, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
from pydantic import ValidationError

from src.core.coalition import check_capacity
from src.models.journey import (
    ChannelCatalog,
    GroupMap,
    Journey,
    JourneyStore,
    Touchpoint,
    is_finite_revenue,
)
from src.schemas.journey import JourneyRecord
from src.schemas.run_config import FilterMode, InputFormat
from src.services.error_handling import (
    CatalogMismatchError,
    ConfigurationError,
    ErrorTracker,
    JourneyValidationError,
    ParseError,
    PreconditionError,
    StructuredLogger,
)

logger = StructuredLogger(__name__)

Source = Union[bytes, str, BinaryIO]


# ============ Configuration ============
class Config:
    EVENT_CSV_COLUMNS = ["user_id", "timestamp", "channel", "event_type", "revenue"]
    GROUP_MAP_COLUMNS = ["channel", "group"]
    IMPRESSION = "impression"
    CONVERSION = "conversion"


def _decode(source: Source, provenance: str) -> str:
    if isinstance(source, str):
        return source
    raw = source if isinstance(source, bytes) else source.read()
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"input is not valid UTF-8: {e}", source=provenance) from None


def _decimal_or_none(text: str) -> Optional[Decimal]:
    try:
        value = Decimal(text)
    except InvalidOperation:
        return None
    return value if is_finite_revenue(value) else None


class _LabelRegistry:
    """Assigns ordinals to channel labels in first-appearance order."""

    def __init__(self) -> None:
        self.index: Dict[str, int] = {}

    def ordinal(self, label: str) -> int:
        ordinal = self.index.get(label)
        if ordinal is None:
            check_capacity(len(self.index) + 1)
            ordinal = self.index[label] = len(self.index)
        return ordinal

    def catalog(self) -> ChannelCatalog:
        return ChannelCatalog(tuple(self.index))


# ============ Parsers ============
class JsonlJourneyParser:
    """One JSON journey object per line; touchpoints are taken in listed order."""

    @staticmethod
    def parse(text: str, provenance: str, tracker: ErrorTracker) -> Tuple[ChannelCatalog, List[Journey]]:
        labels = _LabelRegistry()
        journeys: List[Journey] = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = JourneyRecord.model_validate(json.loads(line, parse_float=Decimal))
            except json.JSONDecodeError as e:
                raise ParseError(f"invalid JSON: {e.msg}", line=line_no, source=provenance) from None
            except ValidationError as e:
                raise ParseError(
                    f"invalid journey record: {e.errors()[0]['msg']}", line=line_no, source=provenance
                ) from None

            if not is_finite_revenue(record.revenue):
                raise ParseError(
                    f"revenue {record.revenue} is not a finite number", line=line_no, source=provenance
                )
            if record.revenue < 0:
                raise JourneyValidationError(
                    f"{provenance}:{line_no}: negative revenue {record.revenue}"
                )
            channels = [labels.ordinal(label) for label in record.touchpoints]
            try:
                journeys.append(
                    Journey.from_channels(record.user, channels, record.revenue, record.timestamps)
                )
            except JourneyValidationError as e:
                raise JourneyValidationError(f"{provenance}:{line_no}: {e}") from None
        return labels.catalog(), journeys


class EventCsvParser:
    """Impression/conversion event rows grouped into per-conversion journeys.

    Rows are grouped by user and ordered by timestamp, ties broken by row order.
    Each conversion closes a journey made of the impressions since the previous
    conversion; impressions after the last conversion are ignored.
    """

    @staticmethod
    def _read_frame(text: str, provenance: str) -> pd.DataFrame:
        try:
            frame = pd.read_csv(
                io.StringIO(text), dtype=str, keep_default_na=False, skip_blank_lines=False
            ).fillna("")
        except pd.errors.EmptyDataError:
            raise ParseError("empty event-csv input, header required", line=1, source=provenance) from None
        except pd.errors.ParserError as e:
            raise ParseError(f"malformed event-csv: {e}", source=provenance) from None
        if list(frame.columns) != Config.EVENT_CSV_COLUMNS:
            raise ParseError(
                f"expected header {','.join(Config.EVENT_CSV_COLUMNS)}, got {','.join(map(str, frame.columns))}",
                line=1,
                source=provenance,
            )
        return frame

    @staticmethod
    def parse(text: str, provenance: str, tracker: ErrorTracker) -> Tuple[ChannelCatalog, List[Journey]]:
        frame = EventCsvParser._read_frame(text, provenance)

        # user -> [(timestamp, row, event_type, channel, revenue)], users in first-appearance order
        events: Dict[str, List[Tuple[int, int, str, str, Optional[Decimal]]]] = {}
        for row, user_id, timestamp, channel, event_type, revenue in frame.itertuples(name=None):
            line_no = row + 2
            user_id, channel, event_type, revenue = (
                user_id.strip(), channel.strip(), event_type.strip(), revenue.strip()
            )
            if not (user_id or timestamp.strip() or channel or event_type or revenue):
                continue
            if not user_id:
                raise ParseError("empty user_id", line=line_no, source=provenance)
            try:
                ts = int(timestamp)
            except ValueError:
                raise ParseError(f"timestamp {timestamp!r} is not integer milliseconds", line=line_no, source=provenance) from None

            value: Optional[Decimal] = None
            if event_type == Config.IMPRESSION:
                if not channel:
                    raise ParseError("impression row without channel", line=line_no, source=provenance)
                if revenue and _decimal_or_none(revenue) != 0:
                    raise ParseError("revenue is only allowed on conversion rows", line=line_no, source=provenance)
            elif event_type == Config.CONVERSION:
                try:
                    value = Decimal(revenue)
                except InvalidOperation:
                    raise ParseError(f"revenue {revenue!r} is not a number", line=line_no, source=provenance) from None
                if not is_finite_revenue(value):
                    raise ParseError(f"revenue {revenue!r} is not a finite number", line=line_no, source=provenance)
                if value < 0:
                    raise JourneyValidationError(f"{provenance}:{line_no}: negative revenue {value}")
            else:
                raise ParseError(f"unknown event_type {event_type!r}", line=line_no, source=provenance)
            events.setdefault(user_id, []).append((ts, row, event_type, channel, value))

        # (first source row, journey) so the catalog follows file order
        built: List[Tuple[int, str, List[Tuple[str, int]], Decimal]] = []
        for user_id, rows in events.items():
            rows.sort(key=lambda r: (r[0], r[1]))
            pending: List[Tuple[str, int, int]] = []
            converted = False
            for ts, row, event_type, channel, value in rows:
                if event_type == Config.IMPRESSION:
                    pending.append((channel, ts, row))
                    continue
                converted = True
                if not pending:
                    tracker.record_issue("conversion_without_impressions", {"user_id": user_id, "row": row + 2})
                    continue
                first_row = min(r for _, _, r in pending)
                built.append((first_row, user_id, [(c, t) for c, t, _ in pending], value))  # type: ignore[arg-type]
                pending = []
            if pending:
                tracker.record_issue(
                    "trailing_impressions" if converted else "user_without_conversion",
                    {"user_id": user_id, "impressions": len(pending)},
                )

        labels = _LabelRegistry()
        for _, _, touches, _ in sorted(built, key=lambda b: b[0]):
            for channel, _ in touches:
                labels.ordinal(channel)
        journeys = [
            Journey.from_channels(
                user_id,
                [labels.index[c] for c, _ in touches],
                value,
                [t for _, t in touches],
            )
            for _, user_id, touches, value in built
        ]
        return labels.catalog(), journeys


PARSERS = {
    InputFormat.JOURNEY_JSONL: JsonlJourneyParser,
    InputFormat.EVENT_CSV: EventCsvParser,
}


# ============ Operations ============
def parse_journeys(
    source: Source, format: Union[InputFormat, str], provenance: str = "<stream>"
) -> JourneyStore:
    """Parse one UTF-8 source into a journey store."""
    try:
        parser = PARSERS[InputFormat(format)]
    except ValueError:
        raise PreconditionError(f"unknown input format {format!r}") from None
    text = _decode(source, provenance)
    tracker = ErrorTracker(provenance)
    catalog, journeys = parser.parse(text, provenance, tracker)
    tracker.report()
    store = JourneyStore(catalog, tuple(journeys), provenance, tracker.snapshot())
    logger.info(
        "Parsed journeys",
        extra={
            "source": provenance,
            "format": InputFormat(format).value,
            "journeys": len(store),
            "channels": catalog.p,
            "issues": tracker.snapshot(),
        },
    )
    return store


def parse_file(path: Union[str, Path], format: Union[InputFormat, str]) -> JourneyStore:
    path = Path(path)
    with path.open("rb") as fh:
        return parse_journeys(fh, format, provenance=str(path))


def parse_sources(
    paths: Sequence[Union[str, Path]], format: Union[InputFormat, str], threads: int = 1
) -> JourneyStore:
    """Parse several files, in parallel when ``threads > 1``, and merge them in input order."""
    if not paths:
        raise PreconditionError("at least one input path is required")
    if threads > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(paths))) as pool:
            stores = list(pool.map(lambda p: parse_file(p, format), paths))
    else:
        stores = [parse_file(p, format) for p in paths]
    return merge_stores(stores)


def merge_stores(stores: Sequence[JourneyStore]) -> JourneyStore:
    """Concatenate stores; each catalog must equal an earlier one or be disjoint from all earlier ones."""
    if not stores:
        raise PreconditionError("nothing to merge")
    if len(stores) == 1:
        return stores[0]

    labels: List[str] = []
    seen: List[frozenset] = []
    for store in stores:
        names = frozenset(store.catalog.names)
        shared = names.intersection(labels)
        if shared and names not in seen:
            raise CatalogMismatchError(
                f"{store.provenance} shares channels {sorted(shared)} with earlier inputs "
                "but its catalog is not identical"
            )
        labels.extend(n for n in store.catalog.names if n not in shared)
        seen.append(names)
    catalog = ChannelCatalog(tuple(labels))

    journeys: List[Journey] = []
    issues: Dict[str, int] = {}
    for store in stores:
        remap = [catalog.index[name] for name in store.catalog.names]
        journeys.extend(_remap_journey(j, remap) for j in store.journeys)
        for kind, count in store.issues.items():
            issues[kind] = issues.get(kind, 0) + count
    provenance = "+".join(s.provenance for s in stores)
    return JourneyStore(catalog, tuple(journeys), provenance, issues)


def _remap_journey(journey: Journey, remap: Sequence[int]) -> Journey:
    touchpoints = tuple(
        Touchpoint(remap[tp.channel], tp.position, tp.timestamp) for tp in journey.touchpoints
    )
    return Journey(journey.user_id, touchpoints, journey.revenue)


def serialize_journeys(store: JourneyStore) -> str:
    """Journey-jsonl text; revenue is written as the exact decimal."""
    names = store.catalog.names
    lines = []
    for journey in store.journeys:
        fields = [
            f'"user": {json.dumps(journey.user_id)}',
            f'"revenue": {journey.revenue}',
            f'"touchpoints": {json.dumps([names[c] for c in journey.channels])}',
        ]
        timestamps = [tp.timestamp for tp in journey.touchpoints]
        if all(ts is not None for ts in timestamps):
            fields.append(f'"timestamps": {json.dumps(timestamps)}')
        lines.append("{" + ", ".join(fields) + "}\n")
    return "".join(lines)


def load_group_map(source: Union[str, Path, bytes]) -> GroupMap:
    """Read a ``channel,group`` CSV."""
    if isinstance(source, bytes):
        text, provenance = _decode(source, "<group-map>"), "<group-map>"
    else:
        text, provenance = Path(source).read_text(encoding="utf-8"), str(source)
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise ConfigurationError(f"{provenance}: unreadable group map: {e}") from None
    if list(frame.columns) != Config.GROUP_MAP_COLUMNS:
        raise ConfigurationError(f"{provenance}: expected header channel,group")
    mapping: Dict[str, str] = {}
    for row, channel, group in frame.itertuples(name=None):
        channel, group = channel.strip(), group.strip()
        if channel in mapping:
            raise ConfigurationError(f"{provenance}:{row + 2}: channel {channel!r} mapped twice")
        mapping[channel] = group
    return GroupMap(mapping)


def apply_grouping(store: JourneyStore, group_map: GroupMap) -> JourneyStore:
    """Replace each touchpoint's channel by its group; positions and repeats are kept."""
    ordered = group_map.for_catalog(store.catalog)
    groups = ordered.groups
    remap = [groups.index[ordered.group_of(name)] for name in store.catalog.names]
    if groups == store.catalog and remap == list(range(store.p)):
        return store
    journeys = tuple(_remap_journey(j, remap) for j in store.journeys)
    logger.info(
        "Applied channel grouping",
        extra={"channels": store.p, "groups": groups.p, "journeys": len(journeys)},
    )
    return JourneyStore(groups, journeys, store.provenance, store.issues)


def filter_min_channels(
    store: JourneyStore,
    min_distinct: int,
    mode: Union[FilterMode, str] = FilterMode.DISTINCT_CHANNELS,
) -> JourneyStore:
    """Keep journeys with at least ``min_distinct`` distinct channels (or touchpoints)."""
    if min_distinct < 1:
        raise PreconditionError(f"min_distinct must be >= 1, got {min_distinct}")
    mode = FilterMode(mode)
    if min_distinct == 1:
        return store
    if mode is FilterMode.DISTINCT_CHANNELS:
        kept = [j for j in store.journeys if j.coalition.cardinality() >= min_distinct]
    else:
        kept = [j for j in store.journeys if len(j) >= min_distinct]
    logger.info(
        "Filtered journeys",
        extra={"mode": mode.value, "min_distinct": min_distinct, "kept": len(kept), "dropped": len(store) - len(kept)},
    )
    return store.replace(kept)
