"""Deterministic synthetic campaigns.

Streams come from numpy's ``PCG64`` bit generator seeded with the spec seed.
Draw order is fixed: loyal flags, loyal channels, journey lengths, channels,
revenues, then (only when ``mean_gap_ms`` is set) start offsets and gaps.
Changing that order changes every stream.
"""
import json
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from src.models.journey import ChannelCatalog, Journey, JourneyStore, Touchpoint
from src.schemas.campaign import CampaignSpec
from src.services.error_handling import StructuredLogger, UsageError

logger = StructuredLogger(__name__)

PRNG_ALGORITHM = "PCG64"
CENTS = Decimal("0.01")


def load_campaign_spec(path: Union[str, Path]) -> CampaignSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: campaign spec is not valid JSON: {e.msg}") from None
    return CampaignSpec.model_validate(data)


def _money(value: float) -> Decimal:
    return Decimal(repr(value)).quantize(CENTS, rounding=ROUND_HALF_EVEN)


def generate(spec: CampaignSpec) -> JourneyStore:
    """Draw ``spec.journeys`` converted journeys."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n = spec.journeys

    loyal = rng.random(n) < spec.loyal_share
    loyal_pick = rng.integers(0, max(len(spec.loyal_channels), 1), size=n)
    lengths = rng.choice(spec.max_length, size=n, p=spec.length_weights) + 1
    lengths[loyal] = 1
    channel_draws = rng.choice(spec.p, size=int(lengths.sum()), p=spec.channel_weights)
    revenues = rng.lognormal(spec.revenue_mean_log, spec.revenue_sigma_log, size=n)

    gaps: Optional[np.ndarray] = None
    if spec.mean_gap_ms is not None:
        starts = spec.start_ms + rng.integers(0, spec.span_ms, size=n)
        gaps = np.rint(rng.exponential(spec.mean_gap_ms, size=int(lengths.sum()))).astype(np.int64)

    loyal_channels = np.array(spec.loyal_channels or [0], dtype=np.int64)
    journeys: List[Journey] = []
    offset = 0
    for k in range(n):
        length = int(lengths[k])
        if loyal[k]:
            channels = [int(loyal_channels[loyal_pick[k]])]
        else:
            channels = channel_draws[offset : offset + length].tolist()
        times = None
        if gaps is not None:
            # first touchpoint at the journey start, later ones after cumulative gaps
            steps = gaps[offset : offset + length].copy()
            steps[0] = 0
            times = (starts[k] + np.cumsum(steps)).tolist()
        touchpoints = tuple(
            Touchpoint(channel, position, None if times is None else times[position - 1])
            for position, channel in enumerate(channels, start=1)
        )
        journeys.append(Journey(f"u{k + 1}", touchpoints, _money(float(revenues[k]))))
        offset += length

    store = JourneyStore(
        ChannelCatalog(tuple(spec.labels())),
        tuple(journeys),
        provenance=f"synth:{PRNG_ALGORITHM}:{spec.seed}",
    )
    logger.info(
        "Generated synthetic campaign",
        extra={"p": spec.p, "journeys": n, "loyal": int(loyal.sum()), "seed": spec.seed, "prng": PRNG_ALGORITHM},
    )
    return store
