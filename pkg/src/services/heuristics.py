"""Rule-based attribution baselines to set next to the Shapley engines."""
import math
from collections import defaultdict
from typing import Callable, DefaultDict, List, Optional

import numpy as np

from src.models.journey import Journey, JourneyStore
from src.schemas.run_config import Kpi
from src.services.revenue import journey_value
from src.services.shapley import Attribution, AttributionMethod


def _attribute(
    store: JourneyStore,
    method: AttributionMethod,
    credit: Callable[[Journey, float], List[tuple]],
    kpi: Kpi,
) -> Attribution:
    parts: DefaultDict[int, List[float]] = defaultdict(list)
    for journey in store.journeys:
        for channel, share in credit(journey, journey_value(journey, kpi)):
            parts[channel].append(share)
    values = np.array([math.fsum(parts.get(j, [])) for j in range(store.p)], dtype=np.float64)
    return Attribution(values, method)


def first_touch(store: JourneyStore, kpi: Kpi = Kpi.REVENUE) -> Attribution:
    """All value to the channel at position 1."""
    return _attribute(
        store, AttributionMethod.FIRST_TOUCH, lambda j, v: [(j.touchpoints[0].channel, v)], kpi
    )


def last_touch(store: JourneyStore, kpi: Kpi = Kpi.REVENUE) -> Attribution:
    """All value to the channel at the final position."""
    return _attribute(
        store, AttributionMethod.LAST_TOUCH, lambda j, v: [(j.touchpoints[-1].channel, v)], kpi
    )


def linear(store: JourneyStore, kpi: Kpi = Kpi.REVENUE) -> Attribution:
    """Value split evenly over touchpoints; repeated channels collect one share per visit."""
    return _attribute(
        store,
        AttributionMethod.LINEAR,
        lambda j, v: [(tp.channel, v / len(j)) for tp in j.touchpoints],
        kpi,
    )


BASELINES = {
    AttributionMethod.FIRST_TOUCH: first_touch,
    AttributionMethod.LAST_TOUCH: last_touch,
    AttributionMethod.LINEAR: linear,
}


def baseline(store: JourneyStore, method: AttributionMethod, kpi: Optional[Kpi] = None) -> Attribution:
    return BASELINES[method](store, kpi or Kpi.REVENUE)
