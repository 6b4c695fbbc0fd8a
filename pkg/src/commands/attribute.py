"""``attribute``: journeys in, attribution table out."""
import argparse
import time
from typing import Tuple, Union

from src.core.config import settings
from src.models.journey import JourneyStore
from src.schemas.run_config import Method, RunConfig
from src.services.error_handling import CapacityError, StructuredLogger, error_handler
from src.services.heuristics import baseline
from src.services.reporting import emit_table, to_table
from src.services.revenue import (
    CoalitionRevenue,
    aggregate,
    aggregate_ordered,
    aggregate_timed,
    dump_coalition_revenue,
)
from src.services.shapley import (
    Attribution,
    AttributionMethod,
    OrderedAttribution,
    shapley_naive,
    shapley_ordered,
    shapley_simplified,
)

from .pipeline import build_config, load_store, print_summary, write_output

logger = StructuredLogger(__name__)


def run_engine(
    cfg: RunConfig, store: JourneyStore, rev: CoalitionRevenue
) -> Tuple[Union[Attribution, OrderedAttribution], str]:
    """Attribution for ``cfg.method`` plus the slot column prefix of its table."""
    method = cfg.method
    if method is Method.NAIVE:
        if store.p > settings.NAIVE_MAX_CHANNELS:
            raise CapacityError(
                f"naive method needs p <= {settings.NAIVE_MAX_CHANNELS} after grouping, got {store.p}"
            )
        return shapley_naive(rev), "tp"
    if method is Method.SIMPLIFIED:
        return shapley_simplified(rev), "tp"
    if method is Method.ORDERED:
        orev = aggregate_ordered(store, kpi=cfg.kpi, keep_zero=cfg.keep_zero, threads=cfg.threads)
        return shapley_ordered(orev), "tp"
    if method is Method.TIMED:
        orev = aggregate_timed(
            store, cfg.time_bucket.milliseconds, kpi=cfg.kpi, keep_zero=cfg.keep_zero, threads=cfg.threads
        )
        return shapley_ordered(orev), cfg.time_bucket.value
    return baseline(store, AttributionMethod(method.value), cfg.kpi), "tp"


@error_handler()
def cmd_attribute(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    started = time.perf_counter()

    store = load_store(cfg)
    rev = aggregate(store, kpi=cfg.kpi, keep_zero=cfg.keep_zero, threads=cfg.threads)
    if cfg.dump_coalitions is not None:
        write_output(dump_coalition_revenue(rev, store.catalog).encode("utf-8"), cfg.dump_coalitions)

    attribution, slot_prefix = run_engine(cfg, store, rev)
    report = to_table(
        attribution, store.catalog, percent=cfg.percent, method=cfg.method.value, slot_prefix=slot_prefix
    )
    write_output(emit_table(report, cfg.emit, cfg.precision), cfg.output)

    elapsed = time.perf_counter() - started
    logger.info(
        "Attribution finished",
        extra={"method": cfg.method.value, "channels": store.p, "journeys": len(store), "seconds": elapsed},
    )
    print_summary(store, rev.total, elapsed, {"method": cfg.method.value})
    return 0
