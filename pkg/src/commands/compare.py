"""``compare``: naive oracle against the simplified engine on identical aggregates."""
import argparse

from src.core.config import settings
from src.services.benchmark import timed
from src.services.error_handling import CapacityError, InvariantError, error_handler
from src.services.heuristics import BASELINES
from src.services.reporting import compare, emit_comparison
from src.services.revenue import aggregate
from src.services.shapley import shapley_naive, shapley_simplified

from .pipeline import build_config, load_store, print_summary, write_output


@error_handler()
def cmd_compare(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    store, load_seconds = timed(lambda: load_store(cfg))
    if store.p > settings.NAIVE_MAX_CHANNELS:
        raise CapacityError(
            f"compare runs the naive engine, which needs p <= {settings.NAIVE_MAX_CHANNELS}; got {store.p}"
        )

    rev = aggregate(store, kpi=cfg.kpi, keep_zero=cfg.keep_zero, threads=cfg.threads)
    naive, naive_seconds = timed(lambda: shapley_naive(rev))
    simplified, simplified_seconds = timed(lambda: shapley_simplified(rev))
    record = compare(
        naive, simplified, store.catalog, timings={"naive": naive_seconds, "simplified": simplified_seconds}
    )

    if cfg.baselines:
        extra = {}
        for method, attribute in BASELINES.items():
            values = attribute(store, cfg.kpi)
            extra[method.value] = dict(zip(store.catalog.names, values.values.tolist()))
        record = record.model_copy(update={"baselines": extra})

    write_output(emit_comparison(record, cfg.emit), cfg.output)
    print_summary(
        store,
        rev.total,
        load_seconds + naive_seconds + simplified_seconds,
        {"max relative delta": f"{record.max_rel_delta:.3e}"},
    )
    if not record.within_tolerance:
        raise InvariantError(
            f"naive and simplified disagree by {record.max_rel_delta:.3e} (tolerance {record.tolerance:.0e})"
        )
    return 0
