"""Wall-clock comparison of the attribution engines on a synthetic campaign."""
import time
from typing import Callable, Dict, Optional, Sequence, Tuple, TypeVar

from src.core.config import settings
from src.schemas.campaign import CampaignSpec
from src.schemas.report import BenchmarkReport
from src.services.error_handling import StructuredLogger
from src.services.revenue import aggregate, aggregate_ordered
from src.services.shapley import shapley_naive, shapley_ordered, shapley_simplified
from src.services.synth import generate

logger = StructuredLogger(__name__)

T = TypeVar("T")

ENGINES = ("simplified", "ordered", "naive-zeta", "naive-direct")
DIRECT_MAX_CHANNELS = 16


def timed(func: Callable[[], T]) -> Tuple[T, float]:
    started = time.perf_counter()
    result = func()
    return result, time.perf_counter() - started


def run_benchmark(
    spec: CampaignSpec,
    engines: Sequence[str] = ENGINES,
    threads: int = 1,
    direct_max_channels: Optional[int] = None,
) -> BenchmarkReport:
    """Time each engine on one generated store; aggregation is timed separately."""
    direct_limit = DIRECT_MAX_CHANNELS if direct_max_channels is None else direct_max_channels
    store, _ = timed(lambda: generate(spec))
    rev, aggregate_seconds = timed(lambda: aggregate(store, threads=threads))

    timings: Dict[str, float] = {"aggregate": aggregate_seconds}
    skipped: Dict[str, str] = {}
    for engine in engines:
        if engine == "simplified":
            _, timings[engine] = timed(lambda: shapley_simplified(rev))
        elif engine == "ordered":
            orev, timings["aggregate-ordered"] = timed(lambda: aggregate_ordered(store, threads=threads))
            _, timings[engine] = timed(lambda: shapley_ordered(orev))
        elif engine == "naive-zeta":
            if rev.p > settings.NAIVE_MAX_CHANNELS:
                skipped[engine] = f"p={rev.p} exceeds {settings.NAIVE_MAX_CHANNELS}"
                continue
            _, timings[engine] = timed(lambda: shapley_naive(rev, utility_mode="zeta"))
        elif engine == "naive-direct":
            if rev.p > direct_limit:
                skipped[engine] = f"p={rev.p} exceeds {direct_limit}"
                continue
            _, timings[engine] = timed(lambda: shapley_naive(rev, utility_mode="direct"))
        else:
            skipped[engine] = "unknown engine"

    base = timings.get("simplified")
    ratios = {
        name: seconds / base
        for name, seconds in timings.items()
        if base and name not in ("simplified", "aggregate", "aggregate-ordered")
    }
    report = BenchmarkReport(
        p=spec.p, journeys=len(store), coalitions=len(rev), timings=timings, ratios=ratios, skipped=skipped
    )
    logger.info("Benchmark finished", extra=report.model_dump())
    return report
