"""Shared plumbing for the commands: run config, the ingest pipeline, output and summary."""
import argparse
import sys
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from src.core.config import settings
from src.models.journey import JourneyStore
from src.schemas.run_config import RunConfig
from src.services.error_handling import StructuredLogger, UsageError
from src.services.ingestion import apply_grouping, filter_min_channels, load_group_map, parse_sources

logger = StructuredLogger(__name__)

# argparse destination -> RunConfig field
FLAG_FIELDS = {
    "input": "inputs",
    "format": "input_format",
    "group_map": "group_map",
    "min_distinct": "min_distinct",
    "filter_mode": "filter_mode",
    "method": "method",
    "kpi": "kpi",
    "keep_zero": "keep_zero",
    "time_bucket": "time_bucket",
    "output": "output",
    "emit": "emit",
    "percent": "percent",
    "precision": "precision",
    "threads": "threads",
    "dump_coalitions": "dump_coalitions",
    "baseline": "baselines",
}


def build_config(args: argparse.Namespace, **forced: Any) -> RunConfig:
    """Run config file first, then every flag the user actually gave, then ``forced``."""
    overrides: Dict[str, Any] = {
        field: getattr(args, dest) for dest, field in FLAG_FIELDS.items() if hasattr(args, dest)
    }
    overrides.update(forced)
    return RunConfig.load(getattr(args, "config", None), overrides)


def load_store(cfg: RunConfig) -> JourneyStore:
    """ingest -> [group] -> [filter]"""
    if not cfg.inputs:
        raise UsageError("at least one --input is required")
    store = parse_sources(cfg.inputs, cfg.input_format, threads=cfg.threads)
    if cfg.group_map is not None:
        store = apply_grouping(store, load_group_map(cfg.group_map))
    return filter_min_channels(store, cfg.min_distinct, cfg.filter_mode)


def write_output(data: bytes, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(data.decode("utf-8"))
        sys.stdout.flush()
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    logger.debug("Wrote output", extra={"path": str(path), "bytes": len(data)})


def print_summary(
    store: JourneyStore, total_value: float, seconds: float, extra: Optional[Mapping[str, Any]] = None
) -> None:
    """One human-readable summary line on stderr."""
    precision = settings.SUMMARY_PRECISION
    parts = [
        f"total value {total_value:.{precision}f}",
        f"channels {store.p}",
        f"journeys {len(store)}",
        f"wall time {seconds:.{precision}f}s",
    ]
    parts.extend(f"{key} {value}" for key, value in (extra or {}).items())
    if store.issues:
        parts.append("issues " + ", ".join(f"{k}={v}" for k, v in store.issues.items()))
    sys.stderr.write("; ".join(parts) + "\n")
