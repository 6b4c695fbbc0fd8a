"""``validate``: audit the attribution invariants on the actual dataset."""
import argparse
import time

from src.schemas.run_config import EmitFormat
from src.services.error_handling import InvariantError, error_handler
from src.services.reporting import emit_audit
from src.services.validation import audit

from .pipeline import build_config, load_store, print_summary, write_output


@error_handler()
def cmd_validate(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    # the audit reads as text unless a format was asked for
    emit = cfg.emit if "emit" in cfg.model_fields_set else EmitFormat.TEXT
    started = time.perf_counter()
    store = load_store(cfg)
    report = audit(store, kpi=cfg.kpi, threads=cfg.threads)
    write_output(emit_audit(report, emit), cfg.output)
    print_summary(store, report.total_value, time.perf_counter() - started)

    failed = [check.name for check in report.checks if not check.passed]
    if failed:
        raise InvariantError(f"invariant checks failed: {', '.join(failed)}")
    return 0
