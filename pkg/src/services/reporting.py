"""Percent normalisation, table emission, method comparison and audit/benchmark rendering."""
import csv
import io
import json
import math
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Dict, List, Optional, Sequence, Union

from src.core.config import settings
from src.models.journey import ChannelCatalog
from src.schemas.report import (
    AuditReport,
    BenchmarkReport,
    ChannelDelta,
    ComparisonRecord,
    PercentReport,
    PercentRow,
)
from src.schemas.run_config import EmitFormat
from src.services.error_handling import (
    CatalogMismatchError,
    NoAttributionError,
    ParseError,
    StructuredLogger,
)
from src.services.shapley import Attribution, OrderedAttribution

logger = StructuredLogger(__name__)

AnyAttribution = Union[Attribution, OrderedAttribution]


# ============ Tables ============
def to_table(
    a: AnyAttribution,
    catalog: ChannelCatalog,
    percent: bool = True,
    method: Optional[str] = None,
    slot_prefix: str = "tp",
) -> PercentReport:
    """Attribution as a table of raw values, or of percentages of the total when ``percent``."""
    if a.p != catalog.p:
        raise CatalogMismatchError(f"attribution has {a.p} channels, catalog has {catalog.p}")
    total = a.total
    if percent and total <= 0:
        raise NoAttributionError("total campaign value is zero; percentages are undefined")
    scale = 100.0 / total if percent else 1.0

    rows: List[PercentRow] = []
    column_totals: List[float] = []
    if isinstance(a, OrderedAttribution):
        scaled = [[value * scale for value in row] for row in a.matrix.tolist()]
        for name, cells in zip(catalog.names, scaled):
            rows.append(PercentRow(label=name, cells=cells, total=math.fsum(cells)))
        column_totals = [math.fsum(column) for column in zip(*scaled)] if scaled else []
        label = method or "ordered"
    else:
        for name, value in zip(catalog.names, a.values.tolist()):
            rows.append(PercentRow(label=name, total=value * scale))
        label = method or a.method.value
    return PercentReport(
        method=label,
        unit="percent" if percent else "value",
        slot_prefix=slot_prefix,
        rows=rows,
        column_totals=column_totals,
        grand_total=math.fsum(row.total for row in rows),
    )


def to_percent(a: AnyAttribution, catalog: ChannelCatalog, method: Optional[str] = None) -> PercentReport:
    """Each cell as 100 * phi / total campaign value."""
    return to_table(a, catalog, percent=True, method=method)


def round_half_even(value: float, precision: int) -> Decimal:
    quantum = Decimal(1).scaleb(-precision)
    rounded = Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_EVEN)
    return rounded.copy_abs() if rounded.is_zero() else rounded


def _fmt(value: float, precision: int) -> str:
    return str(round_half_even(value, precision))


def _rounded(value: float, precision: int) -> float:
    return float(round_half_even(value, precision))


# ============ Emission ============
def _emit_csv(report: PercentReport, precision: int) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        ["channel", *[f"{report.slot_prefix}{i}" for i in range(1, report.slots + 1)], "total"]
    )
    for row in report.rows:
        writer.writerow([row.label, *[_fmt(c, precision) for c in row.cells], _fmt(row.total, precision)])
    writer.writerow(
        ["TOTAL", *[_fmt(c, precision) for c in report.column_totals], _fmt(report.grand_total, precision)]
    )
    return buffer.getvalue()


def _emit_json(report: PercentReport, precision: int) -> str:
    payload = {
        "method": report.method,
        "unit": report.unit,
        "slot_prefix": report.slot_prefix,
        "rows": [
            {
                "label": row.label,
                "cells": [_rounded(c, precision) for c in row.cells],
                "total": _rounded(row.total, precision),
            }
            for row in report.rows
        ],
        "column_totals": [_rounded(c, precision) for c in report.column_totals],
        "grand_total": _rounded(report.grand_total, precision),
    }
    return json.dumps(payload, indent=2) + "\n"


def _fold_columns(cells: Sequence[float], cap: int) -> List[float]:
    if len(cells) <= cap:
        return list(cells)
    return [*cells[:cap], math.fsum(cells[cap:])]


def _emit_text(report: PercentReport, precision: int, display_cap: int) -> str:
    folded = report.slots > display_cap
    slot_headers = [f"{report.slot_prefix}{i}" for i in range(1, min(report.slots, display_cap) + 1)]
    if folded:
        slot_headers.append(f"{report.slot_prefix}{display_cap + 1}+")
    suffix = "%" if report.unit == "percent" else ""

    def line(label: str, cells: Sequence[float], total: float) -> List[str]:
        shown = _fold_columns(cells, display_cap)
        return [label, *[_fmt(c, precision) + suffix for c in shown], _fmt(total, precision) + suffix]

    table = [["channel", *slot_headers, "total"]]
    table.extend(line(row.label, row.cells, row.total) for row in report.rows)
    table.append(line("TOTAL", report.column_totals, report.grand_total))

    widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
    out = [f"# {report.method} ({report.unit})"]
    for r in table:
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        out.append("  ".join(cells).rstrip())
    return "\n".join(out) + "\n"


def emit_table(
    report: PercentReport,
    format: Union[EmitFormat, str] = EmitFormat.CSV,
    precision: Optional[int] = None,
    display_cap: Optional[int] = None,
) -> bytes:
    """Serialise a report; rounding happens here and nowhere else."""
    precision = settings.REPORT_PRECISION if precision is None else precision
    cap = settings.TOUCHPOINT_DISPLAY_CAP if display_cap is None else display_cap
    format = EmitFormat(format)
    if format is EmitFormat.CSV:
        text = _emit_csv(report, precision)
    elif format is EmitFormat.JSON:
        text = _emit_json(report, precision)
    else:
        text = _emit_text(report, precision, cap)
    return text.encode("utf-8")


def parse_table_csv(data: Union[bytes, str], method: str = "csv", unit: str = "percent") -> PercentReport:
    """Read back a CSV emitted by ``emit_table``."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2 or rows[0][0] != "channel" or rows[0][-1] != "total" or rows[-1][0] != "TOTAL":
        raise ParseError("not an attribution table: expected channel header and TOTAL row")
    header = rows[0]
    slot_prefix = header[1].rstrip("0123456789") if len(header) > 2 else "tp"
    try:
        body = [
            PercentRow(label=r[0], cells=[float(c) for c in r[1:-1]], total=float(r[-1])) for r in rows[1:-1]
        ]
        totals = [float(c) for c in rows[-1][1:-1]]
        grand_total = float(rows[-1][-1])
    except (ValueError, IndexError) as e:
        raise ParseError(f"bad number in attribution table: {e}") from None
    return PercentReport(
        method=method, unit=unit, slot_prefix=slot_prefix, rows=body, column_totals=totals, grand_total=grand_total
    )


def parse_table_json(data: Union[bytes, str]) -> PercentReport:
    return PercentReport.model_validate_json(data)


# ============ Comparison ============
def compare(
    a: Attribution,
    b: Attribution,
    catalog: ChannelCatalog,
    timings: Optional[Dict[str, float]] = None,
    tolerance: Optional[float] = None,
    catalog_b: Optional[ChannelCatalog] = None,
) -> ComparisonRecord:
    """Per-channel absolute and relative deltas between two attributions of one catalog."""
    if catalog_b is not None and catalog_b != catalog:
        raise CatalogMismatchError("attributions were computed over different catalogs")
    if a.p != catalog.p or b.p != catalog.p:
        raise CatalogMismatchError(f"channel counts differ: {a.p}, {b.p}, catalog {catalog.p}")
    tolerance = settings.INVARIANT_TOLERANCE if tolerance is None else tolerance
    scale = max(abs(a.total), abs(b.total))

    deltas = []
    for label, x, y in zip(catalog.names, a.values.tolist(), b.values.tolist()):
        diff = abs(x - y)
        deltas.append(
            ChannelDelta(label=label, a=x, b=y, abs_delta=diff, rel_delta=diff / scale if scale else diff)
        )
    max_abs = max((d.abs_delta for d in deltas), default=0.0)
    max_rel = max((d.rel_delta for d in deltas), default=0.0)

    timings = dict(timings or {})
    method_a, method_b = a.method.value, b.method.value
    ratio = None
    if method_a in timings and timings.get(method_b):
        ratio = timings[method_a] / timings[method_b]

    record = ComparisonRecord(
        method_a=method_a,
        method_b=method_b,
        channels=deltas,
        max_abs_delta=max_abs,
        max_rel_delta=max_rel,
        tolerance=tolerance,
        within_tolerance=max_rel <= tolerance,
        timings=timings,
        time_ratio=ratio,
    )
    if not record.within_tolerance:
        logger.warning(
            "Attributions disagree",
            extra={"method_a": method_a, "method_b": method_b, "max_rel_delta": max_rel, "tolerance": tolerance},
        )
    return record


def emit_comparison(record: ComparisonRecord, format: Union[EmitFormat, str] = EmitFormat.JSON) -> bytes:
    format = EmitFormat(format)
    if format is EmitFormat.JSON:
        return (record.model_dump_json(indent=2) + "\n").encode("utf-8")
    if format is EmitFormat.CSV:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["channel", record.method_a, record.method_b, "abs_delta", "rel_delta"])
        for d in record.channels:
            writer.writerow([d.label, repr(d.a), repr(d.b), repr(d.abs_delta), repr(d.rel_delta)])
        return buffer.getvalue().encode("utf-8")

    lines = [f"# {record.method_a} vs {record.method_b}"]
    width = max((len(d.label) for d in record.channels), default=7)
    for d in record.channels:
        lines.append(f"{d.label.ljust(width)}  {d.a:>16.6f}  {d.b:>16.6f}  {d.rel_delta:>10.3e}")
    verdict = "within" if record.within_tolerance else "OUTSIDE"
    lines.append(f"max relative delta {record.max_rel_delta:.3e} ({verdict} tolerance {record.tolerance:.0e})")
    for name, seconds in sorted(record.timings.items()):
        lines.append(f"{name}: {seconds:.6f}s")
    if record.time_ratio is not None:
        lines.append(f"time ratio {record.method_a}/{record.method_b}: {record.time_ratio:.1f}x")
    for name, values in sorted(record.baselines.items()):
        shown = ", ".join(f"{label}={value:.{settings.SUMMARY_PRECISION}f}" for label, value in values.items())
        lines.append(f"baseline {name}: {shown}")
    return ("\n".join(lines) + "\n").encode("utf-8")


# ============ Audit and benchmark ============
def emit_audit(report: AuditReport, format: Union[EmitFormat, str] = EmitFormat.TEXT) -> bytes:
    format = EmitFormat(format)
    if format is EmitFormat.JSON:
        payload = {"passed": report.passed, **report.model_dump()}
        return (json.dumps(payload, indent=2) + "\n").encode("utf-8")
    if format is EmitFormat.CSV:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["check", "passed", "residual", "detail"])
        for check in report.checks:
            writer.writerow([check.name, str(check.passed).lower(), repr(check.residual), check.detail])
        return buffer.getvalue().encode("utf-8")

    width = max(len(check.name) for check in report.checks)
    lines = [
        f"# audit: {report.journeys} journeys, {report.channels} channels, "
        f"total value {report.total_value:.{settings.SUMMARY_PRECISION}f}"
    ]
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        line = f"{status}  {check.name.ljust(width)}  residual {check.residual:.3e}"
        lines.append(f"{line}  {check.detail}" if check.detail else line)
    return ("\n".join(lines) + "\n").encode("utf-8")


def emit_benchmark(report: BenchmarkReport, format: Union[EmitFormat, str] = EmitFormat.TEXT) -> bytes:
    format = EmitFormat(format)
    if format is EmitFormat.JSON:
        return (report.model_dump_json(indent=2) + "\n").encode("utf-8")
    if format is EmitFormat.CSV:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["engine", "seconds", "ratio_to_simplified"])
        for name, seconds in report.timings.items():
            ratio = report.ratios.get(name)
            writer.writerow([name, repr(seconds), "" if ratio is None else repr(ratio)])
        return buffer.getvalue().encode("utf-8")

    lines = [f"# bench: p={report.p}, {report.journeys} journeys, {report.coalitions} coalitions"]
    for name, seconds in report.timings.items():
        ratio = report.ratios.get(name)
        lines.append(f"{name:<18} {seconds:>12.6f}s" + ("" if ratio is None else f"  {ratio:>8.1f}x"))
    for name, reason in report.skipped.items():
        lines.append(f"{name:<18} skipped ({reason})")
    return ("\n".join(lines) + "\n").encode("utf-8")
