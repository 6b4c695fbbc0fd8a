"""Test percent tables, emission and method comparison."""
import json

import numpy as np
import pytest

from src.models.journey import ChannelCatalog
from src.schemas.report import AuditCheck, AuditReport, BenchmarkReport
from src.services.error_handling import CatalogMismatchError, NoAttributionError, ParseError
from src.services.reporting import (
    compare,
    emit_audit,
    emit_benchmark,
    emit_comparison,
    emit_table,
    parse_table_csv,
    parse_table_json,
    round_half_even,
    to_percent,
    to_table,
)
from src.services.revenue import aggregate, aggregate_ordered
from src.services.shapley import (
    Attribution,
    AttributionMethod,
    channel_totals,
    shapley_naive,
    shapley_ordered,
    shapley_simplified,
    touchpoint_totals,
)
from tests.conftest import make_store, random_revenue

AB = ChannelCatalog(("A", "B"))


@pytest.fixture
def simplified_report(three_journeys):
    """Percent report of the simplified engine on the three-journey store."""
    return to_percent(shapley_simplified(aggregate(three_journeys)), three_journeys.catalog)


@pytest.fixture
def ordered_store():
    """Single journey ([A, A, B], 12)."""
    return make_store([(["A", "A", "B"], 12)], ["A", "B"])


def test_to_percent_values(simplified_report):
    """Test cells are 100 * phi / total."""
    assert [row.total for row in simplified_report.rows] == pytest.approx([41.6666666667, 58.3333333333])
    assert simplified_report.grand_total == pytest.approx(100.0)
    assert simplified_report.slots == 0


def test_to_percent_single_channel():
    """Test one channel takes 100%."""
    report = to_percent(Attribution(np.array([7.5]), AttributionMethod.SIMPLIFIED), ChannelCatalog(("A",)))
    assert emit_table(report) == b"channel,total\nA,100.000\nTOTAL,100.000\n"


def test_to_percent_ordered(ordered_store):
    """Test an ordered report keeps per-slot cells and column totals."""
    report = to_percent(shapley_ordered(aggregate_ordered(ordered_store)), ordered_store.catalog)
    assert emit_table(report) == (
        b"channel,tp1,tp2,tp3,total\n"
        b"A,25.000,25.000,0.000,50.000\n"
        b"B,0.000,0.000,50.000,50.000\n"
        b"TOTAL,25.000,25.000,50.000,100.000\n"
    )


def test_to_percent_zero_total():
    """Test a zero total is a no-attribution error."""
    with pytest.raises(NoAttributionError):
        to_percent(Attribution(np.zeros(2), AttributionMethod.SIMPLIFIED), AB)


def test_to_table_raw_values(three_journeys):
    """Test raw value tables need no positive total."""
    report = to_table(shapley_simplified(aggregate(three_journeys)), three_journeys.catalog, percent=False)
    assert report.unit == "value"
    assert emit_table(report, precision=2) == b"channel,total\nA,25.00\nB,35.00\nTOTAL,60.00\n"
    zero = to_table(Attribution(np.zeros(2), AttributionMethod.SIMPLIFIED), AB, percent=False)
    assert zero.grand_total == 0.0


def test_to_table_catalog_mismatch():
    """Test the attribution must match the catalog size."""
    with pytest.raises(CatalogMismatchError):
        to_percent(Attribution(np.ones(3), AttributionMethod.SIMPLIFIED), AB)


def test_golden_csv(simplified_report, fixtures_dir):
    """Test CSV output is byte-exact against the golden file."""
    golden = (fixtures_dir / "three_journeys_simplified.csv").read_bytes()
    assert emit_table(simplified_report, "csv", precision=3) == golden


def test_golden_json(simplified_report, fixtures_dir):
    """Test JSON output is byte-exact against the golden file."""
    golden = (fixtures_dir / "three_journeys_simplified.json").read_bytes()
    assert emit_table(simplified_report, "json", precision=3) == golden


@pytest.mark.parametrize("emit", ["csv", "json"])
def test_golden_ordered(ordered_store, fixtures_dir, emit):
    """Test the per-touchpoint table is byte-exact against the golden file."""
    report = to_percent(shapley_ordered(aggregate_ordered(ordered_store)), ordered_store.catalog)
    golden = (fixtures_dir / f"ordered_aab.{emit}").read_bytes()
    assert emit_table(report, emit, precision=3) == golden


def test_json_round_trip(ordered_store):
    """Test emitted JSON parses back to the report at the emitted precision."""
    report = to_percent(shapley_ordered(aggregate_ordered(ordered_store)), ordered_store.catalog, method="ordered")
    parsed = parse_table_json(emit_table(report, "json"))
    assert parsed.method == "ordered"
    assert parsed.slots == 3
    for original, again in zip(report.rows, parsed.rows):
        assert again.label == original.label
        assert again.cells == pytest.approx(original.cells, abs=5e-4)
        assert again.total == pytest.approx(original.total, abs=5e-4)


def test_csv_round_trip(ordered_store):
    """Test emitted CSV parses back to the report at the emitted precision."""
    report = to_percent(shapley_ordered(aggregate_ordered(ordered_store)), ordered_store.catalog)
    parsed = parse_table_csv(emit_table(report, "csv", precision=4))
    assert parsed.slot_prefix == "tp"
    assert parsed.column_totals == pytest.approx(report.column_totals, abs=5e-5)
    assert parsed.grand_total == pytest.approx(100.0)


def test_parse_table_csv_rejects_other_csv():
    """Test arbitrary CSV is not mistaken for a table."""
    with pytest.raises(ParseError):
        parse_table_csv("a,b\n1,2\n")


def test_text_folds_columns_beyond_cap():
    """Test text output folds slots past the display cap."""
    store = make_store([(["A", "B", "A", "B", "A", "B", "A"], 70)], ["A", "B"])
    report = to_percent(shapley_ordered(aggregate_ordered(store)), store.catalog, method="ordered")
    text = emit_table(report, "text", display_cap=5).decode("utf-8")
    lines = text.splitlines()
    assert lines[0] == "# ordered (percent)"
    assert lines[1].split() == ["channel", "tp1", "tp2", "tp3", "tp4", "tp5", "tp6+", "total"]
    assert lines[-1].split()[-1] == "100.000%"
    assert report.slots == 7
    assert emit_table(report, "csv").decode("utf-8").splitlines()[0].endswith("tp6,tp7,total")


def test_round_half_even():
    """Test banker's rounding at emission."""
    assert str(round_half_even(0.125, 2)) == "0.12"
    assert str(round_half_even(0.375, 2)) == "0.38"
    assert str(round_half_even(-0.0001, 2)) == "0.00"


def test_cross_footing(repeat_store):
    """Test channel and touchpoint totals agree with the ordered report's margins."""
    oa = shapley_ordered(aggregate_ordered(repeat_store))
    matrix_report = to_percent(oa, repeat_store.catalog)
    channel_report = to_percent(channel_totals(oa), repeat_store.catalog)
    assert [r.total for r in channel_report.rows] == pytest.approx([r.total for r in matrix_report.rows])
    columns = touchpoint_totals(oa) * 100.0 / oa.total
    assert matrix_report.column_totals == pytest.approx(columns.tolist())


def test_compare_identical(three_journeys):
    """Test identical attributions have zero deltas."""
    phi = shapley_simplified(aggregate(three_journeys))
    record = compare(phi, phi, three_journeys.catalog)
    assert record.max_abs_delta == 0.0
    assert record.within_tolerance


def test_compare_naive_simplified(rng):
    """Test naive and simplified agree on a random p=8 map."""
    rev = random_revenue(rng, 8)
    catalog = ChannelCatalog(tuple(f"C{j}" for j in range(8)))
    record = compare(
        shapley_naive(rev), shapley_simplified(rev), catalog, timings={"naive": 2.0, "simplified": 0.5}
    )
    assert record.max_rel_delta <= 1e-9
    assert record.time_ratio == 4.0
    assert record.method_a == "naive"


def test_compare_perturbed(three_journeys):
    """Test a perturbed attribution is flagged."""
    phi = shapley_simplified(aggregate(three_journeys))
    bumped = Attribution(phi.values + np.array([1.0, -1.0]), AttributionMethod.NAIVE)
    record = compare(bumped, phi, three_journeys.catalog)
    assert record.max_abs_delta == pytest.approx(1.0)
    assert not record.within_tolerance


def test_compare_catalog_mismatch(three_journeys):
    """Test attributions over different catalogs cannot be compared."""
    phi = shapley_simplified(aggregate(three_journeys))
    with pytest.raises(CatalogMismatchError):
        compare(phi, phi, three_journeys.catalog, catalog_b=ChannelCatalog(("X", "Y")))
    with pytest.raises(CatalogMismatchError):
        compare(phi, Attribution(np.ones(3), AttributionMethod.NAIVE), three_journeys.catalog)


def test_emit_comparison_formats(three_journeys):
    """Test comparison records render in every format."""
    phi = shapley_simplified(aggregate(three_journeys))
    record = compare(phi, phi, three_journeys.catalog, timings={"simplified": 0.1})
    payload = json.loads(emit_comparison(record, "json"))
    assert payload["within_tolerance"] is True
    assert emit_comparison(record, "csv").decode("utf-8").splitlines()[0] == (
        "channel,simplified,simplified,abs_delta,rel_delta"
    )
    assert b"within tolerance" in emit_comparison(record, "text")


def test_emit_audit():
    """Test audit reports render pass and fail lines."""
    report = AuditReport(
        journeys=3,
        channels=2,
        total_value=60.0,
        checks=[AuditCheck(name="dummy", passed=True), AuditCheck(name="reconstruction", passed=False, residual=0.5)],
    )
    text = emit_audit(report, "text").decode("utf-8")
    assert "PASS  dummy" in text
    assert "FAIL  reconstruction" in text
    assert json.loads(emit_audit(report, "json"))["passed"] is False
    assert emit_audit(report, "csv").decode("utf-8").startswith("check,passed,residual,detail\n")


def test_emit_benchmark():
    """Test benchmark reports render timings, ratios and skips."""
    report = BenchmarkReport(
        p=4,
        journeys=10,
        coalitions=6,
        timings={"simplified": 0.5, "naive-direct": 5.0},
        ratios={"naive-direct": 10.0},
        skipped={"naive-zeta": "p=30 exceeds 24"},
    )
    text = emit_benchmark(report).decode("utf-8")
    assert "10.0x" in text
    assert "naive-zeta" in text and "skipped" in text
    assert json.loads(emit_benchmark(report, "json"))["ratios"] == {"naive-direct": 10.0}
