"""Test structured logging, data-quality tracking and the command error wrapper."""
import importlib
import json

import pytest
from structlog.testing import capture_logs

from src.services.error_handling import (
    SERVICE_NAME,
    CapacityError,
    ErrorTracker,
    ParseError,
    StructuredLogger,
    configure_logging,
    error_handler,
)


@pytest.fixture(autouse=True)
def info_logging():
    configure_logging("INFO", structured=False)


def test_entry_point_imports_and_logs():
    """Test the entry point imports and a module logger writes a structured line."""
    main = importlib.import_module("main")
    assert callable(main.main)
    with capture_logs() as logs:
        StructuredLogger("smoke").info("hello", extra={"a": 1})
    (entry,) = logs
    assert entry["event"] == "hello"
    assert entry["a"] == 1
    assert entry["service"] == SERVICE_NAME
    assert entry["logger_name"] == "smoke"
    assert entry["log_level"] == "info"


def test_logger_follows_later_configuration():
    """Test a logger created before configuration uses the active processors."""
    logger = StructuredLogger("early")
    with capture_logs() as logs:
        logger.warning("late", extra={"k": "v"})
    assert [(e["event"], e["log_level"], e["k"]) for e in logs] == [("late", "warning", "v")]


def test_tracker_counts_and_reports():
    """Test issues are counted per kind and reported once per kind."""
    tracker = ErrorTracker("events.csv")
    tracker.record_issue("user_without_conversion", {"user_id": "u1"})
    tracker.record_issue("user_without_conversion", {"user_id": "u2"})
    tracker.record_issue("trailing_impressions")
    assert tracker.snapshot() == {"trailing_impressions": 1, "user_without_conversion": 2}
    with capture_logs() as logs:
        tracker.report()
    assert [(e["kind"], e["count"]) for e in logs] == [
        ("trailing_impressions", 1),
        ("user_without_conversion", 2),
    ]
    assert all(e["source"] == "events.csv" for e in logs)


def test_error_handler_payload_and_exit_code(capsys):
    """Test engine errors become an exit code plus one JSON object on stderr."""

    @error_handler()
    def failing() -> int:
        raise ParseError("bad row", line=4, source="events.csv")

    with capture_logs():
        assert failing() == 3
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert payload["error"] == "parse_error"
    assert payload["exit_code"] == 3
    assert payload["line"] == 4
    assert payload["source"] == "events.csv"


def test_error_handler_maps_os_errors(capsys):
    """Test unreadable files are data errors and capacity errors keep their own code."""

    @error_handler(log_errors=False)
    def missing() -> int:
        raise FileNotFoundError("no such file: journeys.jsonl")

    @error_handler(log_errors=False)
    def too_wide() -> int:
        raise CapacityError("p=70 exceeds 64")

    assert missing() == 3
    assert too_wide() == 4
    first, second = capsys.readouterr().err.strip().splitlines()
    assert json.loads(first)["error"] == "data_error"
    assert json.loads(second)["error"] == "capacity_error"


def test_error_handler_passes_success_through():
    """Test a successful command returns its own exit code."""

    @error_handler()
    def ok() -> int:
        return 0

    assert ok() == 0
