"""Error types, data-quality tracking and structured logging for the attribution engine."""
import json
import logging
import sys
from collections import Counter
from functools import wraps
from typing import Any, Callable, Dict, Optional

import structlog
from pydantic import ValidationError

from src.core.config import settings

SERVICE_NAME = "shapley-attribution"

_structlog_configured = False


def configure_logging(level: Optional[str] = None, structured: Optional[bool] = None) -> None:
    """Configure structlog to write to stderr, as JSON lines or human-readable console lines."""
    global _structlog_configured

    level_name = (level or settings.LOG_LEVEL).upper()
    use_json = settings.ENABLE_STRUCTURED_LOGGING if structured is None else structured
    renderer = (
        structlog.processors.JSONRenderer(default=str)
        if use_json
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, level_name, logging.INFO)
        ),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
    _structlog_configured = True


class StructuredLogger:
    """Structured logging for engine runs."""

    def __init__(self, name: Optional[str] = None):
        if not _structlog_configured:
            configure_logging()
        # lazy proxy: picks up a later configure_logging call
        self.logger = structlog.get_logger(service=SERVICE_NAME, logger_name=name or __name__)

    def error(
        self,
        message: str,
        extra: Optional[Dict[str, Any]] = None,
        exception: Optional[BaseException] = None,
    ) -> None:
        """Log error message."""
        if exception is not None:
            self.logger.error(message, exc_info=exception, **(extra or {}))
        else:
            self.logger.error(message, **(extra or {}))

    def warning(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        """Log warning message."""
        self.logger.warning(message, **(extra or {}))

    def info(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        """Log info message."""
        self.logger.info(message, **(extra or {}))

    def debug(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        """Log debug message."""
        self.logger.debug(message, **(extra or {}))


# ============ Exceptions ============
class AttributionError(Exception):
    """Base error; every subclass maps to a process exit code."""

    exit_code: int = 1
    code: str = "attribution_error"

    def to_payload(self) -> Dict[str, Any]:
        return {"error": self.code, "message": str(self), "exit_code": self.exit_code}


class UsageError(AttributionError):
    """Bad command-line flags or run configuration."""

    exit_code = 2
    code = "usage_error"


class PreconditionError(AttributionError, ValueError):
    """An operation was called outside its documented domain."""

    exit_code = 2
    code = "precondition_violation"


class DataError(AttributionError):
    """Input data cannot be turned into a valid journey store or report."""

    exit_code = 3
    code = "data_error"


class ParseError(DataError):
    """Malformed input line."""

    code = "parse_error"

    def __init__(self, message: str, line: Optional[int] = None, source: Optional[str] = None):
        self.line = line
        self.source = source
        location = f"{source or '<input>'}:{line}" if line is not None else (source or "<input>")
        super().__init__(f"{location}: {message}")

    def to_payload(self) -> Dict[str, Any]:
        payload = super().to_payload()
        payload["line"] = self.line
        payload["source"] = self.source
        return payload


class JourneyValidationError(DataError):
    """A journey violates its invariants (negative revenue, bad positions, timestamps)."""

    code = "validation_error"


class InvalidChannelError(DataError):
    """Channel ordinal outside the catalog."""

    code = "invalid_channel"


class ConfigurationError(DataError):
    """Group map does not cover the catalog."""

    code = "configuration_error"


class CatalogMismatchError(DataError):
    """Two attributions or stores disagree on their channel catalog."""

    code = "catalog_mismatch"


class NoAttributionError(DataError):
    """Total campaign value is zero, percentages are undefined."""

    code = "no_attribution"


class NoDataError(DataError):
    """The input holds no converted journeys."""

    code = "no_data"


class CapacityError(AttributionError):
    """Channel count exceeds what a coalition key or dense table can hold."""

    exit_code = 4
    code = "capacity_error"


class InvariantError(AttributionError):
    """An attribution invariant failed on actual data."""

    exit_code = 5
    code = "invariant_failure"


# ============ Data quality tracking ============
class ErrorTracker:
    """Count data-quality issues met while ingesting so they surface as counted warnings."""

    def __init__(self, source: Optional[str] = None):
        self.source = source
        self.counts: Counter = Counter()
        self.structured_logger = StructuredLogger("error_tracker")

    def record_issue(self, kind: str, context: Optional[Dict[str, Any]] = None) -> None:
        """Record one occurrence of a data-quality issue."""
        self.counts[kind] += 1
        self.structured_logger.debug(
            f"Data issue: {kind}", extra={"source": self.source, **(context or {})}
        )

    def report(self) -> None:
        """Log one warning per issue kind with its count."""
        for kind, count in sorted(self.counts.items()):
            self.structured_logger.warning(
                f"Data issue recorded: {kind}",
                extra={"source": self.source, "kind": kind, "count": count},
            )

    def snapshot(self) -> Dict[str, int]:
        return dict(sorted(self.counts.items()))


# ============ Command wrapper ============
def error_handler(log_errors: bool = True) -> Callable[[Callable[..., int]], Callable[..., int]]:
    """Decorator turning engine errors into exit codes plus a JSON error line on stderr."""

    def decorator(func: Callable[..., int]) -> Callable[..., int]:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> int:
            structured_logger = StructuredLogger(func.__module__)
            try:
                return func(*args, **kwargs)
            except ValidationError as e:
                error: AttributionError = UsageError(f"invalid run configuration: {e}")
            except AttributionError as e:
                error = e
            except OSError as e:
                error = DataError(f"cannot read or write file: {e}")

            if log_errors:
                structured_logger.error(
                    f"Error in {func.__name__}",
                    extra={"function": func.__name__, "error": error.code},
                    exception=error,
                )
            sys.stderr.write(json.dumps(error.to_payload(), default=str) + "\n")
            return error.exit_code

        return wrapper

    return decorator
