"""Run configuration schema shared by every command."""
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.config import settings
from src.services.error_handling import UsageError


class InputFormat(str, Enum):
    JOURNEY_JSONL = "journey-jsonl"
    EVENT_CSV = "event-csv"


class FilterMode(str, Enum):
    DISTINCT_CHANNELS = "distinct-channels"
    TOUCHPOINTS = "touchpoints"


class Method(str, Enum):
    NAIVE = "naive"
    SIMPLIFIED = "simplified"
    ORDERED = "ordered"
    TIMED = "timed"
    FIRST_TOUCH = "first-touch"
    LAST_TOUCH = "last-touch"
    LINEAR = "linear"


class EmitFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    TEXT = "text"


class Kpi(str, Enum):
    REVENUE = "revenue"
    CONVERSIONS = "conversions"


class TimeBucket(str, Enum):
    HOUR = "hour"
    DAY = "day"

    @property
    def milliseconds(self) -> int:
        return 3_600_000 if self is TimeBucket.HOUR else 86_400_000


class RunConfig(BaseModel):
    """Everything a command needs; loadable from a JSON file and overridable by flags."""
    model_config = ConfigDict(extra='forbid', use_enum_values=False)

    inputs: List[Path] = Field(default_factory=list, description="Journey sources")
    input_format: InputFormat = Field(InputFormat.JOURNEY_JSONL, description="Format of every input")
    group_map: Optional[Path] = Field(None, description="channel,group CSV collapsing channels")
    min_distinct: int = Field(1, ge=1, description="Keep journeys with at least this many channels")
    filter_mode: FilterMode = Field(FilterMode.DISTINCT_CHANNELS)
    method: Method = Field(Method.SIMPLIFIED)
    kpi: Kpi = Field(Kpi.REVENUE)
    keep_zero: bool = Field(default_factory=lambda: settings.KEEP_ZERO_REVENUE)
    time_bucket: TimeBucket = Field(TimeBucket.DAY)
    output: Optional[Path] = Field(None, description="Report file; stdout when absent")
    emit: EmitFormat = Field(EmitFormat.CSV)
    percent: bool = Field(True, description="Report percentages of the total campaign value")
    precision: int = Field(default_factory=lambda: settings.REPORT_PRECISION, ge=0, le=12)
    threads: int = Field(default_factory=lambda: settings.DEFAULT_THREADS, ge=1)
    dump_coalitions: Optional[Path] = Field(None, description="Debug dump of R(S) as CSV")
    baselines: bool = Field(False, description="Add rule-based baselines to comparisons")

    @field_validator('inputs')
    @classmethod
    def validate_inputs(cls, v: List[Path]) -> List[Path]:
        if len(set(v)) != len(v):
            raise ValueError('duplicate input paths')
        return v

    @classmethod
    def load(cls, path: Optional[Path], overrides: Dict[str, Any]) -> "RunConfig":
        """File values first, then every override that is not None."""
        data: Dict[str, Any] = {}
        if path is not None:
            try:
                loaded = json.loads(Path(path).read_text(encoding="utf-8"))
            except json.JSONDecodeError as e:
                raise UsageError(f"{path}: run config is not valid JSON: {e.msg}") from None
            if not isinstance(loaded, dict):
                raise UsageError(f"{path}: run config must be a JSON object")
            data.update(loaded)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(data)
