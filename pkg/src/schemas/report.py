"""Report, comparison, audit and benchmark records."""
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field


class PercentRow(BaseModel):
    """One channel of an attribution table."""
    label: str
    cells: List[float] = Field(default_factory=list, description="Per-slot values; empty for unordered tables")
    total: float


class PercentReport(BaseModel):
    """Channel (and optionally per-touchpoint) attribution table."""
    method: str
    unit: Literal["percent", "value"] = "percent"
    slot_prefix: str = Field("tp", description="Column prefix for slot columns")
    rows: List[PercentRow]
    column_totals: List[float] = Field(default_factory=list)
    grand_total: float

    @property
    def slots(self) -> int:
        return len(self.column_totals)


class ChannelDelta(BaseModel):
    label: str
    a: float
    b: float
    abs_delta: float
    rel_delta: float = Field(..., description="abs_delta relative to the campaign total")


class ComparisonRecord(BaseModel):
    """Per-channel differences between two attributions of the same catalog."""
    method_a: str
    method_b: str
    channels: List[ChannelDelta]
    max_abs_delta: float
    max_rel_delta: float
    tolerance: float
    within_tolerance: bool
    timings: Dict[str, float] = Field(default_factory=dict, description="Seconds per engine")
    time_ratio: Optional[float] = Field(None, description="method_a seconds over method_b seconds")
    baselines: Dict[str, Dict[str, float]] = Field(default_factory=dict)


class AuditCheck(BaseModel):
    name: str
    passed: bool
    residual: float = 0.0
    detail: str = ""


class AuditReport(BaseModel):
    """Invariant audit of a journey store."""
    journeys: int
    channels: int
    total_value: float
    checks: List[AuditCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class BenchmarkReport(BaseModel):
    """Wall-clock timings of the engines on one synthetic campaign."""
    p: int
    journeys: int
    coalitions: int
    timings: Dict[str, float] = Field(default_factory=dict)
    ratios: Dict[str, float] = Field(default_factory=dict, description="Engine seconds over simplified seconds")
    skipped: Dict[str, str] = Field(default_factory=dict, description="Engine name to reason")
