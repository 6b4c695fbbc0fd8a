"""Pydantic schemas for inputs, run configuration and reports."""
from .campaign import *
from .journey import *
from .report import *
from .run_config import *

__all__ = [
    # Input schemas
    "JourneyRecord",
    "CampaignSpec",

    # Run configuration
    "RunConfig",
    "InputFormat",
    "FilterMode",
    "Method",
    "EmitFormat",
    "Kpi",
    "TimeBucket",

    # Report schemas
    "PercentRow",
    "PercentReport",
    "ChannelDelta",
    "ComparisonRecord",
    "AuditCheck",
    "AuditReport",
    "BenchmarkReport",
]
