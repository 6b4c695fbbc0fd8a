"""Journey-jsonl line schema."""
from decimal import Decimal
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class JourneyRecord(BaseModel):
    """One line of a journey-jsonl file."""
    model_config = ConfigDict(extra='forbid')

    user: str = Field(..., min_length=1, description="Opaque user identifier")
    revenue: Decimal = Field(..., description="Conversion value, non-negative")
    touchpoints: List[str] = Field(..., min_length=1, description="Channel labels in visit order")
    timestamps: Optional[List[int]] = Field(None, description="Milliseconds since epoch, parallel to touchpoints")

    @field_validator('touchpoints')
    @classmethod
    def validate_labels(cls, v: List[str]) -> List[str]:
        if any(not label for label in v):
            raise ValueError('Channel labels cannot be empty')
        return v

    @model_validator(mode='after')
    def validate_timestamps(self) -> "JourneyRecord":
        if self.timestamps is not None and len(self.timestamps) != len(self.touchpoints):
            raise ValueError('timestamps must be parallel to touchpoints')
        return self
