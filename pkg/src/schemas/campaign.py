"""Synthetic campaign specification."""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class CampaignSpec(BaseModel):
    """Shape of a synthetic campaign: channel count, journey lengths, popularity, loyalty, revenue."""
    model_config = ConfigDict(extra='forbid', frozen=True)

    p: int = Field(..., ge=1, le=64, description="Channel count")
    journeys: int = Field(..., ge=1, description="Converted journeys to draw")
    length_weights: List[float] = Field(
        ..., min_length=1, description="Categorical weights over journey lengths 1..N_max"
    )
    channel_weights: Optional[List[float]] = Field(None, description="Per-channel popularity")
    channel_names: Optional[List[str]] = Field(None, description="Labels; C1..Cp when absent")
    loyal_share: float = Field(0.0, ge=0.0, le=1.0, description="Share of single-touch loyal journeys")
    loyal_channels: List[int] = Field(default_factory=list, description="Channels loyal users convert on")
    revenue_mean_log: float = Field(3.0, description="Mean of log revenue")
    revenue_sigma_log: float = Field(1.0, ge=0.0, description="Std. dev. of log revenue")
    mean_gap_ms: Optional[int] = Field(None, gt=0, description="Mean gap between touchpoints; no timestamps when absent")
    start_ms: int = Field(1_700_000_000_000, ge=0, description="Campaign start, milliseconds since epoch")
    span_ms: int = Field(90 * 86_400_000, gt=0, description="Window in which journeys start")
    seed: int = Field(0, ge=0, lt=2**64)

    @field_validator('length_weights', 'channel_weights')
    @classmethod
    def normalize_weights(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is None:
            return v
        if any(w < 0 for w in v) or sum(v) <= 0:
            raise ValueError('weights must be non-negative with a positive sum')
        total = sum(v)
        return [w / total for w in v]

    @model_validator(mode='after')
    def validate_channels(self) -> "CampaignSpec":
        if self.channel_weights is not None and len(self.channel_weights) != self.p:
            raise ValueError('channel_weights must have one weight per channel')
        if self.channel_names is not None:
            if len(self.channel_names) != self.p or len(set(self.channel_names)) != self.p:
                raise ValueError('channel_names must be p unique labels')
        if any(not 0 <= c < self.p for c in self.loyal_channels):
            raise ValueError('loyal_channels must be channel ordinals below p')
        if self.loyal_share > 0 and not self.loyal_channels:
            raise ValueError('loyal_share > 0 needs at least one loyal channel')
        return self

    @property
    def max_length(self) -> int:
        return len(self.length_weights)

    def labels(self) -> List[str]:
        return list(self.channel_names) if self.channel_names else [f"C{j + 1}" for j in range(self.p)]
