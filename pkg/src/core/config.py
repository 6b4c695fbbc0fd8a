"""Application configuration settings."""
import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Settings:
    """Engine settings loaded from environment variables."""

    # Logging Configuration
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    ENABLE_STRUCTURED_LOGGING: bool = os.getenv("ENABLE_STRUCTURED_LOGGING", "false").lower() == "true"

    # Capacity Configuration
    MAX_CHANNELS: int = int(os.getenv("MAX_CHANNELS", "64"))  # coalition keys are 64-bit sets
    NAIVE_MAX_CHANNELS: int = int(os.getenv("NAIVE_MAX_CHANNELS", "24"))  # 2^24 doubles = 128 MiB

    # Numerics Configuration
    INVARIANT_TOLERANCE: float = float(os.getenv("INVARIANT_TOLERANCE", "1e-9"))
    LEMMA_TOLERANCE: float = float(os.getenv("LEMMA_TOLERANCE", "1e-12"))
    KEEP_ZERO_REVENUE: bool = os.getenv("KEEP_ZERO_REVENUE", "false").lower() == "true"

    # Report Configuration
    REPORT_PRECISION: int = int(os.getenv("REPORT_PRECISION", "3"))
    SUMMARY_PRECISION: int = int(os.getenv("SUMMARY_PRECISION", "2"))
    TOUCHPOINT_DISPLAY_CAP: int = int(os.getenv("TOUCHPOINT_DISPLAY_CAP", "5"))

    # Parallelism Configuration
    DEFAULT_THREADS: int = int(os.getenv("DEFAULT_THREADS", "1"))


# Global settings instance
settings = Settings()
