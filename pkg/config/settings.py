"""
Configuration settings for the third-grade fluid simulator.
"""
import logging
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


class Settings:
    """Run defaults, overridable from the environment or a .env file."""

    # Logging
    LOG_LEVEL = os.getenv("SIM_LOG_LEVEL", "INFO")

    # Ensemble Settings
    WORKERS = int(os.getenv("SIM_WORKERS", "1"))
    PATHS = int(os.getenv("SIM_PATHS", "64"))
    # Master seed override; unset keeps the [noise] seed of the config file
    SEED = int(os.getenv("SIM_SEED")) if os.getenv("SIM_SEED") else None

    # Output Settings
    OUT_DIR = os.getenv("SIM_OUT_DIR", "./runs")

    # Prefix of per-key config overrides, e.g. THIRDGRADE_FIELD__MU=0.5
    ENV_PREFIX = os.getenv("SIM_ENV_PREFIX", "THIRDGRADE_")

    @classmethod
    def validate(cls) -> bool:
        """
        Validate critical settings.

        Returns:
            True if settings are valid
        """
        valid = True
        if cls.WORKERS < 1:
            logger.warning(f"SIM_WORKERS={cls.WORKERS} is below 1; paths will run in-process")
        if cls.PATHS < 2:
            logger.warning(f"SIM_PATHS={cls.PATHS}: ensemble statistics need at least 2 paths")
            valid = False
        if cls.SEED is not None and not 0 <= cls.SEED < 2 ** 64:
            logger.warning(f"SIM_SEED={cls.SEED} is not an unsigned 64-bit integer")
            valid = False
        if cls.LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            logger.warning(f"Unknown SIM_LOG_LEVEL {cls.LOG_LEVEL!r}; using INFO")
        return valid


# Create global settings instance
settings = Settings()
