# src/core/config.py
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

HBAR = 1.0

DEFAULT_POINTS = 1024
DEFAULT_MAX_ORDER = 200
DEFAULT_LOG_LEVEL = "INFO"


def default_points() -> int:
    """Grid size from OSCITOM_POINTS, read at call time so overrides apply."""
    return int(os.getenv("OSCITOM_POINTS", str(DEFAULT_POINTS)))


def max_hermite_order() -> int:
    return int(os.getenv("OSCITOM_MAX_ORDER", str(DEFAULT_MAX_ORDER)))


def default_jobs() -> int:
    return int(os.getenv("OSCITOM_JOBS", str(os.cpu_count() or 1)))


def log_level() -> str:
    return os.getenv("OSCITOM_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()


def metrics_file():
    return os.getenv("OSCITOM_METRICS_FILE") or None
