"""
Environment-backed configuration and logging setup shared by the command-line tools.
"""

import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DEFAULT_DATASET = Path(__file__).resolve().parent.parent / "data" / "kdca_2021-10-26.csv"

logger = logging.getLogger(__name__)


def _int_env(name: str, default: Optional[int]) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


class Config:
    """Configuration class to centralize all settings."""

    def __init__(self):
        # Load environment variables
        load_dotenv()

        # Optional settings with defaults
        self.seed = _int_env("LOCPIR_SEED", None)
        self.log_level = os.getenv("LOCPIR_LOG_LEVEL", "INFO").upper()
        if not isinstance(getattr(logging, self.log_level, None), int):
            raise ValueError(f"LOCPIR_LOG_LEVEL is not a logging level: {self.log_level!r}")
        self.log_file = os.getenv("LOCPIR_LOG_FILE") or None

        self.threads = _int_env("LOCPIR_THREADS", 4)
        if self.threads < 1:
            raise ValueError(f"LOCPIR_THREADS must be positive, got {self.threads}")

        self.engine = os.getenv("LOCPIR_ENGINE", "clear")
        if self.engine not in ("clear", "tlwe-oracle"):
            raise ValueError(f"LOCPIR_ENGINE must be 'clear' or 'tlwe-oracle', got {self.engine!r}")

        self.security = _int_env("LOCPIR_SECURITY", 80)
        if self.security not in (80, 128):
            raise ValueError(f"LOCPIR_SECURITY must be 80 or 128, got {self.security}")

        self.frac_bits = _int_env("LOCPIR_FRAC_BITS", 7)
        if self.frac_bits < 0:
            raise ValueError(f"LOCPIR_FRAC_BITS must be non-negative, got {self.frac_bits}")

        self.dataset = Path(os.getenv("LOCPIR_DATASET") or DEFAULT_DATASET)


def configure_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """Configure root logging with a stream handler and an optional file handler."""
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.insert(0, logging.FileHandler(log_file))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
