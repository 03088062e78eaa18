"""
Process-level settings for the topological charge lab.
"""
import os
import logging
from typing import Optional

logger = logging.getLogger(__name__)


class Config:
    """Runtime settings read from the environment."""

    def __init__(self):
        # Worker threads for mesh and grid quadratures, 0 means one per core
        self.threads: int = self._read_int('TOPOCHARGE_THREADS', 0)

        # Logging
        self.log_level: str = os.getenv('TOPOCHARGE_LOG_LEVEL', 'INFO').upper()
        self.log_file: Optional[str] = os.getenv('TOPOCHARGE_LOG_FILE') or None

    @staticmethod
    def _read_int(name: str, default: int) -> int:
        raw = os.getenv(name)
        if raw is None or raw.strip() == '':
            return default
        try:
            value = int(raw)
        except ValueError:
            logger.warning(f"Ignoring {name}={raw!r}: not an integer")
            return default
        if value < 0:
            logger.warning(f"Ignoring {name}={value}: must be >= 0")
            return default
        return value

    def worker_count(self) -> int:
        """
        Number of worker threads to use.

        Returns:
            int: configured cap, or the CPU count when the cap is 0
        """
        if self.threads > 0:
            return self.threads
        return os.cpu_count() or 1

    def update_threads(self, threads: int):
        """Override the thread cap (0 = auto)."""
        if threads < 0:
            raise ValueError("threads must be >= 0")
        self.threads = threads


# Global config instance
config = Config()
