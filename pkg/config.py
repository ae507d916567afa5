#!/usr/bin/env python3
"""
Configuration module for the trike control toolkit
Environment settings shared by the CLI: output directory, worker count and logging.
"""

import logging
import os
import sys
from typing import Optional

from dotenv import load_dotenv

from utils.error.error_handler import setup_logger

# Load environment variables from .env file if it exists
load_dotenv()

logger = logging.getLogger(__name__)


class AppConfig:
    """Application configuration settings"""

    DEFAULT_OUT_DIR = "./out"
    DEFAULT_LOG_LEVEL = "INFO"
    MAX_WORKERS = 3

    @classmethod
    def get_out_dir(cls) -> str:
        """Get output directory from environment variable or use default"""
        return os.environ.get("TRIKECTL_OUT_DIR", cls.DEFAULT_OUT_DIR)

    @classmethod
    def get_log_level(cls) -> int:
        """Get logging level from environment variable, INFO when unset or unknown"""
        name = os.environ.get("TRIKECTL_LOG_LEVEL", cls.DEFAULT_LOG_LEVEL).upper()
        level = logging.getLevelName(name)
        return level if isinstance(level, int) else logging.INFO

    @classmethod
    def get_log_file(cls) -> Optional[str]:
        """Get optional log file path"""
        return os.environ.get("TRIKECTL_LOG_FILE") or None

    @classmethod
    def use_color(cls) -> bool:
        """Colour is on for a terminal unless TRIKECTL_NO_COLOR is set to anything"""
        if os.environ.get("TRIKECTL_NO_COLOR"):
            return False
        return sys.stderr.isatty()

    @classmethod
    def get_max_workers(cls) -> int:
        """Get worker count for concurrent scans and batches"""
        value = os.environ.get("TRIKECTL_MAX_WORKERS")
        if value is None:
            return cls.MAX_WORKERS
        try:
            workers = int(value)
        except ValueError:
            logger.warning(f"Ignoring TRIKECTL_MAX_WORKERS={value!r}; using {cls.MAX_WORKERS}")
            return cls.MAX_WORKERS
        return max(1, workers)


def configure_logging(verbose: bool = False) -> logging.Logger:
    """
    Configure root logging for a CLI run

    Args:
        verbose: Force DEBUG level

    Returns:
        The root logger
    """
    level = logging.DEBUG if verbose else AppConfig.get_log_level()
    return setup_logger(None, AppConfig.get_log_file(), level, AppConfig.use_color())
