import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional


def setup_logging(log_level: str = "WARNING", log_dir: Optional[str] = None) -> logging.Logger:
    """Setup logging configuration for the application.

    Records go to stderr so that stdout carries only command results. With
    `log_dir` set, a daily log file is written there as well.
    """
    handlers: list = [logging.StreamHandler(sys.stderr)]
    if log_dir:
        directory = Path(log_dir)
        directory.mkdir(parents=True, exist_ok=True)
        daily_filename = f"rcom_{datetime.now():%Y%m%d}.log"
        handlers.append(logging.FileHandler(directory / daily_filename, encoding="utf-8"))

    logging.basicConfig(
        level=getattr(logging, log_level.upper(), logging.WARNING),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )

    return logging.getLogger(__name__)


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance with the specified name."""
    return logging.getLogger(name)
