"""
Logging configuration for the zerod_rom package
"""
import logging
import os
import sys
from typing import Optional, TextIO

DEFAULT_LEVEL = "WARNING"


def resolve_level(level: Optional[str] = None) -> int:
    """
    Numeric level for a level name, falling back to ZEROD_LOG_LEVEL and then WARNING

    Raises:
        ValueError: If the name is not a logging level
    """
    name = (level or os.getenv("ZEROD_LOG_LEVEL") or DEFAULT_LEVEL).upper()
    value = logging.getLevelName(name)
    if not isinstance(value, int):
        raise ValueError(f"Unknown log level '{name}'")
    return value


def setup_logging(
    level: Optional[str] = None,
    format_string: Optional[str] = None,
    include_timestamp: bool = True,
    stream: Optional[TextIO] = None
) -> None:
    """
    Setup logging configuration for the solver and its command-line tools

    Log records go to stderr by default so that command output on stdout
    (summaries, progress lines) stays clean. Calling this again replaces the
    previous handlers.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL). Falls back to
            the ZEROD_LOG_LEVEL environment variable, then WARNING.
        format_string: Custom format string for log messages
        include_timestamp: Whether to include timestamp in log messages
        stream: Stream for the handler (default sys.stderr)
    """
    numeric = resolve_level(level)

    if format_string is None:
        if include_timestamp:
            format_string = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        else:
            format_string = "%(name)s - %(levelname)s - %(message)s"

    logging.basicConfig(
        level=numeric,
        format=format_string,
        handlers=[logging.StreamHandler(stream or sys.stderr)],
        force=True,
    )

    # Set the level for the zerod_rom logger
    logging.getLogger("zerod_rom").setLevel(numeric)


def get_logger(name: str) -> logging.Logger:
    """Logger below the zerod_rom namespace"""
    return logging.getLogger(f"zerod_rom.{name}")
