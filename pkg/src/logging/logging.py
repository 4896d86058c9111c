"""Structured logging configuration for sphere-bev.

This module configures structlog for structured logging with JSON output by default
and pretty console output for local development. Logs are written to stderr so that
command output on stdout stays machine-readable.
"""

import logging
import sys
from typing import Any

import structlog

from src.config.config import DEFAULT_IS_LOCAL, LOG_FORMAT_JSON, LOG_LEVEL

TIMESTAMP_FORMAT_ISO = "iso"

_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}


def _create_structlog_processor_chain() -> list[Any]:
    """Create the structlog processor chain.

    Returns:
        List of structlog processors
    """
    shared_processors: list[Any] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.stdlib.PositionalArgumentsFormatter(),
        structlog.processors.TimeStamper(fmt=TIMESTAMP_FORMAT_ISO, utc=True),
        structlog.processors.CallsiteParameterAdder(
            {structlog.processors.CallsiteParameter.LINENO}
        ),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.UnicodeDecoder(),
        structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
    ]

    return shared_processors


def resolve_log_level(level: str | int | None) -> int:
    """Map a level name (or an already numeric level) to a logging constant.

    Raises:
        ValueError: If the level name is unknown
    """
    if level is None:
        level = LOG_LEVEL
    if isinstance(level, int):
        return level
    try:
        return _LEVELS[level.upper()]
    except KeyError:
        raise ValueError(f"Unknown log level: {level!r} (expected one of {', '.join(_LEVELS)})")


def should_use_pretty_format(is_local: bool, log_format_json: bool | None) -> bool:
    """Determine format based on DEFAULT_IS_LOCAL and SPHEREBEV_LOG_FORMAT_JSON override

    Options:
    - DEFAULT_IS_LOCAL=true: Use pretty format by default
    - DEFAULT_IS_LOCAL=false: Use JSON format by default
    - SPHEREBEV_LOG_FORMAT_JSON: Override the default behavior
    Returns:
        bool: True if pretty format should be used, False for JSON format
    """
    return not log_format_json if log_format_json is not None else is_local


def configure_structlog(level: str | int | None = None, json_format: bool | None = None) -> None:
    """Configure structlog and the stdlib root logger.

    Sets up structured logging with:
    - JSON output by default, pretty console output locally
    - Context variables integration
    - Standard library logging integration through ProcessorFormatter

    Args:
        level: Level name or number; defaults to SPHEREBEV_LOG_LEVEL
        json_format: Force JSON (True) or pretty (False); defaults to SPHEREBEV_LOG_FORMAT_JSON
    """
    log_level = resolve_log_level(level)
    if json_format is None and LOG_FORMAT_JSON is not None:
        json_format = LOG_FORMAT_JSON.lower() == "true"
    use_pretty_format = should_use_pretty_format(DEFAULT_IS_LOCAL, json_format)

    structlog.configure(
        processors=_create_structlog_processor_chain(),
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=False,
    )

    renderer = (
        structlog.dev.ConsoleRenderer(colors=True)
        if use_pretty_format
        else structlog.processors.JSONRenderer()
    )

    formatter = structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=[
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt=TIMESTAMP_FORMAT_ISO),
        ],
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            renderer,
        ],
    )

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)

    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    root_logger.handlers = [handler]
    root_logger.setLevel(log_level)


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    """Get a structured logger instance.

    Args:
        name: Logger name. If None, uses the calling module's name.

    Returns:
        A configured structlog BoundLogger instance.
    """
    return structlog.get_logger(name)
