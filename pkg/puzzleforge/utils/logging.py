"""
Structured logging helpers. Library modules log through contextual_log and never configure handlers;
cli_logging_setup.configure_logging does that once per process.
"""
import logging
import uuid
from typing import Any, Dict, Optional

LOGGER_NAME = "puzzleforge"


def get_logger() -> logging.Logger:
    return logging.getLogger(LOGGER_NAME)


def contextual_log(level: str, message: str, extra: Optional[Dict[str, Any]] = None, **kwargs) -> None:
    """
    Log a message with structured fields (command, operation, params, status, duration_ms, ...).

    level is a logging level name; unknown names log at INFO. exc_info in kwargs goes to the
    logger, never into the record. Each record gets an operation_id unless one is supplied.
    """
    exc_info = kwargs.pop('exc_info', False)
    fields = dict(extra or {}, **kwargs)
    fields.setdefault('operation_id', str(uuid.uuid4()))
    numeric_level = getattr(logging, level.upper(), logging.INFO)
    get_logger().log(numeric_level, message, extra=fields, exc_info=exc_info)


def build_context(command: Optional[str] = None, batch: Any = None, **kwargs) -> Dict[str, Any]:
    """Shared fields for one command run: the command name, an optional worker batch, and extras."""
    named = {'command': command, 'batch': batch}
    return {**{k: v for k, v in named.items() if v is not None}, **kwargs}
