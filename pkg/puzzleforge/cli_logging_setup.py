"""
Logging setup for the puzzleforge CLI.

- Structured JSON logging by default (plain text optional)
- Log rotation: 5MB per file, 5 backups
- Level and format from PUZZLEFORGE_LOG_LEVEL / PUZZLEFORGE_LOG_FORMAT, file from PUZZLEFORGE_LOG_FILE
- Every record carries command, operation, operation_id, params, status and timing context
"""
import logging
import os
import socket
import uuid
from logging.handlers import RotatingFileHandler
from typing import Optional

from pythonjsonlogger import jsonlogger

from puzzleforge import __version__
from puzzleforge.utils.logging import LOGGER_NAME

LOG_FILE = 'puzzleforge.log'
HOSTNAME = socket.gethostname()
CONTEXT_FIELDS = ('command', 'batch', 'operation', 'params', 'status', 'error_type', 'duration_ms', 'output_file')


class PuzzleforgeJsonFormatter(jsonlogger.JsonFormatter):
    def add_fields(self, log_record, record, message_dict):
        super().add_fields(log_record, record, message_dict)
        log_record['asctime'] = getattr(record, 'asctime', self.formatTime(record, self.datefmt))
        log_record['levelname'] = record.levelname
        log_record['name'] = record.name
        for key in CONTEXT_FIELDS:
            log_record[key] = message_dict.get(key) or getattr(record, key, None)
        log_record['function'] = getattr(record, 'function', record.funcName)
        log_record['operation_id'] = message_dict.get('operation_id') or getattr(record, 'operation_id', str(uuid.uuid4()))
        log_record['cli_version'] = __version__
        log_record['hostname'] = HOSTNAME
        log_record['pid'] = record.process


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None, log_file: Optional[str] = None) -> logging.Logger:
    """
    Attach one rotating file handler to the puzzleforge logger. Calling it again replaces the
    handler instead of stacking a second one.
    """
    level = (level or os.environ.get('PUZZLEFORGE_LOG_LEVEL', 'INFO')).upper()
    fmt = (fmt or os.environ.get('PUZZLEFORGE_LOG_FORMAT', 'json')).lower()
    log_file = log_file or os.environ.get('PUZZLEFORGE_LOG_FILE', LOG_FILE)

    handler = RotatingFileHandler(log_file, maxBytes=5 * 1024 * 1024, backupCount=5, encoding='utf-8')
    if fmt == 'json':
        handler.setFormatter(PuzzleforgeJsonFormatter('%(asctime)s %(levelname)s %(name)s %(message)s'))
    else:
        handler.setFormatter(logging.Formatter('%(asctime)s [%(levelname)s] %(message)s'))

    logger = logging.getLogger(LOGGER_NAME)
    for old in [h for h in logger.handlers if getattr(h, '_puzzleforge', False)]:
        logger.removeHandler(old)
        old.close()
    handler._puzzleforge = True
    logger.addHandler(handler)
    logger.setLevel(getattr(logging, level, logging.INFO))
    logger.propagate = False
    return logger
