"""
Console-plus-log message helpers: every user-facing message is also a structured log record.
"""
from puzzleforge.utils.logging import contextual_log
from puzzleforge.utils.rich_console import rich_error, rich_info, rich_warning


def info(message, extra=None, command=None):
    rich_info(message)
    context = dict(extra or {})
    if command:
        context["command"] = command
    contextual_log('info', str(message), extra=context)


def warning(message, extra=None, command=None):
    rich_warning(message)
    context = dict(extra or {})
    if command:
        context["command"] = command
    contextual_log('warning', str(message), extra=context)


def error(message, extra=None, command=None, suggestion=None):
    rich_error(message, suggestion)
    context = dict(extra or {})
    if command:
        context["command"] = command
    contextual_log('error', str(message), extra=context)
