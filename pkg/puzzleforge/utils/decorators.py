"""
Command error handling: log the failure as the command's end record, show it, re-raise.
"""
import functools
import time

from puzzleforge.errors import NumericalError, ResourceLimit
from puzzleforge.constants import NUMERICAL_FAILURE, RESOURCE_EXHAUSTED
from puzzleforge.utils.logging import build_context, contextual_log
from puzzleforge.utils.rich_console import rich_error, rich_warning


def command_error_handler(command_name):
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            context = build_context(command_name)
            started = time.perf_counter()
            try:
                return func(*args, **kwargs)
            except KeyboardInterrupt:
                contextual_log('warning', f"🧩 [{command_name}] Interrupted.", operation="command_end", status="interrupted", extra=context)
                rich_warning(f"Interrupted {command_name}.")
                raise
            except Exception as e:
                elapsed = round((time.perf_counter() - started) * 1000.0, 3)
                contextual_log('error', f"🧩 [{command_name}] Exception: {e}", exc_info=True, operation="command_end", error_type=type(e).__name__, status="error", duration_ms=elapsed, extra=context)
                if isinstance(e, NumericalError):
                    rich_error(NUMERICAL_FAILURE.format(command=command_name, error=e))
                elif isinstance(e, ResourceLimit):
                    rich_error(RESOURCE_EXHAUSTED.format(command=command_name, error=e), "raise the budget or shrink the window")
                else:
                    rich_error(f"[{command_name}] {type(e).__name__}: {e}")
                raise
        return wrapper
    return decorator
