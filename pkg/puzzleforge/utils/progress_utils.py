"""
Progress bar and spinner utilities for long sweeps. Both stay silent when the console is not a
terminal, so batch runs and tests produce no progress noise.
"""
from contextlib import contextmanager
from typing import Iterable, Iterator, Optional, TypeVar

from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

from puzzleforge.utils.rich_console import console

T = TypeVar("T")


def _interactive() -> bool:
    return console.is_terminal and not console.quiet


@contextmanager
def spinner(message: str):
    if not _interactive():
        yield
        return
    with console.status(f"⏳ {message}"):
        yield
    console.print("✔️ Done.")


def progress_bar(iterable: Iterable[T], desc: str = "Progress", total: Optional[int] = None) -> Iterator[T]:
    if total is None and hasattr(iterable, '__len__'):
        total = len(iterable)
    if not _interactive():
        yield from iterable
        return
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    ) as progress:
        task = progress.add_task(desc, total=total)
        for index, element in enumerate(iterable, 1):
            progress.update(task, completed=index)
            yield element
