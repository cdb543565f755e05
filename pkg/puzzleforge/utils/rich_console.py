"""
Themed rich console helpers for puzzleforge.
"""
from typing import Optional

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.text import Text
from rich.theme import Theme

from puzzleforge.constants import FORGE_ICON

FORGE_THEME = Theme({
    "info": "bold cyan",
    "warning": "bold magenta",
    "error": "bold red",
    "success": "bold green3",
    "banner": "bold yellow3",
    "table": "white",
})

console = Console(theme=FORGE_THEME)


def set_quiet(quiet: bool = True) -> None:
    """Silence or restore console output (tests and --quiet runs)."""
    console.quiet = quiet


def rich_info(message: str) -> None:
    console.print(f"{FORGE_ICON} [info]{message}[/info]")


def rich_warning(message: str) -> None:
    console.print(f"{FORGE_ICON} [warning]{message}[/warning]")


def rich_error(message: str, suggestion: Optional[str] = None) -> None:
    """
    Print an error panel with an optional hint line.
    Args:
        message (str): The error message to display.
        suggestion (str, optional): A hint or example to display under the message.
    """
    error_text = f"{FORGE_ICON} {message}"
    if suggestion:
        error_text += f"\nHint: {suggestion}"
    console.print(Panel(Text(error_text, style="bold red"), title="[bold red]Error[/]", border_style="red"))


def rich_success(message: str) -> None:
    console.print(f"{FORGE_ICON} [success]{message}[/success]")


def rich_panel(message: str, title: Optional[str] = None, style: str = "banner") -> None:
    console.print(Panel(message, title=title, style=style, box=box.ROUNDED))
