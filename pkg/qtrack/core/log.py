"""Tagged console logging on a shared rich console."""

from rich.console import Console
from rich.markup import escape

from .config import get_settings

_console: Console | None = None


def get_console() -> Console:
    """Get or create the shared stderr console."""
    global _console
    if _console is None:
        _console = Console(stderr=True, quiet=get_settings().quiet)
    return _console


def log(tag: str, message: str) -> None:
    """Print a dimmed, tagged status line."""
    get_console().print(f"[dim]{escape(f'[{tag}]')} {escape(message)}[/dim]")


def warn(tag: str, message: str) -> None:
    """Print a tagged warning line."""
    get_console().print(f"[yellow]{escape(f'[{tag}]')} {escape(message)}[/yellow]")
