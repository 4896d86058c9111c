"""Exit-code policy shared by every command.

0 success, 1 computation error, 2 I/O or parse error, 130 interrupted.
"""
import sys
from contextlib import contextmanager
from typing import Iterator

from rich.console import Console

from src.converter.codecs import CodecError
from src.logging.logging import get_logger

console = Console(stderr=True)
logger = get_logger(__name__)

EXIT_COMPUTATION = 1
EXIT_IO = 2
EXIT_INTERRUPTED = 130


@contextmanager
def exit_on_error(command: str) -> Iterator[None]:
    try:
        yield
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted by user[/yellow]")
        sys.exit(EXIT_INTERRUPTED)
    except CodecError as e:
        logger.error("Unreadable input", command=command, path=e.path, offset=e.offset)
        console.print(f"[red]Error:[/red] {e}")
        sys.exit(EXIT_IO)
    except OSError as e:
        logger.error("I/O failure", command=command, error=str(e))
        console.print(f"[red]Error:[/red] {e}")
        sys.exit(EXIT_IO)
    except ValueError as e:
        logger.error("Computation failed", command=command, error=str(e))
        console.print(f"[red]Error:[/red] {e}")
        sys.exit(EXIT_COMPUTATION)
