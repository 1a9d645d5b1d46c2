# cli/dispatch.py
"""
Process entry point: run a management command and return its exit code.

Usage errors exit 2, FpsErrors exit with their own code (see
fps_lab.errors), anything unexpected exits 1.
"""

import logging
import os
import sys
from typing import Optional, Sequence

logger = logging.getLogger(__name__)


def _exit_code(exc: SystemExit) -> int:
    if exc.code is None:
        return 0
    if isinstance(exc.code, int):
        return exc.code
    sys.stderr.write(f"{exc.code}\n")
    return 1


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "fps_lab.settings")
    import django
    from django.core.management import execute_from_command_line, get_commands

    argv = list(argv if argv is not None else sys.argv)
    django.setup()
    if len(argv) > 1 and not argv[1].startswith("-") and argv[1] not in get_commands():
        sys.stderr.write(f"config-error: unknown command {argv[1]!r}; run '{os.path.basename(argv[0])} help'\n")
        return 2
    try:
        execute_from_command_line(argv)
    except SystemExit as exc:
        return _exit_code(exc)
    except Exception:
        logger.exception("unexpected failure")
        return 1
    return 0
