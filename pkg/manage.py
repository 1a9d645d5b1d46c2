#!/usr/bin/env python
"""fps-lab command line: python manage.py <command> [options]."""
import os
import sys


def main():
    """Run a command and exit with its code."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'fps_lab.settings')
    try:
        from cli.dispatch import dispatch
        import django  # noqa: F401
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    sys.exit(dispatch(sys.argv))


if __name__ == '__main__':
    main()
