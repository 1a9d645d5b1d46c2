"""pytest wiring: configure Django like manage.py and honour the "slow" tag like FpsTestRunner."""
import os

import django
import pytest

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "fps_lab.settings")
django.setup()


def pytest_collection_modifyitems(config, items):
    from django.conf import settings

    if settings.FPS_RUN_SLOW_TESTS:
        return
    skip_slow = pytest.mark.skip(reason="tagged slow; set FPS_RUN_SLOW_TESTS=1")
    for item in items:
        tags = set(getattr(item.cls, "tags", ())) | set(getattr(item.obj, "tags", ()))
        if "slow" in tags:
            item.add_marker(skip_slow)
