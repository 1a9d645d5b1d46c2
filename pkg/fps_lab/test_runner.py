from django.conf import settings
from django.test.runner import DiscoverRunner


class FpsTestRunner(DiscoverRunner):
    """Skips end-to-end tests tagged "slow" unless FPS_RUN_SLOW_TESTS is set."""

    def __init__(self, *args, exclude_tags=None, **kwargs):
        exclude_tags = set(exclude_tags or ())
        if not settings.FPS_RUN_SLOW_TESTS:
            exclude_tags.add("slow")
        super().__init__(*args, exclude_tags=exclude_tags, **kwargs)
