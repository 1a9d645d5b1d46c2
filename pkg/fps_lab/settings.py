"""
Django settings for the fps_lab project.

The project has no database and no web surface. Django is used for app
packaging, settings, logging configuration, management commands (the
command-line surface) and the test runner.

Environment variables (a local .env file is loaded first):
  FPS_RUNS_DIR        default output root for run directories
  FPS_LOG_LEVEL       level for the project loggers (default INFO)
  FPS_DEFAULT_SEED    seed used when a run config omits one (default 0)
  FPS_PROGRESS        1 to show progress bars during real-time runs
  FPS_RUN_SLOW_TESTS  1 to include tests tagged "slow"
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from a local .env file if python-dotenv is installed.
try:
    from dotenv import load_dotenv

    load_dotenv(str(BASE_DIR / '.env'))
except ImportError:
    # settings then rely on real environment variables
    pass


def _env_flag(name: str, default: str = "0") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


# Not used for signing anything; Django only requires the setting to exist.
SECRET_KEY = os.getenv("SECRET_KEY", "fps-lab-local")

DEBUG = _env_flag("DEBUG")

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'series.apps.SeriesConfig',
    'alignment.apps.AlignmentConfig',
    'seqmodel.apps.SeqmodelConfig',
    'fps.apps.FpsConfig',
    'metrics.apps.MetricsConfig',
    'harness.apps.HarnessConfig',
    'cli.apps.CliConfig',
]

# No persistence layer: datasets, checkpoints and reports are files.
DATABASES = {}

USE_TZ = True
TIME_ZONE = 'UTC'

# ================================
# FPS configuration
# ================================
FPS_RUNS_DIR = Path(os.getenv("FPS_RUNS_DIR", str(BASE_DIR / "runs")))
FPS_LOG_LEVEL = os.getenv("FPS_LOG_LEVEL", "INFO").upper()
FPS_DEFAULT_SEED = int(os.getenv("FPS_DEFAULT_SEED", "0"))
FPS_PROGRESS = _env_flag("FPS_PROGRESS")
FPS_RUN_SLOW_TESTS = _env_flag("FPS_RUN_SLOW_TESTS")

# ================================
# Logging
# ================================
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        name: {"handlers": ["console"], "level": FPS_LOG_LEVEL, "propagate": False}
        for name in ("fps_lab", "series", "alignment", "seqmodel", "fps", "metrics", "harness", "cli")
    },
}

TEST_RUNNER = "fps_lab.test_runner.FpsTestRunner"
