from pathlib import Path
from decouple import config, Csv
import sys

sys.path.append(str(Path(__file__).resolve().parent.parent))

from sensitivity.constants import (  # noqa: E402
    DEFAULT_METRIC,
    DEFAULT_RELIABILITY_MODE,
    DEFAULT_SEED,
    DEFAULT_SUBSAMPLE_SIZE,
)

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config("SECRET_KEY", default="augsense-local-only")
DEBUG = config("DEBUG", default=False, cast=bool)
ALLOWED_HOSTS = config("ALLOWED_HOSTS", default="", cast=Csv())

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    # DRF
    "rest_framework",
    # Apps
    "sensitivity",
]

# --- DATABASES ---
# Пайплайн хранит результаты в JSON lines; база нужна только тестовому раннеру Django
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

LANGUAGE_CODE = "en-us"
TIME_ZONE = config("TIME_ZONE", default="UTC")
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# --- PIPELINE ---
AUGSENSE_DATA_DIR = Path(config("AUGSENSE_DATA_DIR", default=str(BASE_DIR / "data")))
AUGSENSE_OUTPUT_DIR = Path(
    config("AUGSENSE_OUTPUT_DIR", default=str(BASE_DIR / "output"))
)
AUGSENSE_WORKERS = config("AUGSENSE_WORKERS", default=1, cast=int)
AUGSENSE_SEED = config("AUGSENSE_SEED", default=DEFAULT_SEED, cast=int)
AUGSENSE_SUBSAMPLE = config(
    "AUGSENSE_SUBSAMPLE", default=DEFAULT_SUBSAMPLE_SIZE, cast=int
)
AUGSENSE_METRIC = config("AUGSENSE_METRIC", default=DEFAULT_METRIC)
AUGSENSE_RELIABILITY_MODE = config(
    "AUGSENSE_RELIABILITY_MODE", default=DEFAULT_RELIABILITY_MODE
)
AUGSENSE_CLASSIFIERS = config(
    "AUGSENSE_CLASSIFIERS", default="linear-softmax,mlp", cast=Csv()
)

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": config(
                "LOG_FORMAT_VERBOSE",
                default="{levelname} {asctime} {module} {process:d} {message}",
            ),
            "style": "{",
        },
        "simple": {
            "format": config("LOG_FORMAT_SIMPLE", default="{levelname} {message}"),
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "level": config("LOG_CONSOLE_LEVEL", default="INFO"),
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
        "file": {
            "level": config("LOG_FILE_LEVEL", default="WARNING"),
            "class": "logging.FileHandler",
            "filename": config("LOG_FILE", default="augsense.log"),
            "formatter": "verbose",
            "delay": True,
        },
    },
    "root": {
        "handlers": ["console"],
        "level": config("LOG_ROOT_LEVEL", default="WARNING"),
    },
    "loggers": {
        "sensitivity": {
            "handlers": ["console", "file"],
            "level": config("LOG_SENSITIVITY_LEVEL", default="INFO"),
            "propagate": False,
        },
    },
}
