"""pytest wiring: configure Django the same way augsense/manage.py does."""

import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent / "augsense"))
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "settings.settings")

import django  # noqa: E402

django.setup()
