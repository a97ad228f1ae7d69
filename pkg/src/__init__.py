"""
Core package for maniplex-forge.
"""
import os

# every Logger() in the package shares this service, outside Lambda too
os.environ.setdefault("POWERTOOLS_SERVICE_NAME", "maniplex_forge")

# the shared logger is created first so it owns the stderr handler
from src.utils import logging as _logging  # noqa: E402,F401
