"""Overnight ECG/SpO2 sleep-apnea screening toolkit."""

from apneakit._core import *  # noqa: F401,F403
from apneakit._core import __version__  # noqa: F401
