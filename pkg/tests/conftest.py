# tests/conftest.py
import os
import sys

import pytest

# Coarser default grid than production; every oracle below still holds at this size
os.environ.setdefault("OSCITOM_POINTS", "512")
os.environ.setdefault("OSCITOM_JOBS", "2")

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

POINTS = int(os.environ["OSCITOM_POINTS"])


@pytest.fixture
def points():
    return POINTS
