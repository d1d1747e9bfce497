import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import util  # noqa: E402

from snreorder import analyze  # noqa: E402


@pytest.fixture
def demo9():
    return util.demo9()


@pytest.fixture
def demo9_analysis(demo9):
    """demo9 analyzed without merging: supernodes {0,1}, {2,3}, {4..8}."""
    return analyze(demo9, cap=0.0)
