from __future__ import annotations

import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from maxpareto.model import MaxParetoInstance  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

CRITERIA: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def box():
    """Unit square, identity payoffs, c = (1, 1)."""
    return MaxParetoInstance(
        np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=object), [1, 1, 0, 0], np.eye(2, dtype=int).astype(object), [1, 1]
    )
