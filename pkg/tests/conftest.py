from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from beamsteer.geometry import CameraModel, Intrinsics
from beamsteer.trifocal import TrifocalRig

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

REF_K = Intrinsics(900.0, 900.0, 320.0, 240.0)
T_LEFT = np.array([-40.0, 35.0, -20.0])
T_RIGHT = np.array([40.0, 35.0, -20.0])


@pytest.fixture
def cams():
    """Left and right cameras of the reference rig (identity rotations,
    pivot at the origin)."""
    return CameraModel(REF_K, np.eye(3), T_LEFT), CameraModel(REF_K, np.eye(3), T_RIGHT)


@pytest.fixture
def rig(cams):
    return TrifocalRig.from_cameras(*cams)


# ------------------------------------------------------------ acceptance report

CRITERIA_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[CRITERIA_KEY] = {}


@pytest.fixture
def criterion(request):
    """``criterion(n, title, ok, detail)`` records the verdict of an
    acceptance criterion; the lines are printed after the run."""
    lines = request.config.stash[CRITERIA_KEY]

    def record(n: int, title: str, ok: bool, detail: str = ""):
        lines[n] = f"{'PASS' if ok else 'FAIL'} criterion {n:2d} {title}" + (f": {detail}" if detail else "")
        assert ok, lines[n]

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(CRITERIA_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
