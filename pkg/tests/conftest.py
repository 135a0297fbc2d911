import numpy as np
import pytest

from hoieval.geometry import CameraIntrinsics, RigidPose, random_rotation


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def K():
    return CameraIntrinsics(600.0, 600.0, 320.0, 240.0)


def random_pose(rng, depth=(1.5, 3.0)):
    """Rigid pose with the origin placed in front of the camera."""
    t = np.array([rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(*depth)])
    return RigidPose(random_rotation(rng), t)


# (number, passed, title, detail) tuples appended by test_acceptance.py.
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, title, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}")
