import math

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from pm4dof.geometry import GeometricParams, Pose

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# pose sampling box used throughout the property tests
X_RANGE = (-0.1, 0.1)
Z_RANGE = (0.55, 0.80)
ANGLE_RANGE = (-math.radians(20.0), math.radians(20.0))
BOX_LO = np.array([X_RANGE[0], Z_RANGE[0], ANGLE_RANGE[0], ANGLE_RANGE[0]])
BOX_HI = np.array([X_RANGE[1], Z_RANGE[1], ANGLE_RANGE[1], ANGLE_RANGE[1]])


def sample_box(rng, n):
    return rng.uniform(BOX_LO, BOX_HI, size=(n, 4))


poses = st.builds(
    Pose,
    st.floats(*X_RANGE),
    st.floats(*Z_RANGE),
    st.floats(*ANGLE_RANGE),
    st.floats(*ANGLE_RANGE),
)


@pytest.fixture
def params():
    return GeometricParams()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed at the end of the pytest run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
