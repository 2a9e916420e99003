import numpy as np
import pytest
from hypothesis import strategies as st

from efresnel.core import ABCDMatrix


def unimodular(theta, squeeze, shear):
    """Rotation x squeeze x shear; always unimodular up to rounding."""
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    sq = np.diag([squeeze, 1.0 / squeeze])
    sh = np.array([[1.0, shear], [0.0, 1.0]])
    return ABCDMatrix.from_array(rot @ sq @ sh)


matrices = st.builds(
    unimodular,
    st.floats(-np.pi, np.pi),
    st.floats(0.3, 3.0),
    st.floats(-2.0, 2.0),
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
