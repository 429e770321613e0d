import math

import pytest
from hypothesis import strategies as st

from rfcascade import AtomDriveParams

ROOT2 = math.sqrt(2.0)

# (omega, delta) of the reference curves, gamma = 1
REFERENCE_PAIRS = [
    (ROOT2, 0.0), (ROOT2 / 2, 0.0), (2 * ROOT2, 0.0),
    (2.2, 0.0), (4.4, 0.0),
    (2.8, -2.2), (4.4, -3.4),
]


@st.composite
def driven_params(draw, min_omega=0.05, max_omega=8.0, max_delta=5.0):
    gamma = draw(st.floats(0.2, 5.0))
    omega = draw(st.floats(min_omega, max_omega)) * gamma
    delta = draw(st.floats(-max_delta, max_delta)) * gamma
    return AtomDriveParams(gamma, omega, delta)


@pytest.fixture
def optimal():
    return AtomDriveParams(1.0, ROOT2, 0.0)
