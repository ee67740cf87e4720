import math

import numpy as np
import pytest

from circlerds import NuMeasure, Projective, Rotation, SineDiffeo
from circlerds.maps import rotation_matrix

LOG4 = 2.0 * math.log(2.0)


def sl2_pair() -> NuMeasure:
    a = np.diag([2.0, 0.5])
    r = rotation_matrix(math.pi / 4)
    b = r @ a @ r.T
    return NuMeasure.uniform(Projective.from_matrix(a), Projective.from_matrix(b))


def sine_pair() -> NuMeasure:
    return NuMeasure.uniform(SineDiffeo(0.17, 0.5), SineDiffeo(0.61, 0.5))


def diag_map() -> NuMeasure:
    return NuMeasure.dirac(Projective.from_matrix(np.diag([2.0, 0.5])))


@pytest.fixture
def sl2():
    return sl2_pair()


@pytest.fixture
def sine():
    return sine_pair()


@pytest.fixture
def single():
    return diag_map()


@pytest.fixture
def rotation():
    return NuMeasure.dirac(Rotation(math.sqrt(2.0) - 1.0))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
