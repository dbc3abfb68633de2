import math

import numpy as np
import pytest

import washboard as wb

GROUND_STATE_HALF = np.array([0.0, 0.0, -math.pi / 2.0])


@pytest.fixture(scope="session")
def half_cell():
    return wb.builtin_cell("1/2")


@pytest.fixture(scope="session")
def third_cell():
    return wb.builtin_cell("1/3")


@pytest.fixture(scope="session")
def junction_cell():
    return wb.builtin_cell("single_junction")


@pytest.fixture(scope="session")
def half_potential(half_cell):
    return wb.build_potential(half_cell)


@pytest.fixture(scope="session")
def third_potential(third_cell):
    return wb.build_potential(third_cell)


@pytest.fixture(scope="session")
def junction_potential(junction_cell):
    return wb.build_potential(junction_cell)
