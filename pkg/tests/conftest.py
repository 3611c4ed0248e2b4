import pytest

from lozenge_cooling.exact import enumerate_space
from lozenge_cooling.lattice import make_box_domain, make_hexagon_domain, make_triangle_domain


@pytest.fixture(scope="session")
def hex1():
    return make_hexagon_domain(1)


@pytest.fixture(scope="session")
def hex2():
    return make_hexagon_domain(2)


@pytest.fixture(scope="session")
def box2():
    return make_box_domain(2, 2, 2)


@pytest.fixture(scope="session")
def tri4():
    return make_triangle_domain(4)


@pytest.fixture(scope="session")
def hex2_space(hex2):
    return enumerate_space(hex2)


@pytest.fixture(scope="session")
def box2_space(box2):
    return enumerate_space(box2)


@pytest.fixture(scope="session")
def tri4_space(tri4):
    return enumerate_space(tri4)
