"""
Shared fixtures: the bundled surfaces and the genus-2 system of quads.
"""

from pathlib import Path

import pytest

from src.surface import build_surface, load_quad_system, load_surface, parse_surface

FIXTURES = Path(__file__).parent.parent / "fixtures"

PANTS_TEXT = (
    "edge 1 v v\nedge 2 v v\nrotation v 1 -1 2 -2\n"
    "perforated 1\nperforated -1\nperforated -2\n"
)


@pytest.fixture(scope="session")
def genus2():
    """Genus-2 surface with one vertex and one face."""
    return load_surface(FIXTURES / "genus2.srf")


@pytest.fixture(scope="session")
def quads():
    """System of quads of the genus-2 surface."""
    return load_quad_system(FIXTURES / "genus2.quads")


@pytest.fixture(scope="session")
def torus():
    return load_surface(FIXTURES / "torus.srf")


@pytest.fixture(scope="session")
def cylinder():
    return load_surface(FIXTURES / "cylinder.srf")


@pytest.fixture(scope="session")
def pants():
    """Sphere with three perforated faces."""
    return build_surface(parse_surface(PANTS_TEXT))
