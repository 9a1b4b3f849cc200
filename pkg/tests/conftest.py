"""Shared fixtures.

Heavy objects (generator tabulations, analyses of fixed grids) are built once
per session; everything they expose is immutable, so sharing is safe.
"""

import numpy as np
import pytest

from shearsparse.cartoon import standard_scene, rasterize
from shearsparse.generators import GeneratorSpec, build_generators
from shearsparse.system import ShearletSystem
from shearsparse.transform import analyze


@pytest.fixture(scope="session")
def gens():
    """Default generator set (6 vanishing moments)."""
    return build_generators(GeneratorSpec.daubechies())


@pytest.fixture(scope="session")
def gens_short():
    """Short-support generator set (2 vanishing moments, width 3)."""
    return build_generators(GeneratorSpec.daubechies(vanishing_moments=2))


@pytest.fixture(scope="session")
def sys32_j2(gens):
    return ShearletSystem(generators=gens, c=1.0, J=2)


@pytest.fixture(scope="session")
def sys32_j4(gens):
    return ShearletSystem(generators=gens, c=1.0, J=4)


@pytest.fixture(scope="session")
def disk_grid_64():
    return rasterize(standard_scene("disk"), 64, oversample=4)


@pytest.fixture(scope="session")
def disk_coeffs_64(disk_grid_64, sys32_j2):
    return analyze(disk_grid_64, sys32_j2)
