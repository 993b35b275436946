"""
Shared sample data for the test suite
"""

import numpy as np
import pytest

from afmflow.experiments import toy_material
from afmflow.fem_core import FESpace
from afmflow.fields import SublatticePair, constant_pair, random_pair
from afmflow.mesh import generate_box_mesh
from afmflow.models.material import LLGParams, MaterialParams


def create_sample_space(n: int = 2) -> FESpace:
    """Unit cube with n cells per direction"""
    return FESpace(generate_box_mesh(n, n, n))


def create_sample_material() -> MaterialParams:
    """Coefficients with every energy contribution switched on"""
    D = 0.3 * (np.outer([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]) - np.outer([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]))
    return MaterialParams(
        a11=1.0, a22=0.8, a12=0.2, a0=-2.0,
        q1=1.5, q2=1.0,
        axis1=[0.0, 0.0, 1.0], axis2=[0.0, 0.0, 1.0],
        dmi1=D, dmi2=D,
        h_ext=[0.1, 0.0, 0.05],
        eta_s1=1.0, eta_s2=0.8,
    )


def create_sample_pair(space: FESpace, seed: int = 7) -> SublatticePair:
    """Unit-length pair close to the antiparallel state along e3"""
    base = SublatticePair(space, np.tile([0.0, 0.0, 1.0], (space.n, 1)),
                          np.tile([0.0, 0.0, -1.0], (space.n, 1)))
    return random_pair(space, seed, amplitude=0.4, base=base)


@pytest.fixture
def space():
    return create_sample_space(2)


@pytest.fixture
def toy():
    return toy_material()


@pytest.fixture
def material():
    return create_sample_material()


@pytest.fixture
def pair(space):
    return create_sample_pair(space)


@pytest.fixture
def toy_initial(space):
    return constant_pair(space, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))


@pytest.fixture
def unit_llg():
    return LLGParams(1.0, 1.0, 1.0, 1.0)
