import warnings

import numpy as np
import pytest
from hypothesis import settings

from pformem.complex import generate_mesh
from pformem.dynamics import PhaseSpace
from pformem.kodaira import KodairaAmbiguityWarning
from pformem.operators import assemble
from pformem.quantization import complex_structure

settings.register_profile("pformem", deadline=None, max_examples=50)
settings.load_profile("pformem")


def make_space(spec="torus(4,4)", p=1, phi=None, coefficient=None):
    mesh = generate_mesh(spec)
    if phi is not None:
        mesh = type(mesh)(mesh.complex, mesh.metric.with_phi(phi), mesh.name)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KodairaAmbiguityWarning)
        return PhaseSpace(assemble(mesh, p, coefficient))


@pytest.fixture(scope="session")
def torus():
    return generate_mesh("torus(4,4)")


@pytest.fixture(scope="session")
def torus_space():
    return make_space()


@pytest.fixture(scope="session")
def torus_cs(torus_space):
    return complex_structure(torus_space)


@pytest.fixture(scope="session")
def twisted_space():
    """torus(4,4), p = 1 with a random bounded potential and a nonzero twist."""
    rng = np.random.default_rng(11)
    return make_space(phi=rng.uniform(-0.5, 0.5, 16), coefficient=0.7)


@pytest.fixture(scope="session")
def twisted_cs(twisted_space):
    return complex_structure(twisted_space)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
