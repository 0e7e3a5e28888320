import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pformem.complex import Mesh, coboundary, generate_mesh
from pformem.errors import DegreeError
from pformem.kodaira import (
    KodairaAmbiguityWarning,
    betti,
    betti_numbers,
    harmonic_dimension,
    integer_rank,
    kodaira_split,
)
from pformem.operators import assemble, spectral_decomposition


@pytest.mark.parametrize("spec, expected", [
    ("torus(4,4)", (1, 2, 1)),
    ("sphere_octahedron(0)", (1, 0, 1)),
    ("sphere_octahedron(1)", (1, 0, 1)),
    ("circle(4)", (1, 1)),
    ("interval(3)", (1, 0)),
    ("disc(3,6)", (1, 0, 0)),
    ("cylinder(5,3)", (1, 1, 0)),
])
def test_betti_numbers(spec, expected):
    c = generate_mesh(spec).complex
    assert betti_numbers(c) == expected
    assert tuple(betti(c, k) for k in range(c.dimension + 1)) == expected


@pytest.mark.parametrize("spec", ["torus(4,4)", "sphere_octahedron(0)", "circle(4)", "disc(3,6)", "cylinder(5,3)"])
@pytest.mark.parametrize("coefficient", [None, 0.0, 1.3])
def test_discrete_hodge_theorem(spec, coefficient):
    mesh = generate_mesh(spec)
    phi = np.random.default_rng(8).uniform(-1, 1, mesh.complex.num_vertices)
    mesh = Mesh(mesh.complex, mesh.metric.with_phi(phi))
    b = assemble(mesh, 1 if mesh.complex.dimension > 1 else 0, coefficient)
    for k, bk in enumerate(betti_numbers(mesh.complex)):
        s = spectral_decomposition(b.L(k), b.M[k])
        assert harmonic_dimension(b, k, s) == bk
        if 0 < bk < len(s.eigenvalues):
            assert s.margin() > 1e6


def test_torus_split_dimensions(torus):
    split = kodaira_split(assemble(torus, 1), 1)
    assert split.dims == (15, 2, 31)
    assert split.completeness_residual() < 1e-10
    assert split.idempotence_residual() < 1e-10
    assert split.orthogonality_residual() < 1e-10


def test_sphere_has_no_harmonic_one_forms():
    b = assemble(generate_mesh("sphere_octahedron(0)"), 1)
    assert kodaira_split(b, 1).dims[1] == 0


@pytest.mark.parametrize("k", [0, 1, 2])
def test_projector_structure(twisted_space, k, rng):
    b = twisted_space.bundle
    split = kodaira_split(b, k)
    assert sum(split.dims) == b.counts[k]
    x = rng.standard_normal(b.counts[k])
    assert np.abs(b.Dk(k) @ split.P_exact).max(initial=0.0) < 1e-10
    h = split.P_harmonic @ x
    assert np.abs(b.Dk(k) @ h).max(initial=0.0) < 1e-9
    assert np.abs(b.Dstark(k - 1) @ h).max(initial=0.0) < 1e-9
    parts = [P @ x for P in split.projectors]
    assert np.allclose(sum(parts), x, atol=1e-12)
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(np.dot(parts[i], b.M[k] * parts[j])) < 1e-10 * np.dot(x, b.M[k] * x)


def test_ambiguity_warning_on_tiny_gap():
    mesh = generate_mesh("circle(4)")
    b = assemble(mesh, 0)
    L = b.L(0)
    s = spectral_decomposition(L, b.M[0], threshold=2.5)  # kernel swallows the 2-eigenspace
    with pytest.warns(KodairaAmbiguityWarning):
        kodaira_split(b, 0, s)


def test_bad_degree(torus):
    with pytest.raises(DegreeError):
        kodaira_split(assemble(torus, 1), 3)
    with pytest.raises(DegreeError):
        betti(torus.complex, -1)


@given(st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=1, max_size=6))
def test_integer_rank_matches_numpy(rows):
    A = np.array(rows)
    assert integer_rank(A) == np.linalg.matrix_rank(A)


def test_integer_rank_of_coboundaries(torus):
    assert integer_rank(coboundary(torus.complex, 0)) == 15
    assert integer_rank(coboundary(torus.complex, 1)) == 31
    assert integer_rank(np.zeros((0, 3))) == 0
