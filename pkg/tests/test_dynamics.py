import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pformem.dynamics import PhasePoint
from pformem.errors import AssemblyError, SectorError

from conftest import make_space

TIMES = np.linspace(-10, 10, 11)


def test_gauss_projection(torus_space, rng):
    s = torus_space
    b = s.bundle
    beta = rng.standard_normal(b.counts[2])
    coexact = b.Dstar[1] @ beta
    assert np.allclose(s.project_gauss(coexact), coexact, atol=1e-12)
    assert np.linalg.norm(b.Dstar[0] @ coexact) < 1e-12
    E = s.project_gauss(rng.standard_normal(s.size))
    assert np.allclose(s.project_gauss(E), E, atol=1e-12)
    exact = b.D[0] @ rng.standard_normal(b.counts[0])
    assert np.linalg.norm(s.project_gauss(exact)) < 1e-12 * np.linalg.norm(exact)


def test_gauge_fix(twisted_space, rng):
    s = twisted_space
    b = s.bundle
    assert np.linalg.norm(s.gauge_fix(b.D[0] @ rng.standard_normal(b.counts[0]))) < 1e-12
    h = s.split.P_harmonic @ rng.standard_normal(s.size)
    assert np.allclose(s.gauge_fix(h), h, atol=1e-12)
    A_raw = rng.standard_normal(s.size)
    A = s.gauge_fix(A_raw)
    assert np.linalg.norm(s.split.P_exact @ A) < 1e-10 * np.linalg.norm(A)
    best = np.sqrt(s.inner(A, A))
    for _ in range(50):
        shifted = A_raw + b.D[0] @ rng.standard_normal(b.counts[0])
        assert np.sqrt(s.inner(shifted, shifted)) >= best - 1e-12
        assert np.allclose(s.gauge_fix(shifted), A, atol=1e-10)


def test_point_validates_shape(torus_space):
    with pytest.raises(AssemblyError):
        torus_space.point(np.zeros(3), np.zeros(3))


def test_hamiltonian_examples(torus_space, rng):
    s = torus_space
    assert s.hamiltonian(s.zero()) == 0
    h = s.split.P_harmonic @ rng.standard_normal(s.size)
    assert abs(s.hamiltonian(PhasePoint(h, np.zeros(s.size)))) < 1e-25


@pytest.mark.parametrize("space_name", ["torus_space", "twisted_space"])
def test_conservation(space_name, request, rng):
    s = request.getfixturevalue(space_name)
    X, Y = s.random_point(rng), s.random_point(rng)
    H0, w0 = s.hamiltonian(X), s.symplectic(X, Y)
    for t in TIMES:
        Xt, Yt = s.evolve(X, t), s.evolve(Y, t)
        assert abs(s.hamiltonian(Xt) - H0) < 1e-10 * H0
        assert abs(s.symplectic(Xt, Yt) - w0) < 1e-10 * max(abs(w0), s.norm(X) * s.norm(Y))
        assert s.gauss_residual(Xt) < 1e-9


def test_symplectic_examples(torus_space, rng):
    s = torus_space
    X, Y = s.random_point(rng), s.random_point(rng)
    assert s.symplectic(X, X) == 0
    assert np.isclose(s.symplectic(X, Y), -s.symplectic(Y, X))
    b = s.bundle
    shifted = s.point(Y.A + b.D[0] @ rng.standard_normal(b.counts[0]), Y.E)
    assert np.isclose(s.symplectic(X, shifted), s.symplectic(X, Y), rtol=1e-12)


def test_sector_split(torus_space, rng):
    s = torus_space
    assert s.split.dims[1] == 2
    V = s.sector_basis("free")
    assert V.shape[1] == 2
    X = s.random_point(rng)
    parts = s.split_sectors(X)
    assert np.allclose((parts.free + parts.oscillating).A, X.A, atol=1e-12)
    coexact = s.random_point(rng, sector="oscillating")
    assert s.norm(s.split_sectors(coexact).free) < 1e-12
    for t in (1.0, -4.0):
        assert s.norm(s.split_sectors(s.evolve(parts.oscillating, t)).free) < 1e-10
        assert s.norm(s.split_sectors(s.evolve(parts.free, t)).oscillating) < 1e-10


def test_single_eigenmode():
    s = make_space()
    lam = s.spectral.eigenvalues
    V = s.split.P_coexact @ s.spectral.eigenvectors
    weight = np.einsum("ij,i,ij->j", V, s.mass, V)
    i = int(np.argmax(np.where(weight > 0.5, lam, -1.0)))
    # the projector commutes with L, so the coexact part is still an eigenvector
    v = V[:, i] / np.sqrt(weight[i])
    assert np.allclose(s.L @ v, lam[i] * v, atol=1e-12)
    X = PhasePoint(v, np.zeros(s.size))
    for t in (0.3, 2.0):
        Xt = s.evolve_oscillating(X, t)
        w = np.sqrt(lam[i])
        assert np.allclose(Xt.A, np.cos(t * w) * v, atol=1e-12)
        assert np.allclose(Xt.E, -w * np.sin(t * w) * v, atol=1e-12)


def test_time_zero_and_round_trip(twisted_space, rng):
    s = twisted_space
    X = s.random_point(rng)
    Y = s.evolve(X, 0.0)
    assert np.allclose(Y.A, X.A, atol=1e-13) and np.allclose(Y.E, X.E, atol=1e-13)
    back = s.evolve(s.evolve(X, 3.7), -3.7)
    assert s.norm(back - X) < 1e-10 * s.norm(X)


@pytest.mark.parametrize("sector", ["oscillating", "free"])
def test_group_law(torus_space, sector):
    s = torus_space
    for t in (-2.0, 0.5, 3.0):
        for u in (-1.0, 0.7, 4.0):
            T = s.propagator(sector, t + u)
            assert np.linalg.norm(T - s.propagator(sector, t) @ s.propagator(sector, u), 2) < 1e-10 * max(
                1.0, np.linalg.norm(T, 2))


@pytest.mark.parametrize("t", [0.0, 1.0, 3.0, 7.5])
def test_free_operator_norm_bound(torus_space, t):
    sq = np.linalg.norm(torus_space.propagator("free", t), 2) ** 2
    assert 1 - 1e-12 <= sq <= 2 + t * t + 1e-12


def test_free_flow(torus_space, rng):
    s = torus_space
    X = s.random_point(rng, sector="free")
    still = PhasePoint(X.A, np.zeros(s.size))
    assert np.array_equal(s.evolve_free(still, 5.0).A, still.A)
    for t in (1.0, -2.5):
        Xt = s.evolve(X, t)
        assert np.allclose(Xt.A, X.A + t * X.E, atol=1e-12)
        assert np.isclose(s.hamiltonian(Xt), 0.5 * s.inner(X.E, X.E))


def test_evolve_reduces_to_each_sector(torus_space, rng):
    s = torus_space
    osc = s.random_point(rng, sector="oscillating")
    free = s.random_point(rng, sector="free")
    assert s.norm(s.evolve(osc, 1.3) - s.evolve_oscillating(osc, 1.3)) < 1e-12
    assert s.norm(s.evolve(free, 1.3) - s.evolve_free(free, 1.3)) < 1e-12


def test_oscillating_evolution_rejects_free_part(torus_space, rng):
    with pytest.raises(SectorError):
        torus_space.evolve_oscillating(torus_space.random_point(rng), 1.0)


def test_norm_not_preserved(torus_space, rng):
    s = torus_space
    X = s.random_point(rng)
    changes = [abs(s.norm(s.evolve(X, t)) / s.norm(X) - 1) for t in TIMES]
    assert max(changes) > 1e-3


@given(st.integers(0, 2 ** 32 - 1), st.floats(-6, 6), st.floats(-6, 6))
def test_flow_is_linear_and_composes(seed, t, u):
    s = make_space("torus(3,3)")
    rng = np.random.default_rng(seed)
    X, Y = s.random_point(rng), s.random_point(rng)
    lin = s.evolve(2.0 * X + Y, t) - (2.0 * s.evolve(X, t) + s.evolve(Y, t))
    assert s.norm(lin) < 1e-9 * (s.norm(X) + s.norm(Y)) * (1 + abs(t))
    comp = s.evolve(s.evolve(X, t), u) - s.evolve(X, t + u)
    assert s.norm(comp) < 1e-9 * s.norm(X) * (1 + abs(t) + abs(u)) ** 2
