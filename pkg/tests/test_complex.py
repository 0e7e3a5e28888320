import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pformem.complex import (
    Mesh,
    MetricData,
    SimplicialComplex,
    coboundary,
    generate_mesh,
    graph_distance,
    load_mesh,
    mass_matrix,
    mesh_document,
    mesh_from_document,
    parse_generator_spec,
    save_mesh,
    twist_coefficient,
    twist_weights,
)
from pformem.errors import InvalidParameterError, MetricError, ParseError
from pformem.kodaira import integer_rank

GENERATED = ["circle(4)", "circle(7)", "interval(5)", "torus(4,4)", "torus(3,5)", "cylinder(5,3)",
             "disc(3,6)", "sphere_octahedron(0)", "sphere_octahedron(1)"]


@pytest.mark.parametrize("spec, counts, euler", [
    ("torus(4,4)", (16, 48, 32), 0),
    ("circle(4)", (4, 4), 0),
    ("sphere_octahedron(0)", (6, 12, 8), 2),
    ("sphere_octahedron(1)", (18, 48, 32), 2),
    ("interval(3)", (4, 3), 1),
    ("disc(2,6)", (13, 30, 18), 1),
    ("cylinder(4,3)", (12, 28, 16), 0),
])
def test_generator_counts(spec, counts, euler):
    c = generate_mesh(spec).complex
    assert c.counts == counts
    assert c.euler_characteristic() == euler == c.euler


@pytest.mark.parametrize("spec", GENERATED)
def test_dd_is_zero_in_integers(spec):
    c = generate_mesh(spec).complex
    for k in range(c.dimension - 1):
        prod = coboundary(c, k + 1) @ coboundary(c, k)
        assert prod.dtype == np.int64
        assert not prod.any()


@pytest.mark.parametrize("spec", GENERATED)
def test_positive_weights_and_determinism(spec):
    a, b = generate_mesh(spec), generate_mesh(spec)
    for k in range(a.complex.dimension + 1):
        assert mass_matrix(a.complex, a.metric, k).diagonal().min() > 0
        assert np.array_equal(a.complex.simplices[k], b.complex.simplices[k])
        assert np.array_equal(a.metric.dual_volumes[k], b.metric.dual_volumes[k])


def test_circle_incidence_rows():
    d0 = coboundary(generate_mesh("circle(4)").complex, 0)
    assert all(sorted(row) == [-1, 0, 0, 1] for row in d0.tolist())
    assert integer_rank(d0) == 3


def test_face_signs():
    c = SimplicialComplex([np.arange(3)[:, None], [[0, 1], [0, 2], [1, 2]], [[0, 1, 2]]])
    # faces of (0,1,2): omit 0 -> (1,2) +, omit 1 -> (0,2) -, omit 2 -> (0,1) +
    assert coboundary(c, 1).tolist() == [[1, -1, 1]]


@pytest.mark.parametrize("simplices, message", [
    ([[[0], [1], [2]], [[0, 1], [1, 2]], [[0, 1, 2]]], "face"),
    ([[[0], [1]], [[1, 0]]], "unsorted"),
    ([[[0], [1]], [[0, 1], [0, 1]]], "duplicate"),
    ([[[0], [2]]], "0..V-1"),
])
def test_invalid_complexes(simplices, message):
    with pytest.raises(InvalidParameterError, match=message):
        SimplicialComplex([np.array(s) for s in simplices])


def test_declared_euler_checked():
    with pytest.raises(InvalidParameterError, match="Euler"):
        SimplicialComplex([np.arange(3)[:, None], np.array([[0, 1], [1, 2]])], euler=0)


@pytest.mark.parametrize("phi", [[1.0, np.nan, 0.0, 0.0], [0.0, np.inf, 0.0, 0.0]])
def test_metric_rejects_nonfinite_phi(phi):
    with pytest.raises(MetricError):
        MetricData((np.ones(4), np.ones(4)), phi)


@pytest.mark.parametrize("weights", [[1, 1, 0, 1], [1, -2, 1, 1], [1, np.nan, 1, 1]])
def test_metric_rejects_bad_volumes(weights):
    with pytest.raises(MetricError):
        MetricData((np.ones(4), np.array(weights, dtype=float)), np.zeros(4))


def test_mass_matrices():
    m = generate_mesh("circle(4)", profile="uniform")
    assert np.array_equal(mass_matrix(m.complex, m.metric, 0), np.eye(4))
    m2 = MetricData((np.ones(4), np.full(4, 2.0)), np.zeros(4))
    assert np.array_equal(mass_matrix(m.complex, m2, 1), 2 * np.eye(4))


def test_twist_weights():
    m = generate_mesh("torus(4,4)")
    assert all(np.array_equal(w, np.ones(len(w))) for w in twist_weights(m.complex, m.metric, -0.5))
    ones = m.metric.with_phi(np.ones(16))
    assert all(np.allclose(w, np.e) for w in twist_weights(m.complex, ones, 1.0))
    assert twist_coefficient(3, 1) == 0
    assert twist_coefficient(2, 1) == -0.5
    assert twist_coefficient(2, 0) == 0.5


def test_flat_disc_weights_sum_to_area():
    m = generate_mesh("disc(3,8)", profile="flat")
    # barycentric vertex cells tile the inscribed polygon
    area = 0.5 * 8 * 9 * np.sin(2 * np.pi / 8)
    assert np.isclose(m.metric.dual_volumes[0].sum(), area)


def test_hyperbolic_profile_needs_radius():
    with pytest.raises(InvalidParameterError):
        generate_mesh("torus(4,4)", profile="hyperbolic-like")
    flat = generate_mesh("disc(3,6)", profile="flat")
    hyp = generate_mesh("disc(3,6)", profile="hyperbolic-like", alpha=1.0)
    assert hyp.metric.dual_volumes[0][0] == flat.metric.dual_volumes[0][0]
    assert np.all(hyp.metric.dual_volumes[1] > flat.metric.dual_volumes[1])


@pytest.mark.parametrize("text", ["torus(4)", "torus(a,b)", "torus 4 4", "blob(3)", "circle(2)"])
def test_bad_generator_specs(text):
    with pytest.raises((ParseError, InvalidParameterError)):
        generate_mesh(text)


def test_parse_generator_spec():
    assert parse_generator_spec(" torus( 4, 5 ) ") == ("torus", (4, 5))


def test_graph_distance_on_disc():
    c = generate_mesh("disc(3,6)").complex
    d = graph_distance(c, 0)
    assert d[0] == 0 and d[1:7].tolist() == [1] * 6 and d.max() == 3


@pytest.mark.parametrize("spec", GENERATED)
def test_mesh_round_trip_bit_identical(spec, tmp_path):
    rng = np.random.default_rng(5)
    mesh = generate_mesh(spec)
    mesh = Mesh(mesh.complex, mesh.metric.with_phi(rng.standard_normal(mesh.complex.num_vertices) / 3), mesh.name)
    path = tmp_path / "mesh.json"
    save_mesh(path, mesh)
    back = load_mesh(path)
    for a, b in zip(mesh.metric.dual_volumes, back.metric.dual_volumes):
        assert a.tobytes() == b.tobytes()
    assert mesh.metric.phi.tobytes() == back.metric.phi.tobytes()
    assert all(np.array_equal(a, b) for a, b in zip(mesh.complex.simplices, back.complex.simplices))
    save_mesh(tmp_path / "again.json", back)
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_mesh_document_missing_field():
    doc = mesh_document(generate_mesh("circle(4)"))
    del doc["phi"]
    with pytest.raises(ParseError, match="phi"):
        mesh_from_document(doc)


@given(st.integers(3, 7), st.integers(3, 7))
def test_torus_topology_property(n, m):
    c = generate_mesh("torus", n, m).complex
    assert c.counts == (n * m, 3 * n * m, 2 * n * m)
    assert integer_rank(coboundary(c, 0)) == n * m - 1
