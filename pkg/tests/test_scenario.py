import json

import numpy as np
import pytest

from pformem.errors import ParseError
from pformem.scenario import DEFAULT_SCENARIO, build_mesh, load_scenario, parse_scenario


def _write(tmp_path, doc_or_text):
    path = tmp_path / "scenario.json"
    text = doc_or_text if isinstance(doc_or_text, str) else json.dumps(doc_or_text, indent=2)
    path.write_text(text)
    return path


def test_default_scenario():
    s = parse_scenario(DEFAULT_SCENARIO)
    mesh = build_mesh(s)
    assert mesh.complex.counts == (16, 48, 32)
    assert s.p == 1 and s.seed == 0


def test_full_scenario(tmp_path):
    doc = {"mesh": "disc(3,8)", "profile": "hyperbolic-like", "alpha": 0.5, "n": 2, "p": 1,
           "phi": {"radial": {"slope": 0.1, "offset": -0.2}}, "twist": 0.5, "seed": 2 ** 64 - 1,
           "times": [0, 0.5], "label_scale": 0.1, "loop": [[[0, 1], 1]],
           "gap_study": {"rings": [3, 6], "sectors": 8, "alpha": 2.0}}
    s = load_scenario(_write(tmp_path, doc))
    assert s.seed == 2 ** 64 - 1 and s.times == (0.0, 0.5) and s.gap_rings == (3, 6)
    assert s.loop == (((0, 1), 1),)
    mesh = build_mesh(s)
    assert mesh.metric.phi[0] == pytest.approx(-0.2)
    assert mesh.metric.phi[-1] == pytest.approx(-0.2 + 0.1 * 3)


@pytest.mark.parametrize("phi, first", [(0.25, 0.25), ({"constant": -1.0}, -1.0), ({"table": list(range(16))}, 0.0)])
def test_phi_kinds(phi, first):
    mesh = build_mesh(parse_scenario({"mesh": "torus(4,4)", "p": 0, "phi": phi}))
    assert mesh.metric.phi[0] == first
    assert len(mesh.metric.phi) == 16


def test_mesh_from_file(tmp_path):
    from pformem.complex import generate_mesh, save_mesh
    save_mesh(tmp_path / "m.json", generate_mesh("circle(5)"))
    s = load_scenario(_write(tmp_path, {"mesh": {"file": "m.json"}, "p": 0}))
    assert build_mesh(s).complex.counts == (5, 5)


@pytest.mark.parametrize("doc, field", [
    ({"mesh": "torus(4,4)", "p": -1}, "p"),
    ({"mesh": "torus(4,4)", "p": 1.5}, "p"),
    ({"mesh": "torus(4,4)", "p": 1, "seed": -3}, "seed"),
    ({"mesh": "torus(4,4)", "p": 1, "seed": 2 ** 64}, "seed"),
    ({"mesh": "torus(4,4)", "p": 1, "phi": {"wave": 1}}, "phi"),
    ({"mesh": "torus(4,4)", "p": 1, "phi": {"table": []}}, "phi"),
    ({"mesh": "torus(4,4)", "p": 1, "colour": "red"}, "colour"),
    ({"mesh": 3, "p": 1}, "mesh"),
    ({"mesh": "torus(4,4)", "p": 1, "loop": [[[0, 1], 2]]}, "loop"),
    ({"mesh": "torus(4,4)", "p": 1, "times": []}, "times"),
    ({"mesh": "torus(4,4)", "p": 1, "gap_study": {"rings": [1, 4]}}, "rings"),
    ({"p": 1}, "mesh"),
    ({"mesh": "torus(4,4)", "p": True}, "p"),
])
def test_parse_errors_name_field_and_line(tmp_path, doc, field):
    path = _write(tmp_path, doc)
    with pytest.raises(ParseError) as info:
        build_mesh(load_scenario(path))
    assert info.value.field == field
    if field in path.read_text().split('"'):
        # the reported line is the field itself or a nested key inside it
        assert info.value.line >= next(i for i, l in enumerate(path.read_text().splitlines(), 1)
                                       if f'"{field}"' in l)


@pytest.mark.parametrize("doc, field", [
    ({"mesh": "torus(4,4)", "n": 3, "p": 1}, "n"),
    ({"mesh": "circle(6)", "p": 2}, "p"),
    ({"mesh": "torus(4,4)", "p": 1, "phi": {"table": [0.0, 1.0]}}, "phi"),
    ({"mesh": "pretzel(3)", "p": 1}, "mesh"),
    ({"mesh": {"file": "missing.json"}, "p": 1}, "mesh"),
])
def test_build_errors(tmp_path, doc, field):
    with pytest.raises(ParseError) as info:
        build_mesh(load_scenario(_write(tmp_path, doc)))
    assert info.value.field == field


def test_invalid_json_reports_line(tmp_path):
    with pytest.raises(ParseError) as info:
        load_scenario(_write(tmp_path, '{\n  "mesh": "torus(4,4)",\n  "p": ,\n}'))
    assert info.value.line == 3
    assert "line 3" in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        load_scenario(tmp_path / "nope.json")


def test_phi_is_float_array():
    mesh = build_mesh(parse_scenario({"mesh": "torus(4,4)", "p": 1, "phi": 1}))
    assert mesh.metric.phi.dtype == np.float64
