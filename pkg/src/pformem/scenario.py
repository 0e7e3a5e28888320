"""Scenario files: which mesh, which form degree, which potential, which seed.

A scenario is a JSON object::

    {
      "mesh": "torus(4,4)",            # generator spec, or {"file": "mesh.json"}
      "profile": "uniform",            # optional weight profile for generated meshes
      "alpha": 1.0,                    # optional radial rate of the hyperbolic-like profile
      "n": 2,                          # optional; must equal the mesh dimension
      "p": 1,
      "phi": {"constant": 0.0},        # or {"table": [...]} or {"radial": {"slope": s, "offset": o}}
      "twist": null,                   # optional override of the twist exponent
      "seed": 0,
      "times": [0, 1, 2],              # evolve sample times
      "label_scale": 0.3,              # size of random coherent-state labels
      "loop": [[[0, 1], 1], ...],      # optional closed chain: (vertex tuple, orientation) pairs
      "gap_study": {"rings": [4, 8, 16], "sectors": 12, "alpha": 1.0}
    }

All keys except ``mesh`` and ``p`` are optional.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .complex import generate_mesh, graph_distance, load_mesh
from .errors import ParseError, PFormError
from .gapstudy import DEFAULT_RINGS, DEFAULT_SECTORS

__all__ = ["Scenario", "load_scenario", "parse_scenario", "DEFAULT_SCENARIO", "build_mesh"]

DEFAULT_SCENARIO = {"mesh": "torus(4,4)", "p": 1, "phi": {"constant": 0.0}, "seed": 0}

_KEYS = {"mesh", "profile", "alpha", "n", "p", "phi", "twist", "seed", "times",
         "label_scale", "loop", "gap_study"}


@dataclass(frozen=True)
class Scenario:
    mesh_spec: object
    p: int
    n: int = None
    profile: str = None
    alpha: float = 1.0
    phi: dict = field(default_factory=lambda: {"constant": 0.0})
    twist: float = None
    seed: int = 0
    times: tuple = tuple(float(t) for t in range(11))
    label_scale: float = 0.3
    loop: tuple = None
    gap_rings: tuple = DEFAULT_RINGS
    gap_sectors: int = DEFAULT_SECTORS
    gap_alpha: float = 1.0
    base_dir: str = "."


def _line_of(text, key):
    """First line mentioning ``"key"``, for error messages; ``None`` if absent."""
    if text is None:
        return None
    needle = json.dumps(key)
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _number(value, name, text, integer=False, minimum=None):
    ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    if ok and integer:
        ok = float(value).is_integer()
    if ok:
        ok = math.isfinite(value) and (minimum is None or value >= minimum)
    if not ok:
        kind = "integer" if integer else "number"
        bound = f" >= {minimum}" if minimum is not None else ""
        raise ParseError(f"{name} must be a finite {kind}{bound}, got {value!r}",
                         field=name, line=_line_of(text, name))
    return int(value) if integer else float(value)


def _parse_phi(raw, text):
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return {"constant": _number(raw, "phi", text)}
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ParseError("phi must be a number or an object with one of constant, table, radial",
                         field="phi", line=_line_of(text, "phi"))
    (kind, value), = raw.items()
    if kind == "constant":
        return {"constant": _number(value, "phi", text)}
    if kind == "table":
        if not isinstance(value, list) or not value:
            raise ParseError("phi table must be a nonempty list", field="phi", line=_line_of(text, "table"))
        return {"table": [_number(v, "phi", text) for v in value]}
    if kind == "radial":
        if not isinstance(value, dict) or set(value) - {"slope", "offset"}:
            raise ParseError("radial phi takes slope and offset", field="phi", line=_line_of(text, "radial"))
        return {"radial": {"slope": _number(value.get("slope", 0.0), "slope", text),
                           "offset": _number(value.get("offset", 0.0), "offset", text)}}
    raise ParseError(f"unknown phi kind {kind!r}", field="phi", line=_line_of(text, kind))


def _parse_loop(raw, text):
    if not isinstance(raw, list) or not raw:
        raise ParseError("loop must be a nonempty list of [simplex, orientation] pairs",
                         field="loop", line=_line_of(text, "loop"))
    out = []
    for entry in raw:
        if (not isinstance(entry, list) or len(entry) != 2 or not isinstance(entry[0], list)
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in entry[0])
                or entry[1] not in (-1, 1)):
            raise ParseError(f"bad loop entry {entry!r}", field="loop", line=_line_of(text, "loop"))
        out.append((tuple(entry[0]), int(entry[1])))
    return tuple(out)


def parse_scenario(doc, text=None, base_dir="."):
    """Validate a decoded scenario document; ``text`` is used only to locate errors."""
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object", line=1)
    unknown = sorted(set(doc) - _KEYS)
    if unknown:
        raise ParseError(f"unknown scenario key {unknown[0]!r}", field=unknown[0],
                         line=_line_of(text, unknown[0]))
    for key in ("mesh", "p"):
        if key not in doc:
            raise ParseError(f"missing required key {key!r}", field=key)
    mesh = doc["mesh"]
    if isinstance(mesh, dict):
        if set(mesh) != {"file"} or not isinstance(mesh["file"], str):
            raise ParseError("mesh object must be {\"file\": path}", field="mesh", line=_line_of(text, "mesh"))
    elif not isinstance(mesh, str):
        raise ParseError("mesh must be a generator spec string or {\"file\": path}",
                         field="mesh", line=_line_of(text, "mesh"))
    kw = dict(mesh_spec=mesh, p=_number(doc["p"], "p", text, integer=True, minimum=0), base_dir=base_dir)
    if doc.get("n") is not None:
        kw["n"] = _number(doc["n"], "n", text, integer=True, minimum=0)
    if doc.get("profile") is not None:
        if not isinstance(doc["profile"], str):
            raise ParseError("profile must be a string", field="profile", line=_line_of(text, "profile"))
        kw["profile"] = doc["profile"]
    if "alpha" in doc:
        kw["alpha"] = _number(doc["alpha"], "alpha", text)
    if "phi" in doc:
        kw["phi"] = _parse_phi(doc["phi"], text)
    if doc.get("twist") is not None:
        kw["twist"] = _number(doc["twist"], "twist", text)
    if "seed" in doc:
        kw["seed"] = _number(doc["seed"], "seed", text, integer=True, minimum=0)
        if kw["seed"] >= 2 ** 64:
            raise ParseError("seed must fit in 64 bits", field="seed", line=_line_of(text, "seed"))
    if "times" in doc:
        if not isinstance(doc["times"], list) or not doc["times"]:
            raise ParseError("times must be a nonempty list", field="times", line=_line_of(text, "times"))
        kw["times"] = tuple(_number(t, "times", text) for t in doc["times"])
    if "label_scale" in doc:
        kw["label_scale"] = _number(doc["label_scale"], "label_scale", text, minimum=0)
    if "loop" in doc:
        kw["loop"] = _parse_loop(doc["loop"], text)
    if "gap_study" in doc:
        g = doc["gap_study"]
        if not isinstance(g, dict) or set(g) - {"rings", "sectors", "alpha"}:
            raise ParseError("gap_study takes rings, sectors, alpha", field="gap_study",
                             line=_line_of(text, "gap_study"))
        if "rings" in g:
            if not isinstance(g["rings"], list):
                raise ParseError("gap_study.rings must be a list", field="rings", line=_line_of(text, "rings"))
            kw["gap_rings"] = tuple(_number(r, "rings", text, integer=True, minimum=2) for r in g["rings"])
        if "sectors" in g:
            kw["gap_sectors"] = _number(g["sectors"], "sectors", text, integer=True, minimum=3)
        if "alpha" in g:
            kw["gap_alpha"] = _number(g["alpha"], "alpha", text)
    return Scenario(**kw)


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read scenario {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return parse_scenario(doc, text, base_dir=os.path.dirname(os.path.abspath(path)))


def _phi_values(scenario, mesh):
    nv = mesh.complex.num_vertices
    spec = scenario.phi
    if "constant" in spec:
        return np.full(nv, spec["constant"])
    if "table" in spec:
        values = np.asarray(spec["table"], dtype=float)
        if len(values) != nv:
            raise ParseError(f"phi table has {len(values)} entries, mesh has {nv} vertices", field="phi")
        return values
    r = graph_distance(mesh.complex, 0).astype(float)
    return spec["radial"]["slope"] * r + spec["radial"]["offset"]


def build_mesh(scenario):
    """Mesh of the scenario with its potential installed."""
    spec = scenario.mesh_spec
    try:
        if isinstance(spec, dict):
            path = spec["file"]
            if not os.path.isabs(path):
                path = os.path.join(scenario.base_dir, path)
            mesh = load_mesh(path)
        else:
            mesh = generate_mesh(spec, profile=scenario.profile, alpha=scenario.alpha)
    except ParseError:
        raise
    except (PFormError, OSError, ValueError) as exc:
        raise ParseError(str(exc), field="mesh") from None
    n = mesh.complex.dimension
    if scenario.n is not None and scenario.n != n:
        raise ParseError(f"scenario n = {scenario.n} but the mesh has dimension {n}", field="n")
    if scenario.p > n:
        raise ParseError(f"form degree p = {scenario.p} exceeds dimension {n}", field="p")
    phi = _phi_values(scenario, mesh)
    return type(mesh)(mesh.complex, mesh.metric.with_phi(phi), mesh.name)
