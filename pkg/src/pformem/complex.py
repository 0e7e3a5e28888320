"""Oriented simplicial complexes, lumped metric data and integer coboundaries.

Simplices are stored as rows of strictly increasing vertex indices, sorted
lexicographically within each degree.  The orientation of a simplex is the one
induced by that vertex order, so the face obtained by omitting the vertex in
position ``i`` enters the coboundary with sign ``(-1)**i``.
"""

import itertools
import math
import re
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DegreeError, InvalidParameterError, MetricError, ParseError
from . import reports

__all__ = [
    "SimplicialComplex",
    "MetricData",
    "Mesh",
    "generate_mesh",
    "parse_generator_spec",
    "coboundary",
    "mass_matrix",
    "twist_weights",
    "twist_coefficient",
    "graph_distance",
    "save_mesh",
    "load_mesh",
]

PROFILES = ("uniform", "flat", "hyperbolic-like")


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """Oriented simplicial complex of dimension ``dimension``.

    ``simplices[k]`` is an integer array of shape ``(n_k, k + 1)``.
    ``euler`` is the Euler characteristic declared by whoever built the
    complex (``None`` when unknown); validation checks it.
    """

    simplices: tuple
    euler: int = None
    _index: list = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        simplices = tuple(np.ascontiguousarray(s, dtype=np.int64) for s in self.simplices)
        object.__setattr__(self, "simplices", simplices)
        index = [{tuple(row): i for i, row in enumerate(s.tolist())} for s in simplices]
        object.__setattr__(self, "_index", index)
        self.validate()

    @property
    def dimension(self):
        return len(self.simplices) - 1

    @property
    def counts(self):
        return tuple(len(s) for s in self.simplices)

    @property
    def num_vertices(self):
        return len(self.simplices[0])

    def index_of(self, simplex):
        return self._index[len(simplex) - 1][tuple(simplex)]

    def euler_characteristic(self):
        return sum((-1) ** k * n for k, n in enumerate(self.counts))

    def validate(self):
        if not self.simplices:
            raise InvalidParameterError("complex has no simplices")
        verts = self.simplices[0]
        if verts.shape[1] != 1 or not np.array_equal(verts[:, 0], np.arange(len(verts))):
            raise InvalidParameterError("vertices must be listed as 0..V-1")
        for k, s in enumerate(self.simplices):
            if s.ndim != 2 or s.shape[1] != k + 1:
                raise InvalidParameterError(f"degree-{k} simplices must have {k + 1} vertices")
            if len(s) and np.any(np.diff(s, axis=1) <= 0):
                raise InvalidParameterError(f"degree-{k} simplex with unsorted or repeated vertices")
            if len(self._index[k]) != len(s):
                raise InvalidParameterError(f"duplicate degree-{k} simplices")
            if k == 0:
                continue
            faces = self._index[k - 1]
            for row in s.tolist():
                for i in range(k + 1):
                    if tuple(row[:i] + row[i + 1:]) not in faces:
                        raise InvalidParameterError(f"face of {row} missing from degree {k - 1}")
        if self.euler is not None and self.euler_characteristic() != self.euler:
            raise InvalidParameterError(
                f"Euler characteristic {self.euler_characteristic()} != declared {self.euler}")


@dataclass(frozen=True, eq=False)
class MetricData:
    """Lumped Hodge-star weights per degree and a Newtonian potential per vertex."""

    dual_volumes: tuple
    phi: np.ndarray

    def __post_init__(self):
        vols = tuple(np.asarray(v, dtype=float) for v in self.dual_volumes)
        phi = np.asarray(self.phi, dtype=float)
        for k, v in enumerate(vols):
            if np.any(~(v > 0)) or not np.all(np.isfinite(v)):
                raise MetricError(f"dual volumes of degree {k} must be positive and finite")
        if not np.all(np.isfinite(phi)):
            raise MetricError("phi must be finite at every vertex")
        object.__setattr__(self, "dual_volumes", vols)
        object.__setattr__(self, "phi", phi)

    def with_phi(self, phi):
        return MetricData(self.dual_volumes, phi)

    def check(self, complex_):
        if len(self.dual_volumes) != complex_.dimension + 1:
            raise MetricError("dual volumes must be given for every degree")
        for k, (v, n) in enumerate(zip(self.dual_volumes, complex_.counts)):
            if v.shape != (n,):
                raise MetricError(f"degree {k}: expected {n} dual volumes, got {v.shape}")
        if self.phi.shape != (complex_.num_vertices,):
            raise MetricError("phi must have one value per vertex")


@dataclass(frozen=True, eq=False)
class Mesh:
    complex: SimplicialComplex
    metric: MetricData
    name: str = ""

    def __post_init__(self):
        self.metric.check(self.complex)


# ---------------------------------------------------------------------------
# generators

def _closure(top, dim):
    """All faces of the given top simplices, sorted per degree."""
    levels = [set() for _ in range(dim + 1)]
    for s in top:
        s = tuple(sorted(s))
        for k in range(dim + 1):
            levels[k].update(itertools.combinations(s, k + 1))
    return [np.array(sorted(level), dtype=np.int64).reshape(-1, k + 1)
            for k, level in enumerate(levels)]


def _lengths(edges, coords=None, length_fn=None):
    if length_fn is not None:
        return np.array([length_fn(a, b) for a, b in edges.tolist()], dtype=float)
    return np.linalg.norm(coords[edges[:, 1]] - coords[edges[:, 0]], axis=1)


def _barycentric_1d(simplices, lengths):
    nv = len(simplices[0])
    star0 = np.zeros(nv)
    np.add.at(star0, simplices[1][:, 0], lengths / 2)
    np.add.at(star0, simplices[1][:, 1], lengths / 2)
    return [star0, 1.0 / lengths]


def _barycentric_2d(simplices, lengths):
    """Barycentric-dual Hodge stars from edge lengths.

    Each triangle hands a third of its area to each vertex and, to each of its
    edges, the segment from edge midpoint to centroid (a third of the median).
    Unlike circumcentric duals these are positive for every triangle shape.
    """
    verts, edges, tris = simplices
    eidx = {tuple(e): i for i, e in enumerate(edges.tolist())}
    star0 = np.zeros(len(verts))
    dual_len = np.zeros(len(edges))
    area = np.zeros(len(tris))
    for t, (a, b, c) in enumerate(tris.tolist()):
        e_bc, e_ac, e_ab = eidx[(b, c)], eidx[(a, c)], eidx[(a, b)]
        la, lb, lc = lengths[e_bc], lengths[e_ac], lengths[e_ab]
        s = (la + lb + lc) / 2
        ar = math.sqrt(max(s * (s - la) * (s - lb) * (s - lc), 0.0))
        area[t] = ar
        star0[[a, b, c]] += ar / 3
        # median to side x from the opposite vertex
        for e, x, y, z in ((e_bc, la, lb, lc), (e_ac, lb, la, lc), (e_ab, lc, la, lb)):
            dual_len[e] += 0.5 * math.sqrt(max(2 * y * y + 2 * z * z - x * x, 0.0)) / 3
    return [star0, dual_len / lengths, 1.0 / area]


def _profile_weights(stars, simplices, radius, profile, alpha):
    if profile == "uniform":
        return [np.ones(len(s)) for s in simplices]
    if profile == "flat":
        return stars
    if radius is None:
        raise InvalidParameterError("hyperbolic-like profile needs a radial generator (disc, cylinder)")
    return [w * np.exp(alpha * radius[s].mean(axis=1)) for w, s in zip(stars, simplices)]


def _circle(n):
    if n < 3:
        raise InvalidParameterError("circle needs N >= 3")
    top = [(i, (i + 1) % n) for i in range(n)]
    return _closure(top, 1), 0, dict(lengths=lambda a, b: 1.0), None


def _interval(n):
    if n < 1:
        raise InvalidParameterError("interval needs N >= 1 segments")
    top = [(i, i + 1) for i in range(n)]
    radius = np.arange(n + 1, dtype=float)
    return _closure(top, 1), 1, dict(lengths=lambda a, b: 1.0), radius


def _grid_triangles(rows, cols, wrap_rows, wrap_cols):
    def v(i, j):
        return (i % rows) * cols + (j % cols)

    top = []
    for i in range(rows if wrap_rows else rows - 1):
        for j in range(cols if wrap_cols else cols - 1):
            a, b, c, d = v(i, j), v(i + 1, j), v(i, j + 1), v(i + 1, j + 1)
            top += [(a, b, d), (a, c, d)]
    return top


def _torus(n, m):
    if n < 3 or m < 3:
        raise InvalidParameterError("torus needs N, M >= 3")
    simplices = _closure(_grid_triangles(n, m, True, True), 2)

    def length(a, b):
        di = abs(a // m - b // m)
        dj = abs(a % m - b % m)
        di, dj = min(di, n - di), min(dj, m - dj)
        return math.hypot(di, dj)

    return simplices, 0, dict(lengths=length), None


def _cylinder(n, m):
    """``n`` vertices around the axis, ``m`` rings along it."""
    if n < 3 or m < 2:
        raise InvalidParameterError("cylinder needs N >= 3 around and M >= 2 along")
    simplices = _closure(_grid_triangles(m, n, False, True), 2)

    def length(a, b):
        di = abs(a // n - b // n)
        dj = abs(a % n - b % n)
        return math.hypot(di, min(dj, n - dj))

    radius = np.arange(n * m) // n
    return simplices, 0, dict(lengths=length), radius.astype(float)


def _disc(rings, sectors):
    """Polar grid: a centre vertex plus ``rings`` rings of ``sectors`` vertices at unit spacing."""
    if rings < 1 or sectors < 3:
        raise InvalidParameterError("disc needs rings >= 1 and sectors >= 3")

    def v(r, j):
        return 1 + (r - 1) * sectors + (j % sectors)

    top = [(0, v(1, j), v(1, j + 1)) for j in range(sectors)]
    for r in range(1, rings):
        for j in range(sectors):
            a, b, c, d = v(r, j), v(r, j + 1), v(r + 1, j), v(r + 1, j + 1)
            top += [(a, c, d), (a, b, d)]
    nv = 1 + rings * sectors
    radius = np.zeros(nv)
    coords = np.zeros((nv, 2))
    for r in range(1, rings + 1):
        for j in range(sectors):
            theta = 2 * math.pi * j / sectors
            radius[v(r, j)] = r
            coords[v(r, j)] = (r * math.cos(theta), r * math.sin(theta))
    return _closure(top, 2), 1, dict(coords=coords), radius


def _sphere_octahedron(subdiv):
    if subdiv < 0:
        raise InvalidParameterError("sphere_octahedron needs subdiv >= 0")
    pts = [np.array(p, dtype=float) for p in
           [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]]
    tris = [(0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
            (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5)]
    for _ in range(subdiv):
        mid = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in mid:
                p = pts[a] + pts[b]
                pts.append(p / np.linalg.norm(p))
                mid[key] = len(pts) - 1
            return mid[key]

        new = []
        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        tris = new
    return _closure(tris, 2), 2, dict(coords=np.array(pts)), None


_GENERATORS = {
    "circle": (_circle, 1),
    "interval": (_interval, 1),
    "torus": (_torus, 2),
    "sphere_octahedron": (_sphere_octahedron, 1),
    "disc": (_disc, 2),
    "cylinder": (_cylinder, 2),
}


def parse_generator_spec(text):
    """``"torus(4,4)"`` -> ``("torus", (4, 4))``."""
    m = re.fullmatch(r"\s*([a-z_]+)\s*\(([^)]*)\)\s*", text)
    if not m:
        raise ParseError(f"bad generator spec {text!r}", field="mesh")
    name = m.group(1)
    try:
        params = tuple(int(p) for p in m.group(2).split(",") if p.strip())
    except ValueError:
        raise ParseError(f"non-integer generator parameter in {text!r}", field="mesh") from None
    return name, params


def generate_mesh(kind, *params, profile=None, alpha=1.0):
    """Build a generated mesh.

    ``kind`` is a generator name (with ``params``) or a spec string such as
    ``"disc(4,8)"``.  ``profile`` selects the lumped weights: ``"uniform"``
    (all ones), ``"flat"`` (barycentric duals of the natural embedding) or
    ``"hyperbolic-like"`` (flat weights scaled by ``exp(alpha * r)`` with
    ``r`` the mean radial coordinate of the simplex; disc and cylinder only).
    The default is ``"uniform"`` for closed generators and ``"flat"`` for
    disc, cylinder and interval.
    """
    if not params and "(" in kind:
        kind, params = parse_generator_spec(kind)
    if kind not in _GENERATORS:
        raise InvalidParameterError(f"unknown generator {kind!r}")
    builder, nparams = _GENERATORS[kind]
    if len(params) != nparams:
        raise InvalidParameterError(f"{kind} takes {nparams} parameter(s), got {len(params)}")
    if profile is None:
        profile = "flat" if kind in ("disc", "cylinder", "interval") else "uniform"
    if profile not in PROFILES:
        raise InvalidParameterError(f"unknown weight profile {profile!r}")

    simplices, euler, geometry, radius = builder(*params)
    complex_ = SimplicialComplex(simplices, euler=euler)
    lengths = _lengths(simplices[1], geometry.get("coords"), geometry.get("lengths"))
    stars = (_barycentric_1d if complex_.dimension == 1 else _barycentric_2d)(simplices, lengths)
    weights = _profile_weights(stars, simplices, radius, profile, alpha)
    name = f"{kind}({','.join(str(p) for p in params)})"
    return Mesh(complex_, MetricData(weights, np.zeros(complex_.num_vertices)), name)


# ---------------------------------------------------------------------------
# operators

def coboundary(c, k):
    """Integer coboundary ``d_k`` of shape ``(n_{k+1}, n_k)`` with entries in {-1, 0, 1}."""
    if not 0 <= k < c.dimension:
        raise DegreeError(f"coboundary degree {k} outside [0, {c.dimension})")
    upper = c.simplices[k + 1]
    d = np.zeros((len(upper), len(c.simplices[k])), dtype=np.int64)
    faces = c._index[k]
    for row, s in enumerate(upper.tolist()):
        for i in range(k + 2):
            d[row, faces[tuple(s[:i] + s[i + 1:])]] = (-1) ** i
    return d


def mass_matrix(c, m, k):
    """Diagonal inner product on degree-``k`` cochains."""
    if not 0 <= k <= c.dimension:
        raise DegreeError(f"degree {k} outside [0, {c.dimension}]")
    w = np.asarray(m.dual_volumes[k], dtype=float)
    if w.shape != (c.counts[k],):
        raise MetricError(f"degree {k}: dual volume count mismatch")
    if np.any(~(w > 0)):
        raise MetricError(f"nonpositive dual volume in degree {k}")
    return np.diag(w)


def twist_coefficient(n, p):
    return (n - 2 * p - 1) / 2


def twist_weights(c, m, coefficient):
    """``exp(coefficient * mean phi)`` over the vertices of every simplex, per degree."""
    phi = np.asarray(m.phi, dtype=float)
    if phi.shape != (c.num_vertices,):
        raise MetricError("phi must have one value per vertex")
    return [np.exp(coefficient * phi[s].mean(axis=1)) for s in c.simplices]


def graph_distance(c, source=0):
    """Edge-count distance from ``source`` to every vertex (BFS on the 1-skeleton)."""
    nbrs = [[] for _ in range(c.num_vertices)]
    if c.dimension >= 1:
        for a, b in c.simplices[1].tolist():
            nbrs[a].append(b)
            nbrs[b].append(a)
    dist = np.full(c.num_vertices, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in nbrs[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


# ---------------------------------------------------------------------------
# mesh files

def mesh_document(mesh):
    c, m = mesh.complex, mesh.metric
    return {
        "dimension": c.dimension,
        "name": mesh.name,
        "euler": c.euler,
        "simplices": [s.tolist() for s in c.simplices],
        "dual_volumes": [v.tolist() for v in m.dual_volumes],
        "phi": m.phi.tolist(),
    }


def mesh_from_document(doc):
    for key in ("dimension", "simplices", "dual_volumes", "phi"):
        if key not in doc:
            raise ParseError("mesh document is missing a field", field=key)
    dim = doc["dimension"]
    if len(doc["simplices"]) != dim + 1:
        raise ParseError("need one simplex list per degree", field="simplices")
    simplices = [np.array(s, dtype=np.int64).reshape(-1, k + 1)
                 for k, s in enumerate(doc["simplices"])]
    c = SimplicialComplex(simplices, euler=doc.get("euler"))
    return Mesh(c, MetricData(doc["dual_volumes"], doc["phi"]), doc.get("name", ""))


def save_mesh(path, mesh):
    reports.write_json(path, mesh_document(mesh))


def load_mesh(path):
    return mesh_from_document(reports.read_json(path))
