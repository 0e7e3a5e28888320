"""Field matrix elements, Wilson surfaces on closed chains, and the quantum Maxwell checks.

Labels may carry free-sector (harmonic) components.  The Gaussian overlap and
the ``L^{+-1/2}`` corrections only see the oscillating part; harmonic parts
enter the field matrix elements through the classical average
``(A + A') / 2``, which is how a harmonic potential shows up in a Wilson loop.
"""

import cmath
from dataclasses import dataclass

import numpy as np

from .complex import coboundary
from .dynamics import PhasePoint
from .errors import CycleError, DegreeError, InvalidParameterError
from .quantization import (
    MatrixElement,
    _overlap,
    normal_weyl_matrix_element,
    observable,
)

__all__ = [
    "Chain",
    "FieldMatrixElement",
    "make_chain",
    "chain_cochain",
    "loop_observable",
    "evaluation_observable",
    "classical_holonomy",
    "field_A_matrix_element",
    "field_E_matrix_element",
    "wilson_matrix_element",
    "holonomy_matrix_element",
    "holonomy_as_normal_weyl",
    "electric_flux_matrix_element",
    "fundamental_cycles",
    "noncontractible_loop",
    "contractible_loop",
    "verify_quantum_maxwell",
    "verify_wilson_corollary",
]


@dataclass(frozen=True, eq=False)
class Chain:
    """Closed integer ``p``-chain, stored as a coefficient per ``p``-simplex."""

    degree: int
    coefficients: np.ndarray

    def __add__(self, other):
        if other.degree != self.degree:
            raise DegreeError("cannot add chains of different degree")
        return Chain(self.degree, self.coefficients + other.coefficients)

    def __neg__(self):
        return Chain(self.degree, -self.coefficients)

    @property
    def is_empty(self):
        return not np.any(self.coefficients)


@dataclass(frozen=True, eq=False)
class FieldMatrixElement:
    """Cochain of ratios ``<bra|field|ket> / <bra|ket>`` and the overlap itself."""

    values: np.ndarray
    normalization: complex

    @property
    def raw(self):
        return self.values * self.normalization


def make_chain(c, entries, degree=None):
    """Chain from ``(simplex, sign)`` pairs; ``simplex`` is an index or a vertex tuple.

    Raises :class:`CycleError` unless the boundary vanishes exactly.
    """
    entries = list(entries)
    if degree is None:
        if not entries:
            raise InvalidParameterError("empty chain needs an explicit degree")
        first = entries[0][0]
        if not isinstance(first, (tuple, list)):
            raise InvalidParameterError("chains given by simplex index need an explicit degree")
        degree = len(first) - 1
    if not 0 <= degree <= c.dimension:
        raise DegreeError(f"no {degree}-simplices in a {c.dimension}-complex")
    coeff = np.zeros(c.counts[degree], dtype=np.int64)
    for simplex, sign in entries:
        if sign not in (-1, 1):
            raise InvalidParameterError("chain orientations must be +1 or -1")
        if isinstance(simplex, (tuple, list)):
            if len(simplex) != degree + 1:
                raise DegreeError("mixed simplex degrees in chain")
            key = tuple(sorted(simplex))
            try:
                idx = c.index_of(key)
            except KeyError:
                raise InvalidParameterError(f"simplex {simplex} not in complex") from None
            # an odd permutation of the stored vertex order flips orientation
            inversions = sum(1 for i in range(len(simplex)) for j in range(i + 1, len(simplex))
                             if simplex[i] > simplex[j])
            sign = -sign if inversions % 2 else sign
        else:
            idx = int(simplex)
            if not 0 <= idx < c.counts[degree]:
                raise InvalidParameterError(f"simplex index {idx} out of range")
        coeff[idx] += sign
    if degree > 0:
        boundary = coboundary(c, degree - 1).T @ coeff
        if np.any(boundary):
            raise CycleError(f"chain is not closed: boundary touches {np.count_nonzero(boundary)} faces")
    return Chain(degree, coeff)


def fundamental_cycles(c):
    """Closed edge chains, one per edge outside a BFS spanning tree of the 1-skeleton."""
    if c.dimension < 1:
        raise DegreeError("fundamental cycles need edges")
    edges = c.simplices[1].tolist()
    nbrs = [[] for _ in range(c.num_vertices)]
    for i, (a, b) in enumerate(edges):
        nbrs[a].append((b, i))
        nbrs[b].append((a, i))
    parent = {0: None}
    order = [0]
    for u in order:
        for w, i in nbrs[u]:
            if w not in parent:
                parent[w] = (u, i)
                order.append(w)
    tree = {e[1] for e in parent.values() if e is not None}

    def path_to_root(v):
        # signed edge coefficients of the tree path from v to the root
        out = {}
        while parent[v] is not None:
            u, i = parent[v]
            out[i] = out.get(i, 0) + (1 if edges[i] == [v, u] else -1)
            v = u
        return out

    cycles = []
    for i, (a, b) in enumerate(edges):
        if i in tree or a not in parent or b not in parent:
            continue
        coeff = np.zeros(c.counts[1], dtype=np.int64)
        coeff[i] = 1
        # a -> b along the edge, then b -> root -> a through the tree
        for j, s in path_to_root(b).items():
            coeff[j] += s
        for j, s in path_to_root(a).items():
            coeff[j] -= s
        cycles.append(Chain(1, coeff))
    return cycles


def noncontractible_loop(space, c, tol=1e-8):
    """First fundamental cycle pairing nontrivially with the harmonic 1-forms, or ``None``."""
    if space.p != 1:
        raise DegreeError("loop search is implemented for 1-forms")
    V = space.spectral.eigenvectors[:, space.spectral.kernel]
    if V.shape[1] == 0:
        return None
    for chain in fundamental_cycles(c):
        if np.abs(chain.coefficients @ V).max() > tol * max(1.0, np.abs(V).max()):
            return chain
    return None


def contractible_loop(c, index=0):
    """Oriented boundary of one triangle."""
    if c.dimension < 2:
        raise DegreeError("contractible loops need triangles")
    a, b, d = c.simplices[2][index].tolist()
    return make_chain(c, [((a, b), 1), ((b, d), 1), ((d, a), 1)])


def chain_cochain(space, chain):
    """Cochain ``G`` with ``<G, A>_M = sum_gamma A`` for every ``A``."""
    if chain.degree != space.p:
        raise DegreeError(f"chain has degree {chain.degree}, fields have degree {space.p}")
    return chain.coefficients / space.mass


def classical_holonomy(chain, A):
    return float(np.dot(chain.coefficients, A))


def loop_observable(cs, chain):
    """Observable with dual ``0 (+) G`` so that ``w(F*, X) = sum_gamma A`` on oscillating ``X``."""
    space = cs.space
    G = chain_cochain(space, chain)
    return observable(cs, PhasePoint(np.zeros(space.size), G))


def evaluation_observable(cs, index, field="A"):
    """Observable reading one simplex value of ``A`` (dual ``0 (+) e/M``) or of ``E``
    (dual ``-(e/M) (+) 0``)."""
    space = cs.space
    e = np.zeros(space.size)
    e[index] = 1.0 / space.mass[index]
    zero = np.zeros(space.size)
    if field == "A":
        return observable(cs, PhasePoint(zero, e))
    if field == "E":
        return observable(cs, PhasePoint(-e, zero))
    raise InvalidParameterError(f"unknown field {field!r}")


def _split(cs, X):
    cs.space._check(X)
    osc = cs.project(X)
    return osc, X - osc


def field_A_matrix_element(cs, bra, ket):
    """``(A + A')/2 + i L^{-1/2} (E' - E)/2`` with ``'`` on the bra."""
    ob, _ = _split(cs, bra)
    ok, _ = _split(cs, ket)
    values = (bra.A + ket.A) / 2 + 0.5j * (cs.L_minus_half @ (ob.E - ok.E))
    return FieldMatrixElement(values, _overlap(cs, ob, ok))


def field_E_matrix_element(cs, bra, ket):
    """``(E + E')/2 + i L^{1/2} (A - A')/2`` with ``'`` on the bra."""
    ob, _ = _split(cs, bra)
    ok, _ = _split(cs, ket)
    values = (bra.E + ket.E) / 2 + 0.5j * (cs.L_half @ (ok.A - ob.A))
    return FieldMatrixElement(values, _overlap(cs, ob, ok))


def _field_LA(cs, bra, ket):
    el = field_A_matrix_element(cs, bra, ket)
    return FieldMatrixElement(cs.space.L @ el.values, el.normalization)


def _pair(chain, element):
    ratio = complex(np.dot(chain.coefficients, element.values))
    return MatrixElement(ratio * element.normalization, ratio)


def wilson_matrix_element(cs, chain, bra, ket):
    """``<bra| sum_gamma A |ket>``: the chain paired with the field matrix element."""
    if chain.degree != cs.space.p:
        raise DegreeError(f"chain degree {chain.degree} != form degree {cs.space.p}")
    return _pair(chain, field_A_matrix_element(cs, bra, ket))


def electric_flux_matrix_element(cs, chain, bra, ket):
    if chain.degree != cs.space.p:
        raise DegreeError(f"chain degree {chain.degree} != form degree {cs.space.p}")
    return _pair(chain, field_E_matrix_element(cs, bra, ket))


def holonomy_matrix_element(cs, chain, bra, ket):
    """Normal-ordered exponentiated holonomy; ratio ``exp(i * Wilson ratio)``."""
    if chain.degree != cs.space.p:
        raise DegreeError(f"chain degree {chain.degree} != form degree {cs.space.p}")
    el = field_A_matrix_element(cs, bra, ket)
    ratio = cmath.exp(1j * _pair(chain, el).ratio)
    return MatrixElement(ratio * el.normalization, ratio)


def holonomy_as_normal_weyl(cs, chain, bra, ket):
    """The same element through ``:W(-F_gamma):`` (oscillating labels only)."""
    return normal_weyl_matrix_element(cs, -loop_observable(cs, chain), bra, ket)


def _max_abs(x):
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def verify_quantum_maxwell(cs, bra, ket, t, step=1e-4):
    """Finite-difference residuals of the two vacuum Maxwell equations for raw elements.

    Returns ``(r_A, r_E)``: the largest entrywise mismatch of
    ``d/dt <X'(t)|A|X(t)>`` against ``<X'(t)|E|X(t)>`` and of
    ``d/dt <X'(t)|E|X(t)>`` against ``-<X'(t)|L A|X(t)>``.
    """
    space = cs.space

    def at(s):
        return space.evolve(bra, s), space.evolve(ket, s)

    b_p, k_p = at(t + step)
    b_m, k_m = at(t - step)
    b_0, k_0 = at(t)
    dA = (field_A_matrix_element(cs, b_p, k_p).raw - field_A_matrix_element(cs, b_m, k_m).raw) / (2 * step)
    dE = (field_E_matrix_element(cs, b_p, k_p).raw - field_E_matrix_element(cs, b_m, k_m).raw) / (2 * step)
    r_A = _max_abs(dA - field_E_matrix_element(cs, b_0, k_0).raw)
    r_E = _max_abs(dE + _field_LA(cs, b_0, k_0).raw)
    return r_A, r_E


def verify_wilson_corollary(cs, chain, bra, ket, t, step=1e-4):
    """Residual of ``d/dt hol = i (flux of E) exp(i Wilson)`` on ratios, by central differences."""
    space = cs.space

    def hol(s):
        return holonomy_matrix_element(cs, chain, space.evolve(bra, s), space.evolve(ket, s)).ratio

    lhs = (hol(t + step) - hol(t - step)) / (2 * step)
    b0, k0 = space.evolve(bra, t), space.evolve(ket, t)
    flux = electric_flux_matrix_element(cs, chain, b0, k0).ratio
    wil = wilson_matrix_element(cs, chain, b0, k0).ratio
    rhs = 1j * flux * cmath.exp(1j * wil)
    return abs(lhs - rhs)
