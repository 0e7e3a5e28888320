"""Complex structure on the oscillating sector and coherent-state matrix elements.

Conventions (fixed here, used everywhere):

* symplectic form ``w(X, Y) = <E_X, A_Y> - <E_Y, A_X>``;
* complex structure ``J(A, E) = (L^{-1/2} E, -L^{1/2} A)``, so that
  ``h(X, Y) = w(X, JY) = <A_X, L^{1/2} A_Y> + <E_X, L^{-1/2} E_Y>`` is positive;
* complex inner product ``<X, Y> = h(X, Y) + i w(X, Y)``, antilinear in ``X``;
* coherent-state overlap ``<X|Y> = exp(w(Y, X) / 2i) exp(-|Y - X|^2 / 4)``;
* Weyl action ``W(F)|Y> = exp(w(F*, Y) / 2i) |Y + F*>``, with
  ``W(F) W(G) = exp(w(F*, G*) / 2i) W(F + G)``.

Observables are carried by their phase-space duals ``F*`` with
``F(X) = w(F*, X)``.  All matrix elements come back as ``(raw, ratio)``
pairs, ``ratio = raw / <bra|ket>``.
"""

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import comb

from .dynamics import PhasePoint
from .errors import InvalidParameterError, SectorError

__all__ = [
    "ComplexStructure",
    "Observable",
    "MatrixElement",
    "complex_structure",
    "observable",
    "characteristic_functional",
    "coherent_overlap",
    "weyl_apply",
    "weyl_matrix_element",
    "weyl_product_matrix_element",
    "heisenberg_matrix_element",
    "annihilation_ratio",
    "wick_power_matrix_element",
    "wick_binomial_oracle",
    "normal_weyl_matrix_element",
    "heisenberg_by_difference",
    "variance_by_difference",
    "MAX_WICK_POWER",
]

MAX_WICK_POWER = 32
LABEL_TOLERANCE = 1e-8


class MatrixElement(NamedTuple):
    raw: complex
    ratio: complex


@dataclass(frozen=True, eq=False)
class Observable:
    """Linear observable ``X -> w(Fstar, X)`` restricted to the oscillating sector."""

    Fstar: PhasePoint

    def __neg__(self):
        return Observable(-self.Fstar)

    def __add__(self, other):
        return Observable(self.Fstar + other.Fstar)

    def __mul__(self, s):
        return Observable(s * self.Fstar)

    __rmul__ = __mul__


class ComplexStructure:
    """``J``, the positive form ``h`` and the complex inner product on the oscillating sector.

    Powers ``L^{+-1/4}`` and ``L^{+-1/2}`` are precomputed as dense matrices;
    negative powers are pseudo-inverses, which is exact on the oscillating
    sector where every label lives.
    """

    def __init__(self, space):
        s = space.spectral
        if space.split.dims[2] == 0:
            raise SectorError("oscillating sector is empty")
        self.space = space
        self.P = space.split.P_coexact
        lam = s.clean_eigenvalues
        osc = ~s.kernel

        def fn(alpha):
            def f(x):
                out = np.zeros_like(x)
                out[osc] = x[osc] ** alpha
                return out
            return s.matrix(f)

        self.L_half = fn(0.5)
        self.L_minus_half = fn(-0.5)
        self.L_quarter = fn(0.25)
        self.L_minus_quarter = fn(-0.25)
        self.L = s.matrix(lambda x: x)
        self._lam = lam

    def inner_real(self, x, y):
        return self.space.inner(x, y)

    def J(self, X):
        return PhasePoint(self.L_minus_half @ X.E, -(self.L_half @ X.A))

    def K(self, X):
        """Generator of the flow, ``(E, -L A)``."""
        return PhasePoint(X.E.copy(), -(self.L @ X.A))

    def omega(self, X, Y):
        return self.space.symplectic(X, Y)

    def h(self, X, Y):
        ip = self.space.inner
        return ip(X.A, self.L_half @ Y.A) + ip(X.E, self.L_minus_half @ Y.E)

    def norm_sq(self, X):
        return self.h(X, X)

    def inner(self, X, Y):
        return complex(self.h(X, Y), self.omega(X, Y))

    def project(self, X):
        """Oscillating component of any phase point."""
        return PhasePoint(self.P @ X.A, self.P @ X.E)

    def check_label(self, X):
        total = self.space.norm(X)
        if total and self.space.norm(X - self.project(X)) > LABEL_TOLERANCE * total:
            raise SectorError("coherent labels must lie in the oscillating sector")
        return X


def complex_structure(space):
    return ComplexStructure(space)


def observable(cs, Fstar):
    """Observable with dual ``Fstar``, projected onto the oscillating sector.

    The projection leaves ``w(Fstar, X)`` unchanged for every oscillating ``X``.
    """
    return Observable(cs.project(Fstar))


def characteristic_functional(cs, F):
    return math.exp(-cs.norm_sq(F.Fstar) / 4)


def _phase(x):
    """``exp(x / 2i)`` for real ``x``."""
    return cmath.exp(-0.5j * x)


def coherent_overlap(cs, bra, ket):
    cs.check_label(bra)
    cs.check_label(ket)
    return _overlap(cs, bra, ket)


def _overlap(cs, bra, ket):
    d = ket - bra
    return _phase(cs.omega(ket, bra)) * math.exp(-cs.norm_sq(d) / 4)


def weyl_apply(cs, F, ket):
    """``W(F)|ket> = phase |label>``; returns ``(phase, label)``."""
    return _phase(cs.omega(F.Fstar, ket)), ket + F.Fstar


def weyl_matrix_element(cs, F, bra, ket):
    """``<bra|W(F)|ket>`` in closed form."""
    f, g, h = bra, F.Fstar, ket
    raw = (_phase(cs.omega(g, h + f)) * _phase(cs.omega(h, f))
           * math.exp(-cs.norm_sq(h + g - f) / 4))
    return MatrixElement(raw, raw / coherent_overlap(cs, bra, ket))


def weyl_product_matrix_element(cs, F, G, bra, ket):
    """``<bra|W(F) W(G)|ket>`` by letting ``W(G)`` act on the ket first."""
    phase, moved = weyl_apply(cs, G, ket)
    raw = phase * weyl_matrix_element(cs, F, bra, moved).raw
    return MatrixElement(raw, raw / coherent_overlap(cs, bra, ket))


def heisenberg_matrix_element(cs, F, bra, ket):
    g = F.Fstar
    ratio = 0.5j * (cs.inner(bra, g) - cs.inner(g, ket))
    return MatrixElement(ratio * coherent_overlap(cs, bra, ket), ratio)


def annihilation_ratio(cs, F, bra, ket):
    """``<bra|a(F)|ket> / <bra|ket>`` assembled from Heisenberg ratios of ``F`` and ``JF``."""
    r1 = heisenberg_matrix_element(cs, F, bra, ket).ratio
    r2 = heisenberg_matrix_element(cs, Observable(cs.J(F.Fstar)), bra, ket).ratio
    return (r1 + 1j * r2) / math.sqrt(2)


def _check_power(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
        raise InvalidParameterError("Wick power must be a nonnegative integer")
    if n > MAX_WICK_POWER:
        raise InvalidParameterError(f"Wick power {n} exceeds {MAX_WICK_POWER}")


def wick_power_matrix_element(cs, F, n, bra, ket):
    _check_power(n)
    ratio = heisenberg_matrix_element(cs, F, bra, ket).ratio ** int(n)
    return MatrixElement(ratio * coherent_overlap(cs, bra, ket), ratio)


def wick_binomial_oracle(cs, F, n, bra, ket):
    """Normal-ordered expansion in creation/annihilation eigenvalues, summed term by term."""
    _check_power(n)
    g = F.Fstar
    create = cs.inner(bra, g) / (-1j * math.sqrt(2))
    annihilate = cs.inner(g, ket) / (1j * math.sqrt(2))
    total = sum(comb(n, m, exact=True) * create ** m * annihilate ** (n - m) for m in range(n + 1))
    ratio = total / 2 ** (n / 2)
    return MatrixElement(ratio * coherent_overlap(cs, bra, ket), ratio)


def normal_weyl_matrix_element(cs, F, bra, ket):
    """``<bra| :W(F): |ket>`` with ratio ``exp(-i * Heisenberg ratio)``."""
    ratio = cmath.exp(-1j * heisenberg_matrix_element(cs, F, bra, ket).ratio)
    return MatrixElement(ratio * coherent_overlap(cs, bra, ket), ratio)


def heisenberg_by_difference(cs, F, bra, ket, step=1e-4):
    """``i d/dt <bra|W(tF)|ket>`` at ``t = 0`` by central differences."""
    plus = weyl_matrix_element(cs, step * F, bra, ket).raw
    minus = weyl_matrix_element(cs, -step * F, bra, ket).raw
    return 1j * (plus - minus) / (2 * step)


def variance_by_difference(cs, F, step=1e-3):
    """``-d^2/dt^2 <0|W(tF)|0>`` at ``t = 0`` by the fourth-order five-point stencil."""
    zero = cs.space.zero()
    f = [weyl_matrix_element(cs, s * F, zero, zero).raw.real for s in (-2 * step, -step, 0.0, step, 2 * step)]
    return -(-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * step ** 2)
