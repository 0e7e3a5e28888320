"""Classical phase space of p-form electromagnetism and its exact time evolution.

A phase point is a pair ``(A, E)`` of degree-``p`` cochains.  ``A`` is the
gauge-fixed representative of its class (M-orthogonal to exact cochains) and
``E`` satisfies the Gauss constraint ``Dstar_{p-1} E = 0``; both therefore
live in ``harmonic (+) coexact``.  The harmonic part is the free sector, the
coexact part the oscillating sector.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AssemblyError, SectorError
from .kodaira import kodaira_split
from .operators import spectral_decomposition

__all__ = ["PhasePoint", "SectorSplit", "PhaseSpace"]

SECTOR_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class PhasePoint:
    A: np.ndarray
    E: np.ndarray

    def __add__(self, other):
        return PhasePoint(self.A + other.A, self.E + other.E)

    def __sub__(self, other):
        return PhasePoint(self.A - other.A, self.E - other.E)

    def __neg__(self):
        return PhasePoint(-self.A, -self.E)

    def __mul__(self, s):
        return PhasePoint(s * self.A, s * self.E)

    __rmul__ = __mul__

    def stack(self):
        return np.concatenate([self.A, self.E])

    @classmethod
    def unstack(cls, v):
        half = len(v) // 2
        return cls(v[:half], v[half:])


@dataclass(frozen=True, eq=False)
class SectorSplit:
    oscillating: PhasePoint
    free: PhasePoint


class PhaseSpace:
    """Phase space over one operator bundle, with degree ``p = bundle.p``.

    Spectral data of ``L_p`` and the Kodaira projectors are computed once on
    construction; every method afterwards is a pure function of its inputs.
    """

    def __init__(self, bundle):
        self.bundle = bundle
        self.p = p = bundle.p
        self.mass = bundle.M[p]
        self.size = bundle.counts[p]
        self.L = bundle.L(p)
        self.spectral = spectral_decomposition(self.L, self.mass)
        self.split = kodaira_split(bundle, p, self.spectral)
        self._gauge = np.eye(self.size) - self.split.P_exact
        lam = self.spectral.clean_eigenvalues
        self._free_modes = self.spectral.kernel
        self._freq = np.sqrt(np.where(self._free_modes, 0.0, lam))

    # -- inner products ---------------------------------------------------

    def inner(self, x, y):
        return float(np.dot(x, self.mass * y))

    def norm(self, X):
        """Phase-space Hilbert norm ``sqrt(<A,A> + <E,E>)``."""
        return float(np.sqrt(self.inner(X.A, X.A) + self.inner(X.E, X.E)))

    def _check(self, X):
        if X.A.shape != (self.size,) or X.E.shape != (self.size,):
            raise AssemblyError(f"phase point has wrong size for {self.size} degree-{self.p} simplices")

    # -- constraints --------------------------------------------------------

    def project_gauss(self, E_raw):
        """M-orthogonal projection of ``E_raw`` onto ``ker Dstar_{p-1}``."""
        return self._gauge @ np.asarray(E_raw, dtype=float)

    def gauge_fix(self, A_raw):
        """Minimum-norm representative of the gauge class of ``A_raw``."""
        return self._gauge @ np.asarray(A_raw, dtype=float)

    def point(self, A_raw, E_raw):
        """Normalize raw data into a phase point (gauge fix ``A``, Gauss-project ``E``)."""
        A = np.asarray(A_raw, dtype=float)
        E = np.asarray(E_raw, dtype=float)
        if A.shape != (self.size,) or E.shape != (self.size,):
            raise AssemblyError(f"expected cochains of length {self.size}")
        return PhasePoint(self.gauge_fix(A), self.project_gauss(E))

    def zero(self):
        return PhasePoint(np.zeros(self.size), np.zeros(self.size))

    def random_point(self, rng, scale=1.0, sector=None):
        """Standard-normal raw components, projected; ``sector`` restricts to one sector."""
        X = self.point(scale * rng.standard_normal(self.size), scale * rng.standard_normal(self.size))
        if sector is None:
            return X
        parts = self.split_sectors(X)
        return getattr(parts, sector)

    def gauss_residual(self, X):
        return float(np.linalg.norm(self.bundle.Dstark(self.p - 1) @ X.E))

    # -- energy and symplectic form ---------------------------------------

    def hamiltonian(self, X):
        """``(<E, E> + <D_p A, D_p A>) / 2``."""
        self._check(X)
        DA = self.bundle.Dk(self.p) @ X.A
        upper = self.bundle.M[self.p + 1] if self.p < self.bundle.n else np.zeros(0)
        return 0.5 * (self.inner(X.E, X.E) + float(np.dot(DA, upper * DA)))

    def symplectic(self, X, Y):
        """``<E, A'> - <E', A>``."""
        self._check(X)
        self._check(Y)
        return self.inner(X.E, Y.A) - self.inner(Y.E, X.A)

    # -- sectors -------------------------------------------------------------

    def split_sectors(self, X):
        P = self.split.P_harmonic
        free = PhasePoint(P @ X.A, P @ X.E)
        return SectorSplit(oscillating=X - free, free=free)

    def free_fraction(self, X):
        """Norm of the free part relative to the norm of ``X`` (0 for ``X = 0``)."""
        total = self.norm(X)
        return 0.0 if total == 0 else self.norm(self.split_sectors(X).free) / total

    # -- evolution -----------------------------------------------------------

    def evolve_oscillating(self, X, t):
        """Spectral synthesis of the harmonic-oscillator flow on the nonzero spectrum of ``L_p``."""
        self._check(X)
        if self.free_fraction(X) > SECTOR_TOLERANCE:
            raise SectorError("phase point has free-sector components; use evolve()")
        return self._oscillating_flow(X, t)

    def _oscillating_flow(self, X, t):
        # kernel modes are dropped, so any free component is discarded
        s = self.spectral
        a, e = s.coefficients(X.A), s.coefficients(X.E)
        w = self._freq
        osc = ~self._free_modes
        c, sn = np.cos(t * w), np.sin(t * w)
        sinc = np.zeros_like(w)
        sinc[osc] = sn[osc] / w[osc]
        a_t = np.where(osc, c * a + sinc * e, 0.0)
        e_t = np.where(osc, -w * sn * a + c * e, 0.0)
        return PhasePoint(s.synthesize(a_t), s.synthesize(e_t))

    def evolve_free(self, X, t):
        """Shear ``A + tE``, ``E`` fixed."""
        self._check(X)
        return PhasePoint(X.A + t * X.E, X.E.copy())

    def evolve(self, X, t):
        parts = self.split_sectors(X)
        self._check(X)
        return self._oscillating_flow(parts.oscillating, t) + self.evolve_free(parts.free, t)

    # -- propagators as matrices ---------------------------------------------

    def sector_basis(self, sector):
        """M-orthonormal basis (columns) of the free or oscillating sector."""
        if sector == "free":
            P = self.split.P_harmonic
        elif sector == "oscillating":
            P = self.split.P_coexact
        else:
            raise ValueError(f"unknown sector {sector!r}")
        root = np.sqrt(self.mass)
        U, sig, _ = np.linalg.svd(root[:, None] * P / root[None, :])
        return U[:, sig > 0.5] / root[:, None]

    def propagator(self, sector, t):
        """Matrix of the time-``t`` flow on ``sector`` in M-orthonormal ``(A, E)`` coordinates.

        The result acts on coefficient vectors ``(a, e)`` with respect to
        :meth:`sector_basis`, so its spectral norm is the operator norm for
        the phase-space Hilbert norm.
        """
        V = self.sector_basis(sector)
        m = V.shape[1]
        T = np.zeros((2 * m, 2 * m))
        for j in range(2 * m):
            coeff = np.zeros(2 * m)
            coeff[j] = 1.0
            X = PhasePoint(V @ coeff[:m], V @ coeff[m:])
            Y = self.evolve_oscillating(X, t) if sector == "oscillating" else self.evolve_free(X, t)
            T[:m, j] = V.T @ (self.mass * Y.A)
            T[m:, j] = V.T @ (self.mass * Y.E)
        return T
