"""Twisted derivatives, their metric adjoints, twisted Laplacians and spectral calculus.

All operators are dense ``numpy`` arrays.  Mass matrices are diagonal, so they
are carried around as 1-D weight vectors and only expanded when a caller asks
for a matrix.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .complex import coboundary, twist_coefficient, twist_weights
from .errors import AssemblyError, DegreeError, DomainError, MetricError, NumericalError

__all__ = [
    "OperatorBundle",
    "SpectralData",
    "assemble",
    "twisted_derivative",
    "adjoint",
    "laplacian",
    "spectral_decomposition",
    "apply_function",
    "zero_threshold",
]

KERNEL_RELATIVE = 1e-9
KERNEL_ABSOLUTE = 1e-14


def zero_threshold(lam_max):
    return max(KERNEL_RELATIVE * lam_max, KERNEL_ABSOLUTE)


def _weights(M):
    M = np.asarray(M, dtype=float)
    if M.ndim == 2:
        if not np.array_equal(M, np.diag(np.diag(M))):
            raise MetricError("mass matrices must be diagonal")
        M = np.diag(M)
    if np.any(~(M > 0)):
        raise MetricError("mass matrix is not positive definite")
    return M


def twisted_derivative(d_k, E_k, E_k1):
    """``E_{k+1} d_k E_k^{-1}`` for diagonal twist weights given as vectors or matrices."""
    E_k = np.diag(E_k) if np.ndim(E_k) == 2 else np.asarray(E_k, dtype=float)
    E_k1 = np.diag(E_k1) if np.ndim(E_k1) == 2 else np.asarray(E_k1, dtype=float)
    d_k = np.asarray(d_k)
    if d_k.shape != (len(E_k1), len(E_k)):
        raise AssemblyError(f"d_k has shape {d_k.shape}, twist weights give {(len(E_k1), len(E_k))}")
    return E_k1[:, None] * d_k / E_k[None, :]


def adjoint(D_k, M_k, M_k1):
    """Metric adjoint ``M_k^{-1} D_k^T M_{k+1}``."""
    w_k, w_k1 = _weights(M_k), _weights(M_k1)
    if D_k.shape != (len(w_k1), len(w_k)):
        raise AssemblyError("adjoint: shape mismatch between D_k and mass matrices")
    return D_k.T * w_k1[None, :] / w_k[:, None]


@dataclass(frozen=True, eq=False)
class OperatorBundle:
    """Every operator of one ``(mesh, p, phi)`` scenario.

    ``d[k]``, ``D[k]`` and ``Dstar[k]`` are indexed by ``k`` in ``0..n-1``;
    the accessors :meth:`Dk` and :meth:`Dstark` also answer for ``k = -1``
    and ``k = n`` with zero operators of the right shape.
    """

    n: int
    p: int
    coefficient: float
    counts: tuple
    d: tuple
    M: tuple
    E: tuple
    D: tuple
    Dstar: tuple

    def Dk(self, k):
        if k == -1:
            return np.zeros((self.counts[0], 0))
        if k == self.n:
            return np.zeros((0, self.counts[self.n]))
        if not 0 <= k < self.n:
            raise DegreeError(f"no twisted derivative of degree {k}")
        return self.D[k]

    def Dstark(self, k):
        if k == -1:
            return np.zeros((0, self.counts[0]))
        if k == self.n:
            return np.zeros((self.counts[self.n], 0))
        if not 0 <= k < self.n:
            raise DegreeError(f"no adjoint of degree {k}")
        return self.Dstar[k]

    def mass(self, k):
        return self.M[k]

    def inner(self, k, x, y):
        """``<x, y>_{M_k}``; accepts complex arguments (conjugate-linear in ``x``)."""
        return np.vdot(x, self.M[k] * y)

    def L(self, k):
        return laplacian(self, k)


def assemble(mesh, p, coefficient=None):
    """Build the operator bundle for form degree ``p`` on ``mesh``.

    ``coefficient`` overrides the twist exponent, which defaults to
    ``(n - 2p - 1) / 2``.
    """
    c, m = mesh.complex, mesh.metric
    n = c.dimension
    if not 0 <= p <= n:
        raise DegreeError(f"form degree {p} outside [0, {n}]")
    if coefficient is None:
        coefficient = twist_coefficient(n, p)
    with np.errstate(over="ignore", under="ignore"):
        E = twist_weights(c, m, coefficient)
    for k, w in enumerate(E):
        if not np.all(np.isfinite(w) & (w > 0)):
            raise NumericalError(f"twist weights of degree {k} overflow or underflow; "
                                 f"|coefficient * phi| is too large for double precision")
    M = tuple(_weights(v) for v in m.dual_volumes)
    d = tuple(coboundary(c, k) for k in range(n))
    D = tuple(twisted_derivative(d[k], E[k], E[k + 1]) for k in range(n))
    Dstar = tuple(adjoint(D[k], M[k], M[k + 1]) for k in range(n))
    return OperatorBundle(n=n, p=p, coefficient=float(coefficient), counts=c.counts,
                          d=d, M=M, E=tuple(E), D=D, Dstar=Dstar)


def laplacian(bundle, k):
    """Twisted Laplacian ``D_k^* D_k + D_{k-1} D_{k-1}^*`` on degree-``k`` cochains."""
    if not 0 <= k <= bundle.n:
        raise DegreeError(f"no Laplacian in degree {k}")
    up = bundle.Dstark(k) @ bundle.Dk(k)
    down = bundle.Dk(k - 1) @ bundle.Dstark(k - 1)
    return up + down


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenpairs of an operator that is self-adjoint for the diagonal inner product ``mass``.

    ``eigenvectors`` has M-orthonormal columns.  Eigenvalues below
    ``zero_threshold`` form the kernel; the functional calculus evaluates
    functions there at exactly zero.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mass: np.ndarray
    zero_threshold: float

    @property
    def kernel(self):
        return self.eigenvalues < self.zero_threshold

    @property
    def kernel_dimension(self):
        return int(np.count_nonzero(self.kernel))

    @property
    def clean_eigenvalues(self):
        """Eigenvalues with the kernel set to exactly zero."""
        return np.where(self.kernel, 0.0, self.eigenvalues)

    def margin(self):
        """Smallest nonkernel eigenvalue over the largest kernel magnitude."""
        ker = np.abs(self.eigenvalues[self.kernel])
        rest = self.eigenvalues[~self.kernel]
        if len(rest) == 0:
            return float("inf")
        if len(ker) == 0:
            return float("inf")
        top = ker.max()
        return float("inf") if top == 0 else float(rest.min() / top)

    def coefficients(self, x):
        """Expansion coefficients ``<v_i, x>_M``."""
        return self.eigenvectors.T @ (self.mass * x)

    def synthesize(self, coeffs):
        return self.eigenvectors @ coeffs

    def apply(self, fn, x):
        return apply_function(self, fn, x)

    def power(self, alpha, x):
        """``L^alpha x``; negative powers act as pseudo-inverses (zero on the kernel)."""
        vals = np.ones_like(self.eigenvalues)
        if alpha != 0:
            pos = ~self.kernel
            vals = np.zeros_like(self.eigenvalues)
            vals[pos] = self.eigenvalues[pos] ** alpha
        c = self.coefficients(x)
        return self.synthesize(vals[:, None] * c if c.ndim == 2 else vals * c)

    def matrix(self, fn):
        """Dense matrix of ``fn(L)``."""
        vals = _evaluate(fn, self.clean_eigenvalues)
        return (self.eigenvectors * vals[None, :]) @ (self.eigenvectors.T * self.mass[None, :])


def spectral_decomposition(L, M, threshold=None):
    """Solve the M-symmetric eigenproblem ``L v = lambda v`` with ``<v_i, v_j>_M = delta_ij``.

    With ``M`` diagonal the similarity ``M^{1/2} L M^{-1/2}`` is symmetric, so a
    dense ``eigh`` suffices.  ``threshold`` fixes the kernel cut; by default it
    is ``max(1e-9 * lambda_max, 1e-14)``.
    """
    w = _weights(M)
    L = np.asarray(L, dtype=float)
    if L.shape != (len(w), len(w)):
        raise AssemblyError("operator and mass matrix sizes differ")
    if len(w) == 0:
        return SpectralData(np.zeros(0), np.zeros((0, 0)), w, KERNEL_ABSOLUTE)
    s = np.sqrt(w)
    S = s[:, None] * L / s[None, :]
    asym = np.abs(S - S.T).max()
    scale = max(np.abs(S).max(), 1.0)
    if asym > 1e-8 * scale:
        raise NumericalError(f"operator is not self-adjoint in the given inner product "
                             f"(asymmetry {asym:.3e} at scale {scale:.3e})")
    try:
        lam, U = scipy.linalg.eigh((S + S.T) / 2)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed on {S.shape} problem: {exc}") from exc
    if not np.all(np.isfinite(lam)):
        raise NumericalError("eigensolver returned non-finite eigenvalues")
    if threshold is None:
        threshold = zero_threshold(max(np.abs(lam).max(), 0.0))
    return SpectralData(lam, U / s[:, None], w, float(threshold))


def _evaluate(fn, lam):
    try:
        with np.errstate(all="ignore"):
            vals = np.asarray(fn(lam))
    except (ZeroDivisionError, ValueError, FloatingPointError) as exc:
        raise DomainError(f"function undefined on the spectrum: {exc}") from exc
    vals = np.broadcast_to(vals, lam.shape)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise DomainError(f"function undefined at eigenvalue(s) {lam[bad][:5].tolist()}")
    return vals


def apply_function(s, fn, x):
    """``sum_i fn(lambda_i) v_i <v_i, x>_M`` with kernel eigenvalues passed as exact zeros.

    ``fn`` must accept an array of eigenvalues.
    """
    vals = _evaluate(fn, s.clean_eigenvalues)
    return s.synthesize(vals * s.coefficients(x))
