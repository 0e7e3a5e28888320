"""Orthogonal exact / harmonic / coexact decomposition of cochains, and Betti numbers."""

import warnings
from dataclasses import dataclass

import numpy as np

from .complex import coboundary
from .errors import DegreeError
from .operators import KERNEL_ABSOLUTE, KERNEL_RELATIVE, spectral_decomposition

__all__ = [
    "KodairaSplit",
    "KodairaAmbiguityWarning",
    "kodaira_split",
    "harmonic_dimension",
    "betti",
    "betti_numbers",
    "integer_rank",
    "range_projector",
]

# below this kernel/nonkernel eigenvalue ratio the kernel count is reported as fragile
AMBIGUOUS_MARGIN = 1e3


class KodairaAmbiguityWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class KodairaSplit:
    """M-orthogonal projectors onto ``ran D_{k-1}``, ``ker L_k`` and ``ran D_k^*``."""

    degree: int
    P_exact: np.ndarray
    P_harmonic: np.ndarray
    P_coexact: np.ndarray
    mass: np.ndarray
    margin: float
    smallest_nonkernel: float
    largest_kernel: float

    @property
    def dims(self):
        return tuple(int(round(np.trace(P))) for P in
                     (self.P_exact, self.P_harmonic, self.P_coexact))

    @property
    def projectors(self):
        return self.P_exact, self.P_harmonic, self.P_coexact

    def completeness_residual(self):
        total = self.P_exact + self.P_harmonic + self.P_coexact
        return float(np.abs(total - np.eye(len(total))).max())

    def idempotence_residual(self):
        return max(float(np.abs(P @ P - P).max()) for P in self.projectors)

    def orthogonality_residual(self):
        """Largest entry of ``P_i P_j`` and of ``P_i^* P_j`` (M-adjoint) over distinct pairs."""
        out = 0.0
        Ps = self.projectors
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                adj = (Ps[i].T * self.mass[None, :]) / self.mass[:, None]
                out = max(out, float(np.abs(Ps[i] @ Ps[j]).max()),
                          float(np.abs(adj @ Ps[j]).max()))
        return out


def range_projector(B, mass):
    """M-orthogonal projector onto the column space of ``B``.

    Orthonormalizes ``M^{1/2} B`` by SVD; singular values below
    ``sqrt(1e-9) * sigma_max`` (the square root of the eigenvalue kernel cut)
    are treated as zero.
    """
    s = np.sqrt(mass)
    if B.shape[1] == 0:
        return np.zeros((len(mass), len(mass)))
    U, sig, _ = np.linalg.svd(s[:, None] * B, full_matrices=False)
    if len(sig) == 0 or sig[0] == 0:
        return np.zeros((len(mass), len(mass)))
    cut = max(np.sqrt(KERNEL_RELATIVE) * sig[0], np.sqrt(KERNEL_ABSOLUTE))
    Q = U[:, sig > cut]
    return (Q / s[:, None]) @ (Q.T * s[None, :])


def kodaira_split(bundle, k, spectral=None):
    if not 0 <= k <= bundle.n:
        raise DegreeError(f"no cochains of degree {k}")
    mass = bundle.M[k]
    if spectral is None:
        spectral = spectral_decomposition(bundle.L(k), mass)
    P_exact = range_projector(bundle.Dk(k - 1), mass)
    P_coexact = range_projector(bundle.Dstark(k), mass)
    V = spectral.eigenvectors[:, spectral.kernel]
    P_harm = V @ (V.T * mass[None, :])

    lam = spectral.eigenvalues
    ker = np.abs(lam[spectral.kernel])
    rest = lam[~spectral.kernel]
    largest = float(ker.max()) if len(ker) else 0.0
    smallest = float(rest.min()) if len(rest) else float("inf")
    margin = spectral.margin()
    if margin < AMBIGUOUS_MARGIN:
        warnings.warn(f"degree-{k} kernel is ambiguous: largest kernel eigenvalue {largest:.3e}, "
                      f"smallest nonkernel {smallest:.3e}, threshold {spectral.zero_threshold:.3e}",
                      KodairaAmbiguityWarning, stacklevel=2)
    return KodairaSplit(k, P_exact, P_harm, P_coexact, mass, margin, smallest, largest)


def harmonic_dimension(bundle, k, spectral=None):
    """Number of eigenvalues of ``L_k`` below the kernel threshold."""
    if spectral is None:
        spectral = spectral_decomposition(bundle.L(k), bundle.M[k])
    return spectral.kernel_dimension


def integer_rank(A):
    """Exact rank of an integer matrix by fraction-free (Bareiss) elimination.

    Entries are Python integers, so intermediate growth never overflows.
    """
    rows = [[int(x) for x in row] for row in np.asarray(A).tolist()]
    if not rows or not rows[0]:
        return 0
    m, n = len(rows), len(rows[0])
    rank, prev = 0, 1
    for col in range(n):
        pivot = next((r for r in range(rank, m) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank]
        for r in range(rank + 1, m):
            row = rows[r]
            f = row[col]
            if f == 0:
                rows[r] = [(p[col] * x) // prev for x in row]
                continue
            rows[r] = [(p[col] * x - f * y) // prev for x, y in zip(row, p)]
        prev = p[col]
        rank += 1
        if rank == m:
            break
    return rank


def betti(c, k):
    """``dim ker d_k - rank d_{k-1}`` from exact integer ranks."""
    if not 0 <= k <= c.dimension:
        raise DegreeError(f"no cochains of degree {k}")
    rank_out = integer_rank(coboundary(c, k)) if k < c.dimension else 0
    rank_in = integer_rank(coboundary(c, k - 1)) if k > 0 else 0
    return c.counts[k] - rank_out - rank_in


def betti_numbers(c):
    ranks = [integer_rank(coboundary(c, k)) for k in range(c.dimension)]
    ranks = [0] + ranks + [0]
    return tuple(c.counts[k] - ranks[k + 1] - ranks[k] for k in range(c.dimension + 1))
