"""Invariant suite covering every module, run against one scenario.

Each check records a measured value, a bound and a direction.  Upper bounds
(``kind="max"``) are multiplied by the tolerance scale; lower bounds
(``kind="min"``) and exact integer comparisons are not, because scaling them
would change what is being asserted rather than how strictly.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .complex import coboundary, generate_mesh
from .dynamics import PhaseSpace
from .errors import SectorError
from .kodaira import KodairaAmbiguityWarning, betti_numbers, kodaira_split
from .operators import apply_function, assemble, spectral_decomposition
from .quantization import (
    Observable,
    annihilation_ratio,
    characteristic_functional,
    coherent_overlap,
    complex_structure,
    heisenberg_by_difference,
    heisenberg_matrix_element,
    normal_weyl_matrix_element,
    observable,
    variance_by_difference,
    weyl_matrix_element,
    weyl_product_matrix_element,
    wick_binomial_oracle,
    wick_power_matrix_element,
)
from .wilson import (
    Chain,
    contractible_loop,
    holonomy_as_normal_weyl,
    holonomy_matrix_element,
    make_chain,
    noncontractible_loop,
    verify_quantum_maxwell,
    verify_wilson_corollary,
    wilson_matrix_element,
)

__all__ = ["Check", "run_suite", "suite_passed", "default_suite"]

ADJOINT_TRIALS = 100
WEYL_TRIPLES = 20
EVOLVE_TIMES = tuple(np.linspace(-10.0, 10.0, 21))
MARGIN_MIN = 1e6


@dataclass(frozen=True)
class Check:
    module: str
    name: str
    value: float
    bound: float
    kind: str  # "max", "min" or "exact"
    passed: bool
    note: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        op = {"max": "<", "min": ">", "exact": "=="}[self.kind]
        tail = f"  ({self.note})" if self.note else ""
        return f"{status}  {self.module}.{self.name}: {self.value:.3e} {op} {self.bound:.3e}{tail}"


class _Recorder:
    def __init__(self, scale):
        self.scale = scale
        self.checks = []

    def upper(self, module, name, value, bound, note=""):
        bound = bound * self.scale
        value = float(value)
        self.checks.append(Check(module, name, value, bound, "max", bool(value < bound), note))

    def lower(self, module, name, value, bound, note=""):
        value = float(value)
        self.checks.append(Check(module, name, value, bound, "min", bool(value > bound), note))

    def exact(self, module, name, value, expected, note=""):
        self.checks.append(Check(module, name, float(value), float(expected), "exact",
                                 bool(value == expected), note))


def _rel(a, b):
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / scale


def _complex_checks(rec, mesh, regenerate):
    c = mesh.complex
    worst = 0
    for k in range(c.dimension - 1):
        worst = max(worst, int(np.abs(coboundary(c, k + 1) @ coboundary(c, k)).max(initial=0)))
    rec.exact("complex", "dd_zero_integer", worst, 0)
    try:
        c.validate()
        rec.exact("complex", "face_closure", 0, 0)
    except ValueError as exc:
        rec.exact("complex", "face_closure", 1, 0, note=str(exc))
    if regenerate is not None:
        again = regenerate()
        same = (all(np.array_equal(a, b) for a, b in zip(c.simplices, again.complex.simplices))
                and all(np.array_equal(a, b) for a, b in
                        zip(mesh.metric.dual_volumes, again.metric.dual_volumes)))
        rec.exact("complex", "deterministic_generation", int(not same), 0)


def _operator_checks(rec, bundle, rng):
    n = bundle.n
    for k in range(n - 1):
        prod = bundle.D[k + 1] @ bundle.D[k]
        scale = max(np.abs(bundle.D[k + 1]).max() * np.abs(bundle.D[k]).max(), 1.0)
        rec.upper("operators", f"DD_zero[{k}]", np.abs(prod).max() / scale, 1e-12)
    for k in range(n):
        worst = 0.0
        for _ in range(ADJOINT_TRIALS):
            a = rng.standard_normal(bundle.counts[k + 1])
            b = rng.standard_normal(bundle.counts[k])
            lhs = np.dot(a, bundle.M[k + 1] * (bundle.D[k] @ b))
            rhs = np.dot(bundle.Dstar[k] @ a, bundle.M[k] * b)
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
        rec.upper("operators", f"adjointness[{k}]", worst, 1e-12, note=f"{ADJOINT_TRIALS} trials")
    spectra = []
    for k in range(n + 1):
        L = bundle.L(k)
        s = spectral_decomposition(L, bundle.M[k])
        spectra.append(s)
        lam_max = max(float(np.abs(s.eigenvalues).max(initial=0.0)), 1e-300)
        rec.upper("operators", f"nonnegativity[{k}]", max(0.0, -s.eigenvalues.min()) / lam_max, 1e-10)
        x = rng.standard_normal(bundle.counts[k])
        want = L @ (L @ x)
        got = apply_function(s, lambda lam: lam ** 2, x)
        rec.upper("operators", f"spectral_mapping[{k}]",
                  np.linalg.norm(got - want) / max(np.linalg.norm(want), 1e-300), 1e-9)
    return spectra


def _kodaira_checks(rec, bundle, complex_, spectra, rng):
    betti = betti_numbers(complex_)
    for k in range(bundle.n + 1):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", KodairaAmbiguityWarning)
            split = kodaira_split(bundle, k, spectra[k])
        rec.exact("kodaira", f"hodge_theorem[{k}]", spectra[k].kernel_dimension, betti[k])
        if spectra[k].kernel_dimension and spectra[k].kernel_dimension < len(spectra[k].eigenvalues):
            rec.lower("kodaira", f"kernel_margin[{k}]", min(split.margin, 1e300), MARGIN_MIN)
        rec.upper("kodaira", f"completeness[{k}]", split.completeness_residual(), 1e-10)
        rec.upper("kodaira", f"orthogonality[{k}]", split.orthogonality_residual(), 1e-10)
        rec.upper("kodaira", f"idempotence[{k}]", split.idempotence_residual(), 1e-10)
        rec.upper("kodaira", f"exact_closed[{k}]", np.abs(bundle.Dk(k) @ split.P_exact).max(initial=0.0), 1e-10)
        x = rng.standard_normal(bundle.counts[k])
        h = split.P_harmonic @ x
        ann = max(np.abs(bundle.Dk(k) @ h).max(initial=0.0), np.abs(bundle.Dstark(k - 1) @ h).max(initial=0.0))
        rec.upper("kodaira", f"harmonic_annihilated[{k}]", ann, 1e-9)


def _dynamics_checks(rec, space, rng, scale):
    if space.split.dims[1] + space.split.dims[2] == 0:
        # every state is pure gauge; drifts would compare roundoff with roundoff
        rec.exact("dynamics", "physical_dimension", 0, 0, note="no gauge-invariant states, flow checks vacuous")
        return
    X = space.random_point(rng, scale)
    Y = space.random_point(rng, scale)
    H0, w0, n0 = space.hamiltonian(X), space.symplectic(X, Y), space.norm(X)
    h_drift = w_drift = gauss = cross = 0.0
    norm_change = 0.0
    for t in EVOLVE_TIMES:
        Xt, Yt = space.evolve(X, t), space.evolve(Y, t)
        h_drift = max(h_drift, _rel(space.hamiltonian(Xt), H0))
        w_drift = max(w_drift, abs(space.symplectic(Xt, Yt) - w0) / max(abs(w0), space.norm(X) * space.norm(Y)))
        gauss = max(gauss, space.gauss_residual(Xt))
        parts = space.split_sectors(X)
        o_t = space.evolve(parts.oscillating, t)
        f_t = space.evolve(parts.free, t)
        cross = max(cross, space.norm(space.split_sectors(o_t).free), space.norm(space.split_sectors(f_t).oscillating))
        norm_change = max(norm_change, abs(space.norm(Xt) - n0) / max(n0, 1e-300))
    rec.upper("dynamics", "hamiltonian_drift", h_drift, 1e-10, note="t in [-10, 10]")
    rec.upper("dynamics", "symplectic_drift", w_drift, 1e-10, note="t in [-10, 10]")
    rec.upper("dynamics", "gauss_constraint", gauss, 1e-9)
    rec.upper("dynamics", "sector_preservation", cross / max(space.norm(X), 1e-300), 1e-10)
    rec.lower("dynamics", "norm_not_preserved", norm_change, 1e-3)

    for sector in ("oscillating", "free"):
        if space.sector_basis(sector).shape[1] == 0:
            continue
        worst = 0.0
        for t, s in ((0.7, 1.3), (-2.0, 3.5), (4.0, -1.5)):
            T = space.propagator(sector, t + s)
            TT = space.propagator(sector, t) @ space.propagator(sector, s)
            worst = max(worst, np.linalg.norm(T - TT, 2) / max(np.linalg.norm(T, 2), 1.0))
        rec.upper("dynamics", f"group_law[{sector}]", worst, 1e-10)
    if space.sector_basis("free").shape[1]:
        for t in (0.0, 1.0, 3.0):
            sq = np.linalg.norm(space.propagator("free", t), 2) ** 2
            slack = min(sq - 1.0, 2.0 + t * t - sq)
            rec.lower("dynamics", f"free_norm_bound[t={t:g}]", slack, -1e-12,
                      note=f"|T_f|^2 = {sq:.6f} in [1, {2 + t * t:g}]")


def _quantization_checks(rec, space, rng, scale):
    try:
        cs = complex_structure(space)
    except SectorError:
        return None
    osc = lambda: space.random_point(rng, scale, "oscillating")  # noqa: E731
    X, Y = osc(), osc()
    JJX = cs.J(cs.J(X))
    rec.upper("quantization", "J_squared", space.norm(JJX + X) / space.norm(X), 1e-10)
    rec.upper("quantization", "J_symplectic",
              abs(cs.omega(cs.J(X), cs.J(Y)) - cs.omega(X, Y)) / (space.norm(X) * space.norm(Y)), 1e-10)
    worst = 0.0
    for t in (0.5, 2.0, -3.0):
        a = cs.J(space.evolve(X, t))
        b = space.evolve(cs.J(X), t)
        worst = max(worst, space.norm(a - b) / space.norm(X))
    rec.upper("quantization", "J_commutes_with_flow", worst, 1e-10)
    rec.lower("quantization", "h_positive", cs.h(X, X) / space.norm(X) ** 2, 0.0)

    worst = 0.0
    for _ in range(WEYL_TRIPLES):
        F, G = observable(cs, osc()), observable(cs, osc())
        bra, ket = osc(), osc()
        lhs = weyl_product_matrix_element(cs, F, G, bra, ket).raw
        phase = np.exp(-0.5j * cs.omega(F.Fstar, G.Fstar))
        rhs = phase * weyl_matrix_element(cs, F + G, bra, ket).raw
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    rec.upper("quantization", "weyl_relations", worst, 1e-12, note=f"{WEYL_TRIPLES} triples")

    F = observable(cs, osc())
    diag = heisenberg_matrix_element(cs, F, X, X).ratio
    rec.upper("quantization", "correspondence", abs(diag - cs.omega(F.Fstar, X)) / max(abs(diag), 1e-300), 1e-12)
    fd = heisenberg_by_difference(cs, F, Y, X, step=1e-4)
    rec.upper("quantization", "heisenberg_derivative", abs(fd - heisenberg_matrix_element(cs, F, Y, X).raw), 1e-6)
    want = cs.norm_sq(F.Fstar) / 2
    rec.upper("quantization", "variance", abs(variance_by_difference(cs, F) - want), 1e-5,
              note=f"|F*|^2/2 = {want:.4f}")
    worst = 0.0
    for t in (1.0, -4.0, 9.0):
        a = coherent_overlap(cs, space.evolve(Y, t), space.evolve(X, t))
        worst = max(worst, abs(a - coherent_overlap(cs, Y, X)))
    rec.upper("quantization", "unitarity", worst, 1e-10)
    ann = annihilation_ratio(cs, F, Y, X)
    rec.upper("quantization", "annihilation_eigenvalue",
              abs(ann - cs.inner(F.Fstar, X) / (1j * math.sqrt(2))) / max(abs(ann), 1e-300), 1e-10)
    worst = 0.0
    for n in range(6):
        a = wick_power_matrix_element(cs, F, n, Y, X).raw
        b = wick_binomial_oracle(cs, F, n, Y, X).raw
        worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
    rec.upper("quantization", "wick_oracle", worst, 1e-12, note="n <= 5")
    nw = normal_weyl_matrix_element(cs, F, Y, X).raw
    div = weyl_matrix_element(cs, F, Y, X).raw / characteristic_functional(cs, F)
    rec.upper("quantization", "normal_ordered_weyl", abs(nw - div) / max(abs(nw), 1e-300), 1e-10)
    gram = np.array([[coherent_overlap(cs, a, b) for b in (X, Y)] for a in (X, Y)])
    rec.lower("quantization", "gram_psd", np.linalg.eigvalsh((gram + gram.conj().T) / 2).min(), -1e-12)
    return cs


def _wilson_checks(rec, cs, space, complex_, loop, rng, scale):
    p = space.p
    osc = lambda: space.random_point(rng, scale, "oscillating")  # noqa: E731
    X, Y = osc(), osc()
    if loop is None and p == 1 and complex_.dimension >= 2:
        loop = contractible_loop(complex_)
    if loop is None and p == 0:
        loop = make_chain(complex_, [((0,), 1)])
    if loop is None:
        return
    other = contractible_loop(complex_, 1) if (p == 1 and complex_.dimension >= 2) else loop
    total = wilson_matrix_element(cs, loop + other, Y, X).raw
    parts = wilson_matrix_element(cs, loop, Y, X).raw + wilson_matrix_element(cs, other, Y, X).raw
    rec.upper("wilson", "chain_linearity", abs(total - parts) / max(abs(total), 1e-300), 1e-12)
    if p >= 1:
        bundle = space.bundle
        phi = rng.standard_normal(bundle.counts[p - 1])
        raw = X.A + bundle.Dk(p - 1) @ phi
        shifted = space.point(raw, X.E)
        d = abs(wilson_matrix_element(cs, loop, Y, shifted).raw - wilson_matrix_element(cs, loop, Y, X).raw)
        rec.upper("wilson", "gauge_independence", d, 1e-10)
    hol = holonomy_matrix_element(cs, loop, Y, X).raw
    rec.upper("wilson", "holonomy_is_normal_weyl",
              abs(hol - holonomy_as_normal_weyl(cs, loop, Y, X).raw) / max(abs(hol), 1e-300), 1e-10)
    r1 = verify_quantum_maxwell(cs, Y, X, 0.7, step=1e-4)
    r2 = verify_quantum_maxwell(cs, Y, X, 0.7, step=5e-5)
    rec.upper("wilson", "maxwell_dA_dt", r1[0], 1e-6)
    rec.upper("wilson", "maxwell_dE_dt", r1[1], 1e-6)
    # raw elements carry the overlap, which can be tiny; it is constant in time, so divide it out
    ov = abs(coherent_overlap(cs, Y, X))
    rec.upper("wilson", "maxwell_per_overlap", max(r1) / max(ov, 1e-300), 1e-6, note=f"|overlap| = {ov:.3e}")
    for name, a, b in (("A", r1[0], r2[0]), ("E", r1[1], r2[1])):
        if a < 1e-11:
            rec.upper("wilson", f"maxwell_richardson_{name}", 0.0, 0.1, note="residual at round-off")
        else:
            rec.upper("wilson", f"maxwell_richardson_{name}", abs(a / b - 4.0) / 4.0, 0.1,
                      note=f"h -> h/2 ratio {a / b:.3f}")
    worst = max(verify_wilson_corollary(cs, loop, Y, X, t) for t in (0.0, 1.0, 5.0))
    rec.upper("wilson", "wilson_corollary", worst, 1e-6)


def _aharonov_bohm(rec, space, complex_, rng):
    if space.p != 1 or complex_.dimension < 2 or not space.spectral.kernel_dimension:
        return
    loop = noncontractible_loop(space, complex_)
    if loop is None:
        return
    free = space.random_point(rng, 1.0, "free")
    strength = np.abs(space.bundle.Dk(1) @ free.A).max() / np.abs(free.A).max()
    rec.upper("wilson", "harmonic_field_strength", strength, 1e-10)
    try:
        cs = complex_structure(space)
        hol = lambda chain: abs(wilson_matrix_element(cs, chain, free, free).ratio)  # noqa: E731
    except SectorError:
        hol = lambda chain: abs(float(np.dot(chain.coefficients, free.A)))  # noqa: E731
    rec.lower("wilson", "ab_noncontractible", hol(loop), 1e-6)
    rec.upper("wilson", "ab_contractible", hol(contractible_loop(complex_)), 1e-10)
    t = 2.5
    moved = space.evolve(free, t)
    err = max(np.abs(moved.A - (free.A + t * free.E)).max(), np.abs(moved.E - free.E).max())
    rec.upper("dynamics", "free_shear_exact", err, 1e-12)


def run_suite(mesh, p, seed=0, tolerance_scale=1.0, coefficient=None, loop=None,
              label_scale=0.3, regenerate=None):
    """Run every invariant check for ``(mesh, p)``; returns a list of :class:`Check`.

    ``regenerate`` is an optional zero-argument callable rebuilding the mesh,
    used for the determinism check.
    """
    rng = np.random.default_rng(seed)
    rec = _Recorder(tolerance_scale)
    _complex_checks(rec, mesh, regenerate)
    bundle = assemble(mesh, p, coefficient)
    spectra = _operator_checks(rec, bundle, rng)
    _kodaira_checks(rec, bundle, mesh.complex, spectra, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KodairaAmbiguityWarning)
        space = PhaseSpace(bundle)
    _dynamics_checks(rec, space, rng, 1.0)
    cs = _quantization_checks(rec, space, rng, label_scale)
    if cs is not None:
        chain = None
        if loop is not None:
            chain = loop if isinstance(loop, Chain) else make_chain(mesh.complex, loop)
        _wilson_checks(rec, cs, space, mesh.complex, chain, rng, label_scale)
    _aharonov_bohm(rec, space, mesh.complex, rng)
    return rec.checks


def suite_passed(checks):
    return all(c.passed for c in checks)


def default_suite(spec="torus(4,4)", p=1, **kw):
    mesh = generate_mesh(spec)
    return run_suite(mesh, p, regenerate=lambda: generate_mesh(spec), **kw)
