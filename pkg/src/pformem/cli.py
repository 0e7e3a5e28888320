"""Command-line front end.

Every subcommand reads one scenario (``--scenario``, defaulting to torus(4,4)
with p = 1 and zero potential), writes its reports into ``--out`` and exits
with 0 on success, 2 on malformed input, 3 when an invariant fails and 4 on a
numerical failure.
"""

import argparse
import contextlib
import dataclasses
import os
import sys
import warnings

import numpy as np

from . import __version__, plotting, reports
from .complex import save_mesh
from .dynamics import PhaseSpace
from .errors import DomainError, NumericalError, ParseError, PFormError, SectorError
from .gapstudy import gap_study, trend_check
from .kodaira import KodairaAmbiguityWarning, betti_numbers, kodaira_split
from .operators import assemble, spectral_decomposition
from .quantization import (
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
    wick_binomial_oracle,
    wick_power_matrix_element,
)
from .scenario import DEFAULT_SCENARIO, build_mesh, load_scenario, parse_scenario
from .verify import run_suite, suite_passed
from .wilson import (
    classical_holonomy,
    contractible_loop,
    electric_flux_matrix_element,
    holonomy_as_normal_weyl,
    holonomy_matrix_element,
    make_chain,
    noncontractible_loop,
    verify_quantum_maxwell,
    verify_wilson_corollary,
    wilson_matrix_element,
)

THREADS_ENV = "PFORMEM_NUM_THREADS"

EXIT_OK, EXIT_PARSE, EXIT_INVARIANT, EXIT_NUMERICAL = 0, 2, 3, 4


class _Context:
    """Scenario, mesh, operators and RNG shared by the subcommands."""

    def __init__(self, args):
        if args.scenario:
            self.scenario = load_scenario(args.scenario)
        else:
            self.scenario = parse_scenario(DEFAULT_SCENARIO)
        if args.seed is not None:
            self.scenario = dataclasses.replace(self.scenario, seed=args.seed)
        self.args = args
        self.out = args.out
        os.makedirs(self.out, exist_ok=True)
        self.rng = np.random.default_rng(self.scenario.seed)
        self._mesh = self._bundle = self._space = None

    @property
    def mesh(self):
        if self._mesh is None:
            self._mesh = build_mesh(self.scenario)
        return self._mesh

    @property
    def bundle(self):
        if self._bundle is None:
            self._bundle = assemble(self.mesh, self.scenario.p, self.scenario.twist)
        return self._bundle

    @property
    def space(self):
        if self._space is None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", KodairaAmbiguityWarning)
                self._space = PhaseSpace(self.bundle)
        return self._space

    def path(self, name):
        return os.path.join(self.out, name)

    def loop(self):
        """Scenario loop, else a non-contractible 1-cycle, else a contractible one."""
        c, p = self.mesh.complex, self.scenario.p
        if self.scenario.loop is not None:
            return make_chain(c, self.scenario.loop), "scenario"
        if p == 1:
            found = noncontractible_loop(self.space, c)
            if found is not None:
                return found, "non-contractible"
            if c.dimension >= 2:
                return contractible_loop(c), "contractible"
        if p == 0:
            return make_chain(c, [((0,), 1)]), "vertex"
        raise ParseError(f"no default chain for p = {p}; give one in the scenario", field="loop")

    def header(self):
        s = self.scenario
        return {"mesh": self.mesh.name, "n": self.mesh.complex.dimension, "p": s.p,
                "twist": self.bundle.coefficient, "seed": s.seed, "phi": s.phi}


def _emit(msg):
    print(msg, file=sys.stdout)


# -- subcommands -------------------------------------------------------------------

def cmd_mesh(ctx):
    path = ctx.path("mesh.json")
    save_mesh(path, ctx.mesh)
    c = ctx.mesh.complex
    _emit(f"wrote {path}: {ctx.mesh.name}, counts {c.counts}, euler {c.euler_characteristic()}")
    return EXIT_OK


def cmd_spectrum(ctx):
    b = ctx.bundle
    rows, spectra = [], {}
    for k in range(b.n + 1):
        s = spectral_decomposition(b.L(k), b.M[k])
        spectra[k] = s.eigenvalues
        rows += [(k, i, float(lam), int(ker)) for i, (lam, ker) in enumerate(zip(s.eigenvalues, s.kernel))]
    reports.write_csv(ctx.path("spectrum.csv"), ["degree", "index", "eigenvalue", "kernel"], rows)
    if not ctx.args.no_plots:
        plotting.plot_spectrum(ctx.path("spectrum.png"), spectra)
    _emit(f"wrote {ctx.path('spectrum.csv')}: {len(rows)} eigenvalues")
    return EXIT_OK


def cmd_kodaira(ctx):
    b = ctx.bundle
    betti = betti_numbers(ctx.mesh.complex)
    degrees = []
    for k in range(b.n + 1):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", KodairaAmbiguityWarning)
            split = kodaira_split(b, k)
        exact, harmonic, coexact = split.dims
        degrees.append({
            "degree": k, "exact_dim": exact, "harmonic_dim": harmonic, "coexact_dim": coexact,
            "betti": betti[k], "margin": split.margin,
            "largest_kernel_eigenvalue": split.largest_kernel,
            "smallest_nonkernel_eigenvalue": split.smallest_nonkernel,
            "completeness_residual": split.completeness_residual(),
            "orthogonality_residual": split.orthogonality_residual(),
            "idempotence_residual": split.idempotence_residual(),
            "ambiguous": bool(caught),
        })
    reports.write_json(ctx.path("kodaira.json"), {**ctx.header(), "degrees": degrees})
    for d in degrees:
        _emit(f"degree {d['degree']}: exact {d['exact_dim']}, harmonic {d['harmonic_dim']}, "
              f"coexact {d['coexact_dim']} (betti {d['betti']})")
    return EXIT_OK


def cmd_evolve(ctx):
    space, s = ctx.space, ctx.scenario
    X = space.random_point(ctx.rng, 1.0)
    Y = space.random_point(ctx.rng, 1.0)
    try:
        chain, _ = ctx.loop()
    except (ParseError, PFormError):
        chain = None
    H0, w0 = space.hamiltonian(X), space.symplectic(X, Y)
    header = ["t", "hamiltonian", "hamiltonian_drift", "symplectic_drift", "gauss_residual",
              "norm", "free_norm", "oscillating_norm"] + (["holonomy"] if chain is not None else [])
    rows = []
    for t in s.times:
        Xt, Yt = space.evolve(X, t), space.evolve(Y, t)
        parts = space.split_sectors(Xt)
        H = space.hamiltonian(Xt)
        row = [t, H, abs(H - H0) / max(abs(H0), 1e-300),
               abs(space.symplectic(Xt, Yt) - w0) / max(abs(w0), 1e-300),
               space.gauss_residual(Xt), space.norm(Xt),
               space.norm(parts.free), space.norm(parts.oscillating)]
        if chain is not None:
            row.append(classical_holonomy(chain, Xt.A))
        rows.append([float(v) for v in row])
    reports.write_csv(ctx.path("evolve.csv"), header, rows)
    if not ctx.args.no_plots:
        cols = {name: [r[i] for r in rows] for i, name in enumerate(header) if name in
                ("hamiltonian", "norm", "free_norm", "holonomy")}
        plotting.plot_evolution(ctx.path("evolve.png"), [r[0] for r in rows], cols)
    _emit(f"wrote {ctx.path('evolve.csv')}: {len(rows)} samples, "
          f"max energy drift {max(r[2] for r in rows):.3e}")
    if space.split.dims[1] + space.split.dims[2] == 0:
        _emit("note: every state is pure gauge here, so the drift columns compare round-off")
    return EXIT_OK


def _quantum(ctx):
    try:
        return complex_structure(ctx.space)
    except SectorError as exc:
        raise ParseError(f"scenario has no oscillating sector: {exc}", field="p") from None


def cmd_quantize(ctx):
    cs, space, scale = _quantum(ctx), ctx.space, ctx.scenario.label_scale
    bra = space.random_point(ctx.rng, scale, "oscillating")
    ket = space.random_point(ctx.rng, scale, "oscillating")
    F = observable(cs, space.random_point(ctx.rng, scale, "oscillating"))
    heis = heisenberg_matrix_element(cs, F, bra, ket)
    doc = {
        **ctx.header(),
        "label_scale": scale,
        "overlap": coherent_overlap(cs, bra, ket),
        "norm_sq_difference": cs.norm_sq(ket - bra),
        "characteristic_functional": characteristic_functional(cs, F),
        "weyl": weyl_matrix_element(cs, F, bra, ket)._asdict(),
        "heisenberg": heis._asdict(),
        "heisenberg_by_difference": heisenberg_by_difference(cs, F, bra, ket),
        "heisenberg_diagonal_minus_classical": heisenberg_matrix_element(cs, F, ket, ket).ratio
        - cs.omega(F.Fstar, ket),
        "annihilation_ratio": annihilation_ratio(cs, F, bra, ket),
        "normal_weyl": normal_weyl_matrix_element(cs, F, bra, ket)._asdict(),
        "variance": {"finite_difference": variance_by_difference(cs, F),
                     "closed_form": cs.norm_sq(F.Fstar) / 2},
        "wick": [{"n": n, "ratio": wick_power_matrix_element(cs, F, n, bra, ket).ratio,
                  "oracle": wick_binomial_oracle(cs, F, n, bra, ket).ratio} for n in range(6)],
    }
    reports.write_json(ctx.path("quantize.json"), doc)
    _emit(f"wrote {ctx.path('quantize.json')}: overlap {doc['overlap']:.6g}")
    return EXIT_OK


def cmd_wilson(ctx):
    cs, space, scale = _quantum(ctx), ctx.space, ctx.scenario.label_scale
    chain, origin = ctx.loop()
    bra = space.random_point(ctx.rng, scale, "oscillating")
    ket = space.random_point(ctx.rng, scale, "oscillating")
    r1 = verify_quantum_maxwell(cs, bra, ket, 0.7, step=1e-4)
    r2 = verify_quantum_maxwell(cs, bra, ket, 0.7, step=5e-5)
    ov = max(abs(coherent_overlap(cs, bra, ket)), 1e-300)
    doc = {
        **ctx.header(),
        "chain": {"origin": origin, "coefficients": chain.coefficients.tolist()},
        "wilson": wilson_matrix_element(cs, chain, bra, ket)._asdict(),
        "electric_flux": electric_flux_matrix_element(cs, chain, bra, ket)._asdict(),
        "holonomy": holonomy_matrix_element(cs, chain, bra, ket)._asdict(),
        "holonomy_as_normal_weyl": holonomy_as_normal_weyl(cs, chain, bra, ket)._asdict(),
        "maxwell": {"step": [1e-4, 5e-5], "residual_A": [r1[0], r2[0]], "residual_E": [r1[1], r2[1]],
                    "overlap_modulus": ov,
                    "residual_A_per_overlap": [r / ov for r in (r1[0], r2[0])],
                    "residual_E_per_overlap": [r / ov for r in (r1[1], r2[1])]},
        "wilson_corollary": [{"t": t, "residual": verify_wilson_corollary(cs, chain, bra, ket, t)}
                             for t in (0.0, 1.0, 5.0)],
    }
    if space.spectral.kernel_dimension:
        free = space.random_point(ctx.rng, 1.0, "free")
        doc["harmonic"] = {
            "field_strength": float(np.abs(space.bundle.Dk(space.p) @ free.A).max(initial=0.0)),
            "holonomy": classical_holonomy(chain, free.A),
            "diagonal_wilson": wilson_matrix_element(cs, chain, free, free).ratio,
        }
    reports.write_json(ctx.path("wilson.json"), doc)
    _emit(f"wrote {ctx.path('wilson.json')}: {origin} chain, maxwell residuals {r1[0]:.3e}, {r1[1]:.3e} "
          f"({r1[0] / ov:.3e}, {r1[1] / ov:.3e} per unit overlap)")
    return EXIT_OK


def cmd_verify(ctx):
    s = ctx.scenario
    regen = None if isinstance(s.mesh_spec, dict) else (lambda: build_mesh(s))
    checks = run_suite(ctx.mesh, s.p, seed=s.seed, tolerance_scale=ctx.args.tolerance_scale,
                       coefficient=s.twist, loop=s.loop, label_scale=s.label_scale, regenerate=regen)
    for c in checks:
        _emit(c.line())
    ok = suite_passed(checks)
    reports.write_json(ctx.path("verify.json"), {
        **ctx.header(), "tolerance_scale": ctx.args.tolerance_scale, "passed": ok,
        "checks": [dataclasses.asdict(c) for c in checks]})
    failed = [c for c in checks if not c.passed]
    _emit(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_gap_study(ctx):
    s = ctx.scenario
    rows = gap_study(s.gap_rings, s.gap_sectors, alpha=s.gap_alpha)
    header = ["profile", "rings", "sectors", "vertices", "gap_L0", "gap_L1"]
    reports.write_csv(ctx.path("gap_study.csv"), header, [dataclasses.astuple(r) for r in rows])
    ok, detail = trend_check(rows)
    reports.write_json(ctx.path("gap_study.json"), {"alpha": s.gap_alpha, "trend_holds": ok, **detail})
    if not ctx.args.no_plots:
        plotting.plot_gap_study(ctx.path("gap_study.png"), rows)
    for r in rows:
        _emit(f"{r.profile:16s} rings {r.rings:3d}: L0 gap {r.gap_L0:.6g}, L1 gap {r.gap_L1:.6g}")
    _emit(f"trend {'holds' if ok else 'FAILS'}")
    return EXIT_OK


COMMANDS = {
    "mesh": (cmd_mesh, "generate the scenario mesh and save it as JSON"),
    "spectrum": (cmd_spectrum, "eigenvalues of every twisted Laplacian (CSV)"),
    "kodaira": (cmd_kodaira, "exact/harmonic/coexact dimensions and residuals (JSON)"),
    "evolve": (cmd_evolve, "classical time series of a random phase point (CSV)"),
    "quantize": (cmd_quantize, "coherent-state matrix elements (JSON)"),
    "wilson": (cmd_wilson, "Wilson loop elements and quantum Maxwell residuals (JSON)"),
    "verify": (cmd_verify, "run the full invariant suite; exit 3 on any failure"),
    "gap-study": (cmd_gap_study, "lowest nonzero eigenvalues on growing discs (CSV)"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="pformem", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON file (default: torus(4,4), p=1, phi=0)")
    common.add_argument("--out", default=".", help="output directory (default: current directory)")
    common.add_argument("--seed", type=_seed, default=None, help="override the scenario seed (u64)")
    common.add_argument("--tolerance-scale", type=_positive, default=1.0,
                        help="multiply every default tolerance of the invariant suite")
    common.add_argument("--no-plots", action="store_true", help="skip PNG figures")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0 or value == float("inf"):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return value


def _thread_limit():
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return contextlib.nullcontext()
    try:
        n = int(raw)
    except ValueError:
        raise ParseError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ParseError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    func = COMMANDS[args.command][0]
    try:
        with _thread_limit():
            return func(_Context(args))
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NumericalError, DomainError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PFormError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
