"""Static matplotlib figures written next to the CSV/JSON reports."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["plot_spectrum", "plot_evolution", "plot_gap_study"]

# fixed metadata keeps PNG output byte-identical across runs
_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def plot_spectrum(path, spectra, threshold=None):
    """``spectra`` maps degree to sorted eigenvalues."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, lam in sorted(spectra.items()):
        ax.plot(range(len(lam)), lam, "o", ms=3, label=f"$L_{k}$")
    if threshold is not None:
        ax.axhline(threshold, color="grey", lw=0.8, ls="--")
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.legend()
    return _save(fig, path)


def plot_evolution(path, times, columns):
    """One panel per named series in ``columns`` (a dict of equal-length sequences)."""
    fig, axes = plt.subplots(len(columns), 1, figsize=(6, 2 * len(columns)), sharex=True, squeeze=False)
    for ax, (name, values) in zip(axes[:, 0], columns.items()):
        ax.plot(times, values, "-o", ms=3)
        ax.set_ylabel(name)
    axes[-1, 0].set_xlabel("t")
    return _save(fig, path)


def plot_gap_study(path, rows):
    fig, ax = plt.subplots(figsize=(6, 4))
    for profile in dict.fromkeys(r.profile for r in rows):
        sub = [r for r in rows if r.profile == profile]
        ax.loglog([r.rings for r in sub], [r.gap_L0 for r in sub], "-o", label=f"{profile} $L_0$")
        ax.loglog([r.rings for r in sub], [r.gap_L1 for r in sub], "--s", label=f"{profile} $L_1$")
    ax.set_xlabel("rings")
    ax.set_ylabel("lowest nonzero eigenvalue")
    ax.legend()
    return _save(fig, path)
