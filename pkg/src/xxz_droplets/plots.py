"""Figure rendering for the report paths.

Each function writes one PNG next to the delimited artifact it illustrates.
Only the Agg backend is used so the CLI stays headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def plot_dispersion(disp, path, title="Droplet band"):
    """Band energies on the momentum grid, with the trig interpolant."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    k_fine = np.linspace(0.0, 2.0 * np.pi, 400)
    ax.plot(k_fine, disp.energy_at(k_fine), "-", color="#3465a4", lw=1.2,
            label="expansion (interpolated)")
    ax.plot(disp.k_values, disp.energies, "o", color="#204a87", ms=5,
            label="expansion (grid)")
    ax.set_xlabel("momentum k")
    ax.set_ylabel("E(k)")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_band_comparison(report, path):
    """Expansion band against the per-momentum oracle minima, plus differences."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 6.0), sharex=True,
                                   height_ratios=[3, 1])
    ks = [r.k for r in report.rows]
    ax1.plot(ks, [r.energy_expansion for r in report.rows], "o-",
             color="#204a87", ms=5, lw=1.0, label="expansion")
    ax1.plot(ks, [r.oracle_min for r in report.rows], "x", color="#a40000",
             ms=7, label="oracle block minimum")
    ax1.set_ylabel("E(k)")
    ax1.set_title(f"Droplet band vs exact diagonalization "
                  f"(N={report.n_sites}, m={report.m}, eps={report.epsilon})")
    ax1.grid(alpha=0.3)
    ax1.legend(fontsize=9)
    ax2.semilogy(ks, [max(r.abs_diff, 1e-17) for r in report.rows], "s-",
                 color="#4e9a06", ms=4, lw=1.0)
    ax2.axhline(report.tolerance, color="#a40000", ls="--", lw=1.0,
                label="tolerance")
    ax2.set_xlabel("momentum k")
    ax2.set_ylabel("|difference|")
    ax2.grid(alpha=0.3)
    ax2.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_scaling(fit, m, path):
    """Log-log oracle bandwidths with the fitted power law."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    eps = np.asarray(fit.epsilons)
    ax.loglog(eps, fit.bandwidths, "o", color="#204a87", ms=6, label="oracle bandwidth")
    ax.loglog(eps, np.exp(fit.intercept) * eps ** fit.slope, "-", color="#3465a4",
              lw=1.2, label=f"fit: slope {fit.slope:.3f}")
    ax.loglog(eps, fit.bandwidths[0] * (eps / eps[0]) ** m, "--", color="#888888",
              lw=1.0, label=f"reference slope {m}")
    ax.set_xlabel("eps")
    ax.set_ylabel("band width")
    ax.set_title(f"Band width scaling (m={m})")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_stability(stab, path):
    """Dispersion Fourier coefficients across chain lengths."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.5, 4.0))
    for h in stab.harmonics:
        ax1.plot(stab.n_grid, stab.values[h], "o-", ms=5, lw=1.0, label=f"e_{h}")
    ax1.set_xlabel("chain length N")
    ax1.set_ylabel("coefficient")
    ax1.set_title(f"Dispersion coefficients (m={stab.m}, eps={stab.epsilon})")
    ax1.grid(alpha=0.3)
    ax1.legend(fontsize=9)
    mids = [0.5 * (stab.n_grid[i] + stab.n_grid[i + 1])
            for i in range(len(stab.n_grid) - 1)]
    for h in stab.harmonics:
        diffs = [max(d, 1e-20) for d in stab.diffs[h]]
        ax2.semilogy(mids, diffs, "s-", ms=5, lw=1.0, label=f"|Δe_{h}|")
    ax2.set_xlabel("chain length N (midpoint)")
    ax2.set_ylabel("successive difference")
    ax2.set_title("Cauchy tail")
    ax2.grid(alpha=0.3)
    ax2.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_kink_decay(result, path):
    """Coefficient magnitudes against perturbation order, with the decay guide."""
    from .chain import lambda_open

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    space = result.space
    params = result.params
    w = space.w_orders[1:]
    lam = np.array([
        lambda_open(params.geometry, params.m, x, params.boundary_a, params.boundary_b)
        for x in space.masks[1:]
    ])
    weighted = np.maximum((lam - 2.0) * np.abs(result.coefficients.values), 1e-18)
    ax.semilogy(w, weighted, ".", color="#204a87", ms=5, label="(lambda-2) |e(X)|")
    base = params.K * abs(params.epsilon)
    if base > 0:
        orders = np.arange(0, params.w_max + 1)
        ax.semilogy(orders, base ** orders, "--", color="#a40000", lw=1.0,
                    label=f"(K|eps|)^w, K|eps| = {base:g}")
    ax.set_xlabel("perturbation order w(X)")
    ax.set_ylabel("weighted magnitude")
    ax.set_title(f"Kink coefficient decay (N={params.n_sites}, "
                 f"m={params.m}, eps={params.epsilon})")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
