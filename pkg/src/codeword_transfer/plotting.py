"""Matplotlib figures written next to the CSV/JSON reports.

SVG output is made byte-reproducible by fixing the hash salt and dropping
the date metadata.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "svg.hashsalt": "codeword-transfer",
    "font.size": 10,
    "axes.titlesize": 10,
    "figure.dpi": 100,
}

LABELS = {
    "theta_alpha": r"$\theta_\alpha$",
    "theta_beta": r"$\theta_\beta$",
    "theta_bA": r"$\theta_{b,A}$",
    "theta_bB": r"$\theta_{b,B}$",
    "theta_cA": r"$\theta_{c,A}$",
    "theta_cB": r"$\theta_{c,B}$",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {"Date": None} if path.suffix.lower() == ".svg" else None
    fig.savefig(path, metadata=meta)
    plt.close(fig)
    return path


def delta_s_figure(result, path) -> Path:
    """Heatmap (2-D scan) or line plot (1-D scan) of ΔS with the ΔS = 0 boundary."""
    with plt.rc_context(RC):
        axes = result.grid.axes
        if len(axes) == 2:
            fig, ax = plt.subplots(figsize=(5.2, 4.2))
            z = result.delta_s_analytic.reshape(result.shape)
            x, y = axes[0].values(), axes[1].values()
            mesh = ax.pcolormesh(x, y, z.T, shading="nearest", cmap="viridis",
                                 vmin=float(z.min()), vmax=float(z.max()))
            if z.min() < 0.0 < z.max():
                ax.contour(x, y, z.T, levels=[0.0], colors="white", linewidths=1.0)
            fig.colorbar(mesh, ax=ax, label=r"$\Delta S$ [bits]")
            ax.set_xlabel(LABELS.get(axes[0].name, axes[0].name))
            ax.set_ylabel(LABELS.get(axes[1].name, axes[1].name))
        else:
            fig, ax = plt.subplots(figsize=(5.2, 3.4))
            x = axes[0].values()
            ax.plot(x, result.delta_s_analytic, color="C0", label="analytic")
            if result.grid.mc_n > 0:
                ax.errorbar(x, result.delta_s_mc, yerr=result.mc_stderr, fmt=".", color="C1",
                            label=f"Monte Carlo (n={result.grid.mc_n})")
            ax.axhline(0.0, color="0.5", lw=0.8, ls="--")
            ax.set_xlabel(LABELS.get(axes[0].name, axes[0].name))
            ax.set_ylabel(r"$\Delta S$ [bits]")
            ax.legend(frameon=False)
        ax.set_title(f"{result.grid.base.mode} mode")
        fig.tight_layout()
        return _save(fig, path)


def scaling_figure(report, path) -> Path:
    """Aggregate squared error and per-component Var(omega_hat) against n on log axes."""
    with plt.rc_context(RC):
        ns = np.array([r.n for r in report.rows], dtype=float)
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.4))
        ax1.loglog(ns, [r.mse_y_total for r in report.rows], "o", label="measured")
        ax1.loglog(ns, [r.predicted_total for r in report.rows], "-", color="0.4", label="(m-1)/(4n)")
        ax1.set_xlabel("n")
        ax1.set_ylabel(r"$\sum_i E[(\hat y_i - y_i)^2]$")
        ax1.legend(frameon=False)
        ratios = np.array([r.ratio_component for r in report.rows])
        for i in range(ratios.shape[1]):
            ax2.semilogx(ns, ratios[:, i], "o-", ms=3, label=f"i={i + 1}")
        ax2.axhline(1.0, color="0.4", lw=0.8)
        ax2.set_xlabel("n")
        ax2.set_ylabel(r"Var$(\hat\omega_i)$ / (1/4n)")
        ax2.legend(frameon=False, fontsize=8)
        fig.suptitle(f"m = {report.m}, trials = {report.trials}")
        fig.tight_layout()
        return _save(fig, path)


def marginal_figure(profile, path, sampled=None) -> Path:
    """Bob's local marginal, the joint-table marginal and the expected value against Charley's angle."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.2, 3.4))
        ax.plot(profile.theta_c, profile.local, color="C0", label="Bob local table")
        ax.plot(profile.theta_c, profile.joint_marginal, color="C2", ls=":", label="joint-table sum")
        ax.axhline(profile.expected, color="0.4", lw=0.8, ls="--", label="expected")
        if sampled is not None:
            ax.plot(profile.theta_c, sampled, ".", color="C1", ms=3, label="sampled")
        ax.set_xlabel(LABELS.get(f"theta_c{profile.bob_set}", "theta_c"))
        ax.set_ylabel("P(Bob = outcome 1)")
        ax.set_ylim(-0.05, 1.05)
        ax.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        return _save(fig, path)
