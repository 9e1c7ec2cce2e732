"""Figure rendering for the report paths. matplotlib is imported lazily
and pinned to the Agg backend so headless runs never touch a display.
"""

import math

__all__ = ["render_rate", "render_cobweb", "render_contour", "render_trajectory"]


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def render_rate(rows, n_star, path):
    """Per-step log-rate with the phase envelope; rows as in the rate CSV."""
    plt = _plt()
    ns = [r[0] for r in rows]
    avg = [r[2] for r in rows]
    low = [math.log(r[3]) / r[0] if r[3] > 0 else math.nan for r in rows]
    up = [math.log(r[4]) / r[0] if r[4] > 0 else math.nan for r in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(ns, avg, "o-", color="#8c1d40", lw=1.4, ms=4, label="(1/n) log tau_n")
    ax.fill_between(ns, low, up, color="#c0c0c0", alpha=0.45, label="envelope")
    ax.axvline(n_star, color="#404040", ls=":", lw=1, label=f"n* = {n_star}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel("per-step log contraction")
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_cobweb(hs, kappa, path):
    """Cobweb of the stepsize recursion against its own graph."""
    from .dynamics import h_update

    plt = _plt()
    grid = [i / 400 for i in range(1, 400)]
    curve = [h_update(h) for h in grid]
    fig, ax = plt.subplots(figsize=(5.2, 5.2))
    ax.plot(grid, curve, color="#8c1d40", lw=1.4, label="update map")
    ax.plot([0, 1], [0, 1], color="#808080", lw=0.8)
    # staircase: (h0,h0)->(h0,h1)->(h1,h1)->...
    px, py = [hs[0]], [hs[0]]
    for a, b in zip(hs[:-1], hs[1:]):
        px.extend([a, b])
        py.extend([b, b])
    ax.plot(px, py, color="#1f4e8c", lw=1.0, alpha=0.9)
    ax.plot(hs[:1], hs[:1], "o", color="#1f4e8c", ms=5)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("h")
    ax.set_ylabel("next h")
    ax.set_title(f"kappa = {kappa:g}")
    ax.legend(frameon=False, fontsize=9, loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_contour(grid, solution, path):
    """Heatmap of the two-step worst-case floor with the optimum marked."""
    plt = _plt()
    import numpy as np

    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    z = np.log10(np.maximum(grid.rates, 1e-300))
    pc = ax.pcolormesh(grid.alphas, grid.betas, z.T, shading="auto", cmap="viridis")
    fig.colorbar(pc, ax=ax, label="log10 worst-case floor")
    ax.plot([solution.alpha_star], [solution.beta_star], "r*", ms=12)
    ax.set_xlabel("first step")
    ax.set_ylabel("second step")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_trajectory(traj, path):
    """Distance to the minimizer per step, log scale."""
    plt = _plt()
    import numpy as np

    d = np.sqrt(np.sum((traj.xs - traj.minimizer) ** 2, axis=1))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(range(len(d)), np.maximum(d, 1e-300), "o-", color="#8c1d40", ms=4)
    ax.set_xlabel("t")
    ax.set_ylabel("|x_t - x*|")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
