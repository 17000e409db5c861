"""Figure rendering for the CLI report path (Agg backend, files only)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_curve(arr, K, path):
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.plot(arr[:, 0], arr[:, 1], lw=1.5)
    ax.set_xlabel("$m$")
    ax.set_ylabel(r"$\rho_B$")
    ax.set_title(f"Unilateral zealot fraction along steady states, K={K}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_beak(grid, K, path):
    za = grid.axes[0].values()
    zb = grid.axes[1].values()
    fig, ax = plt.subplots(figsize=(4.8, 4.0))
    # transpose so z_a runs along x and z_b along y
    pc = ax.pcolormesh(za, zb, grid.tables["n_steady"].T, shading="nearest")
    fig.colorbar(pc, ax=ax, label="steady states")
    ax.set_xlabel("$z_A$")
    ax.set_ylabel("$z_B$")
    ax.set_title(f"Steady-state count, K={K}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_gap(grid, K, path):
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.plot(grid.axes[0].values(), grid.tables["gap"], lw=1.5)
    ax.set_xlabel("$z_A = z_B$")
    ax.set_ylabel("max $m$ $-$ min $m$")
    ax.set_title(f"Steady-state magnetization spread, K={K}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trajectory(traj, path):
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.plot(traj.times, traj.m, lw=1.0)
    ax.set_xlabel("$t$ (sweeps)")
    ax.set_ylabel("$m$")
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_perturbation(rec, path):
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.semilogy(rec.times, rec.d, lw=1.0)
    ax.set_xlabel("$t$ (sweeps)")
    ax.set_ylabel(r"$\|d\|_2$")
    ax.set_title(f"Perturbation distance ({rec.verdict})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
