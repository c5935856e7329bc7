"""Figure rendering for the CLI report paths.

Each report command can drop a matplotlib figure next to its delimited
output: the geodesic command plots the trajectory with the norm drift, the
curvatures command the per-sample magnitude profile.  Rendering is
headless (Agg) and deterministic.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .geometry import GeodesicPath


def save_geodesic_figure(path: str, traj: GeodesicPath) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.plot(traj.x[:, 0], traj.x[:, 1], lw=1.2)
    ax1.plot([traj.x[0, 0]], [traj.x[0, 1]], "o", ms=4)
    ax1.set_xlabel("x1")
    ax1.set_ylabel("x2")
    ax1.set_title("trajectory (first two coordinates)")
    ax1.set_aspect("equal", adjustable="datalim")
    ax2.plot(traj.t, traj.F - traj.F[0], lw=1.0)
    ax2.set_xlabel("t")
    ax2.set_ylabel("F(c, c') - F(0)")
    ax2.set_title(f"norm drift (max rel {traj.drift:.2e})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_curvature_figure(path: str, samples: list[dict]) -> None:
    keys = ["B_max", "D_max", "J_max", "I_max", "S", "K"]
    idx = np.arange(len(samples))
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    floor = 1e-17
    for key in keys:
        vals = np.array([abs(s[key]) if s[key] is not None else 0.0 for s in samples])
        ax.semilogy(idx, np.maximum(vals, floor), marker=".", ms=3, lw=0.7, label=f"|{key}|")
    ax.set_xlabel("sample index")
    ax.set_ylabel("magnitude")
    ax.set_title("curvature magnitudes per sample")
    ax.legend(fontsize=8, ncol=3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
