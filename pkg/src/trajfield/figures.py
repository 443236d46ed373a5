"""Matplotlib rendering for the report paths.

All functions write PNG files next to the delimited output; the CSV
files remain the source of truth.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .integrators import Trajectory  # noqa: E402

_DPI = 150


def _grid(n_panels: int):
    cols = min(3, n_panels)
    rows = math.ceil(n_panels / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(4.0 * cols, 2.6 * rows),
                             squeeze=False)
    return fig, [ax for row in axes for ax in row]


def save_state_comparison(truth: Trajectory, pred: Trajectory, path) -> None:
    """One panel per state component, reference vs prediction."""
    n = truth.n_coords
    labels = [f"q{i}" for i in range(n)] + [f"v{i}" for i in range(n)]
    fig, axes = _grid(2 * n)
    t = truth.times
    for j, (ax, label) in enumerate(zip(axes, labels)):
        ax.plot(t, truth.states[:, j], lw=1.2, label="reference")
        ax.plot(pred.times, pred.states[:, j], "--", lw=1.0,
                label="prediction")
        ax.set_xlabel("t [s]")
        ax.set_ylabel(label)
    for ax in axes[2 * n:]:
        ax.set_visible(False)
    axes[0].legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_phase_portrait(truth: Trajectory, pred: Trajectory, path) -> None:
    """Position-velocity portrait for each coordinate."""
    n = truth.n_coords
    fig, axes = _grid(n)
    for i in range(n):
        ax = axes[i]
        ax.plot(truth.positions[:, i], truth.velocities[:, i], lw=1.2,
                label="reference")
        ax.plot(pred.positions[:, i], pred.velocities[:, i], "--", lw=1.0,
                label="prediction")
        ax.set_xlabel(f"q{i}")
        ax.set_ylabel(f"v{i}")
    for ax in axes[n:]:
        ax.set_visible(False)
    axes[0].legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_control_panels(trajs: dict[str, Trajectory], path) -> None:
    """Stacked closed-loop panels (theta, x, omega, v, u) for one or
    more labeled runs."""
    names = ["theta", "x", "omega", "v", "u"]
    fig, axes = plt.subplots(5, 1, figsize=(7.0, 10.0), sharex=True)
    for label, traj in trajs.items():
        t = traj.times
        for j in range(4):
            axes[j].plot(t, traj.states[:, j], lw=1.1, label=label)
        if traj.inputs is not None:
            axes[4].plot(t, traj.inputs[:, 0], lw=1.1, label=label)
    for ax, name in zip(axes, names):
        ax.set_ylabel(name)
    axes[-1].set_xlabel("t [s]")
    axes[0].legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_loss_curve(history, path) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.semilogy(range(len(history)), history, lw=1.2)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
