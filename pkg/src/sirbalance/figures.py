"""Figure rendering for the CLI report paths.

Plots are written straight to files (Agg backend), one PNG next to each
delimited output: the boundary sweep gets the traced SIR/QoS boundary
curves, the saddle trace gets objective value and residuals per iteration.
"""

from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_sweep(rows, path, gamma=None) -> None:
    """Boundary curves from sweep rows (theta, sir1, sir2, q1, q2, active)."""
    plt = _plt()
    rows = list(rows)
    sir1 = np.array([r[1] for r in rows])
    sir2 = np.array([r[2] for r in rows])
    q1 = np.array([r[3] for r in rows])
    q2 = np.array([r[4] for r in rows])

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(sir1, sir2, "-", lw=1.5)
    ax1.fill_between(sir1, 0, sir2, alpha=0.12)
    if gamma is not None:
        scale = max(sir1.max() / gamma[0], sir2.max() / gamma[1])
        ax1.plot([0, gamma[0] * scale], [0, gamma[1] * scale], "--", lw=1, color="gray")
    ax1.set_xlabel("SIR link 1")
    ax1.set_ylabel("SIR link 2")
    ax1.set_title("feasible SIR region boundary")
    ax1.set_xlim(left=0)
    ax1.set_ylim(bottom=0)

    ax2.plot(q1, q2, "-", lw=1.5)
    ax2.set_xlabel("QoS link 1")
    ax2.set_ylabel("QoS link 2")
    ax2.set_title("feasible QoS region boundary")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_trace(trace, path) -> None:
    """Objective value and residual decay of a saddle-point run."""
    plt = _plt()
    trace = np.asarray(trace, dtype=float)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(trace[:, 0], trace[:, 1], lw=1.0)
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("G(w, p)")
    ax1.set_title("saddle objective")

    ax2.semilogy(trace[:, 0], np.maximum(trace[:, 2], 1e-300), lw=1.0, label="primal")
    ax2.semilogy(trace[:, 0], np.maximum(trace[:, 3], 1e-300), lw=1.0, label="dual")
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("residual")
    ax2.set_title("residuals")
    ax2.legend()

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
