"""Decision graph figures.

Uses ``matplotlib.figure.Figure`` directly with the Agg canvas so nothing
touches pyplot's global state or needs a display.
"""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

RC = {
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 8,
}


def decision_graph_figure(graphs, key_frames=None, width=8.0, row_height=3.0):
    """One row per segment: rho-delta scatter on the left, sorted gamma on the right.

    ``graphs`` is a list of ``(offset, DecisionGraph)``. Points whose global
    index is in ``key_frames`` are drawn in red.
    """
    import matplotlib

    centers = set(key_frames.indices if hasattr(key_frames, "indices") else key_frames or ())
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=(width, row_height * max(1, len(graphs))))
        FigureCanvasAgg(fig)
        axes = fig.subplots(max(1, len(graphs)), 2, squeeze=False)
        for row, (offset, g) in enumerate(graphs):
            idx = offset + np.arange(len(g))
            is_center = np.array([i in centers for i in idx], dtype=bool)
            ax = axes[row, 0]
            ax.scatter(g.rho[~is_center], g.delta[~is_center], s=12, c="0.4", label="frame")
            ax.scatter(g.rho[is_center], g.delta[is_center], s=30, c="tab:red", label="key frame")
            ax.set_xlabel(r"$\rho$")
            ax.set_ylabel(r"$\delta$")
            ax.set_title(f"segment {row}: frames {offset}-{offset + len(g) - 1}")
            if row == 0:
                ax.legend(loc="best")

            ax = axes[row, 1]
            order = np.argsort(-g.gamma, kind="stable")
            colors = np.where(is_center[order], "tab:red", "0.4")
            ax.scatter(np.arange(1, len(g) + 1), g.gamma[order], s=12, c=colors)
            ax.set_xlabel("rank")
            ax.set_ylabel(r"$\gamma = \rho\delta$")
        fig.tight_layout()
    return fig


def save_decision_graph(path, graphs, key_frames=None, dpi=120):
    fig = decision_graph_figure(graphs, key_frames)
    fig.savefig(path, dpi=dpi)
    return path
