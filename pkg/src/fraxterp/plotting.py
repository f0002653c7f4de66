"""SVG line plots of sampled functions (800 x 480, deterministic bytes)."""

from __future__ import annotations

import numpy as np
from matplotlib import rc_context
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .geometry import COMPACT_INTERVAL, compactify, fmt_point

WIDTH, HEIGHT, DPI = 800, 480, 72


def plot_samples(x, y, path, title: str = "", ambient: str = COMPACT_INTERVAL,
                 label_ticks=(0.0, 0.5, 1.0, 2.0, 5.0, 20.0, float("inf"))) -> None:
    """Draw ``y`` against ``x`` as one polyline.

    On unbounded ambients the horizontal axis is the compactified
    coordinate, with ticks labelled by the original ``x`` values.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fig = Figure(figsize=(WIDTH / DPI, HEIGHT / DPI), dpi=DPI)
    FigureCanvasSVG(fig)
    ax = fig.add_subplot(1, 1, 1)
    if ambient == COMPACT_INTERVAL:
        ax.plot(x, y, color="black", linewidth=0.8)
        ax.set_xlabel("x")
    else:
        ax.plot(compactify(ambient, x), y, color="black", linewidth=0.8)
        ticks = [t for t in label_ticks if x.min() <= t <= x.max()]
        ax.set_xticks(compactify(ambient, np.array(ticks)))
        ax.set_xticklabels([fmt_point(t) for t in ticks])
        ax.set_xlabel("x (compactified axis)")
    ax.set_ylabel("f(x)")
    ax.axhline(0.0, color="0.7", linewidth=0.5)
    if title:
        ax.set_title(title)
    with rc_context({"svg.hashsalt": "fraxterp"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
