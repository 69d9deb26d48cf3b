#!/usr/bin/env python3
"""Finite-size scaling panel: observable vs 1/ln N with the linear fit.

Input: one scaling.csv from `quasiloc scaling` (fd or pattern observable);
the extrapolation intercepts travel in the metadata header.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from panels import SUPPORTED, columns, load_table, run_renderer, save_figure


def render(inputs, out: Path):
    meta, header, rows = load_table(inputs[0], SUPPORTED["scaling"])
    rows = [r for r in rows if r[-1] == "ok"]
    if not rows:
        raise ValueError("no tracked points to plot (all gaps)")
    value_names = header[2:-1]
    (x,) = columns(header, rows, ["inv_log_N"])
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    grid = np.linspace(0.0, x.max() * 1.05, 40)
    for name in value_names:
        (y,) = columns(header, rows, [name])
        pts = ax.plot(x, y, "o", ms=5, label=name)[0]
        b = meta.get(f"intercept_{name}")
        slope = meta.get(f"slope_{name}")
        if b is not None and slope is not None:
            ax.plot(grid, float(b) + float(slope) * grid, "--", lw=1.0,
                    color=pts.get_color())
    ax.set_xlabel("1 / ln N")
    ax.set_ylabel("fd" if value_names == ["fd"] else "Lyapunov exponents")
    ax.set_xlim(0, None)
    ax.legend(fontsize=8)
    ax.set_title(f"{meta.get('kind', '?')}  g={meta.get('g', '?')} "
                 f"h={meta.get('h', '?')}  tracked E={meta.get('ref_energy', '?')}")
    fig.tight_layout()
    save_figure(fig, out)
    plt.close(fig)


if __name__ == "__main__":
    sys.exit(run_renderer(render, __doc__))
