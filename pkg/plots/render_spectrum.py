#!/usr/bin/env python3
"""Complex-plane eigenvalue scatter colored by fractal dimension.

Input: one spectrum.csv from `quasiloc spectrum`.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from panels import SUPPORTED, columns, load_table, run_renderer, save_figure


def render(inputs, out: Path):
    meta, header, rows = load_table(inputs[0], SUPPORTED["spectrum"])
    re_e, im_e, fd = columns(header, rows, ["re_E", "im_E", "fd"])

    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    sc = ax.scatter(re_e, im_e, c=fd, s=6, cmap="viridis", vmin=0.0, vmax=1.0,
                    linewidths=0)
    fig.colorbar(sc, ax=ax, label="fractal dimension")
    ax.set_xlabel("Re E")
    ax.set_ylabel("Im E")
    title = f"{meta.get('kind', '?')}  g={meta.get('g', '?')} " \
            f"h={meta.get('h', '?')}  N={len(rows)}  {meta.get('bc', '')}"
    ax.set_title(title)
    ax.axhline(0.0, color="0.8", lw=0.6, zorder=0)
    fig.tight_layout()
    save_figure(fig, out)
    plt.close(fig)


if __name__ == "__main__":
    sys.exit(run_renderer(render, __doc__))
