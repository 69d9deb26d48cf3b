#!/usr/bin/env python3
"""Side-by-side dual spectra colored by each partner's fractal dimension.

Input: one duality_pairs.csv from `quasiloc duality`; left panel shows the
range-2 model's eigenvalues colored by its FDs, right panel the dual chain's.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from panels import SUPPORTED, columns, load_table, run_renderer, save_figure


def render(inputs, out: Path):
    meta, header, rows = load_table(inputs[0], SUPPORTED["duality_pairs"])
    re1, im1, re2, im2, fd1, fd2 = columns(
        header, rows, ["re_E1", "im_E1", "re_E2", "im_E2", "fd1", "fd2"])

    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0), sharex=True,
                             sharey=True)
    for ax, re_e, im_e, fd, label in ((axes[0], re1, im1, fd1, "range-2 model"),
                                      (axes[1], re2, im2, fd2, "dual chain")):
        sc = ax.scatter(re_e, im_e, c=fd, s=6, cmap="viridis", vmin=0.0,
                        vmax=1.0, linewidths=0)
        ax.set_title(label)
        ax.set_xlabel("Re E")
        ax.axhline(0.0, color="0.8", lw=0.6, zorder=0)
    axes[0].set_ylabel("Im E")
    fig.colorbar(sc, ax=axes, label="fractal dimension", shrink=0.85)
    fig.suptitle(f"g={meta.get('g', '?')}  h={meta.get('h', '?')}  "
                 f"N={len(rows)}")
    save_figure(fig, out)
    plt.close(fig)


if __name__ == "__main__":
    sys.exit(run_renderer(render, __doc__))
