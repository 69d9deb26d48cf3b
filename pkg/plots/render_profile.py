#!/usr/bin/env python3
"""Log-amplitude spatial profile with the two fitted slope lines.

Input: one profile_<k>.csv from `quasiloc fit`; the fit parameters travel in
the file's metadata header (center, slopes, matching exponents).
"""

import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from panels import SUPPORTED, columns, load_table, run_renderer, save_figure


def render(inputs, out: Path):
    meta, header, rows = load_table(inputs[0], SUPPORTED["profile"])
    sites, amp = columns(header, rows, ["n", "abs_psi"])
    center = int(meta["fit_center"])
    left = float(meta["fit_left_slope"])
    right = float(meta["fit_right_slope"])
    gamma3 = float(meta.get("gamma3", "nan"))
    gamma4 = float(meta.get("gamma4", "nan"))

    good = amp > 0
    log_amp = np.full_like(amp, np.nan)
    log_amp[good] = np.log(amp[good])

    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    ax.plot(sites, log_amp, ".", ms=2, color="black", label="state")
    peak = float(np.nanmax(log_amp))
    span = min(400.0, sites.max() / 3)
    for slope, side, label in ((left, -1, f"left {left:+.3f} ({gamma4:+.3f})"),
                               (right, +1, f"right {right:+.3f} ({gamma3:+.3f})")):
        xs = center + side * np.linspace(0, span, 50)
        ax.plot(xs, peak + slope * (xs - center), "-", lw=1.5,
                color="crimson" if side > 0 else "royalblue", label=label)
    floor = math.log(max(np.min(amp[good]), 1e-300))
    ax.set_ylim(floor - 2, peak + 3)
    ax.set_xlabel("site n")
    ax.set_ylabel("ln |psi_n|")
    ax.set_title(f"g={meta.get('g', '?')}  E={meta.get('energy', '?')}  "
                 f"center={center}")
    ax.legend(loc="lower center", fontsize=8)
    fig.tight_layout()
    save_figure(fig, out)
    plt.close(fig)


if __name__ == "__main__":
    sys.exit(run_renderer(render, __doc__))
