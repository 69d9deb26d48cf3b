"""Shared helpers for the panel scripts: schema-checked CSV/JSON loading.

The renderers never recompute physics; every number comes from the CSV/JSON
files written by the quasiloc CLI.  Each input starts with a
``# schema = <name>.vN`` line followed by ``# key = value`` metadata echoed
from the producing run.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

SUPPORTED = {
    "spectrum": "spectrum.v1",
    "lyapunov": "lyapunov.v1",
    "duality_pairs": "duality_pairs.v1",
    "fits": "fits.v1",
    "profile": "profile.v1",
    "scaling": "scaling.v1",
}


class SchemaError(Exception):
    pass


def load_table(path: Path, expected: str):
    """Read one CLI CSV: returns (meta dict, header list, rows of strings)."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# schema = "):
        raise SchemaError(f"{path}: missing schema line; expected {expected}")
    schema = lines[0][len("# schema = "):].strip()
    if schema != expected:
        raise SchemaError(f"{path}: schema {schema!r}, expected {expected!r}")
    meta = {}
    body = []
    for line in lines[1:]:
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        elif line:
            body.append(line)
    header = body[0].split(",")
    rows = [ln.split(",") for ln in body[1:]]
    return meta, header, rows


def columns(header, rows, names):
    """Numeric columns by name as float arrays."""
    out = []
    for name in names:
        k = header.index(name)
        out.append(np.array([float(r[k]) for r in rows]))
    return out


def run_renderer(render_fn, description: str):
    """Common CLI shell: --in/--out plus renderer-specific flags."""
    import argparse

    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="PATH", help="input CSV (repeatable)")
    parser.add_argument("--out", required=True, metavar="PATH",
                        help="output image path")
    args = parser.parse_args()
    try:
        render_fn([Path(p) for p in args.inputs], Path(args.out))
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def save_figure(fig, out: Path):
    out.parent.mkdir(parents=True, exist_ok=True)
    # no metadata: re-rendering must be byte-identical
    fig.savefig(out, dpi=150, metadata={"Software": None}
                if out.suffix == ".png" else None)
