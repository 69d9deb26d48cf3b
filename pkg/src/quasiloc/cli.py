"""Reproducible experiment runner.

Subcommands ``spectrum``, ``lyapunov``, ``duality``, ``fit`` and ``scaling``
read a flat ``key = value`` config file (``--config``), apply command-line
overrides (``--set key=value``, highest precedence) and write CSV/JSON files
into ``--out``.  Every output starts with a ``# schema = <name>.v1`` line
followed by the fully resolved config echoed as ``# key = value`` lines, so
a run is reproducible from its own header.  Bodies are byte-deterministic:
no timestamps, fixed float formatting, fixed row order independent of
``--jobs``.

Exit codes: 0 success, 2 config error, 3 numerical failure.

The debugging triplet dump for matrices (row, col, re, im) documented here
is ``models.save_triplets``; it has no dedicated subcommand.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import analysis, duality, spectral, transfer
from .models import (BoundaryCondition, Kind, ModelSpec, build_matrix,
                     fibonacci_approx, h1_spec, h2_spec, hatano_nelson,
                     uniform_chain)

SCHEMAS = {
    "spectrum": "spectrum.v1",
    "lyapunov": "lyapunov.v1",
    "duality": "duality.v1",
    "duality_pairs": "duality_pairs.v1",
    "fits": "fits.v1",
    "profile": "profile.v1",
    "scaling": "scaling.v1",
}

_MODEL_KEYS = {
    "kind": "h1",
    "g": "0.0",
    "h": "0.0",
    "a": "3.0",
    "tau": "irrational",   # irrational | ra
    "j": "",
    "n": "",
    "bc": "pbc",
}

_COMMAND_KEYS = {
    "spectrum": {},
    "lyapunov": {
        "energies": "0.0",
        "steps": "10000",
        "epsilon_zero": "0.02",
        "warmup": "100",
    },
    "duality": {
        "fd_loc_max": "0.3",
        "fd_ext_min": "0.7",
        "match_tol": "1e-8",
    },
    "fit": {
        "energy": "0.0",
        "g_values": "",
        "window_sites": "200",
        "skip": "3",
        "floor": "1e-13",
        "steps": "",
        "refine": "false",
    },
    "scaling": {
        "observable": "fd",
        "j_range": "",
        "ref_energy": "0.0",
        "track_window": "0.05",
        "steps": "",
    },
}


class ConfigError(Exception):
    pass


def parse_config_file(path: Path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def resolve_config(command: str, file_cfg: dict[str, str],
                   overrides: dict[str, str]) -> dict[str, str]:
    allowed = dict(_MODEL_KEYS)
    allowed.update(_COMMAND_KEYS[command])
    cfg = dict(allowed)
    for source in (file_cfg, overrides):
        for key, value in source.items():
            if key not in allowed:
                raise ConfigError(
                    f"unknown key {key!r} for command {command!r} "
                    f"(allowed: {', '.join(sorted(allowed))})")
            cfg[key] = value
    return cfg


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _complexes(text: str) -> list[complex]:
    return [complex(tok) for tok in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(",", " ").split()]


def build_spec(cfg: dict[str, str]) -> tuple[ModelSpec, int, BoundaryCondition]:
    kind = cfg["kind"].lower()
    rational_j: Optional[int] = None
    if cfg["tau"] == "ra":
        if not cfg["j"]:
            raise ConfigError("tau = ra requires j")
        rational_j = int(cfg["j"])
    elif cfg["tau"] != "irrational":
        raise ConfigError("tau must be 'irrational' or 'ra'")
    g, h, a = float(cfg["g"]), float(cfg["h"]), float(cfg["a"])
    if kind == "h1":
        spec = h1_spec(g, h, a=a, rational_j=rational_j)
    elif kind == "h2":
        spec = h2_spec(g, h, a=a, rational_j=rational_j)
    elif kind == "uniform":
        spec = uniform_chain()
    elif kind == "hatano_nelson":
        spec = hatano_nelson(g)
    else:
        raise ConfigError(f"unsupported kind {kind!r} (h1, h2, uniform, "
                          f"hatano_nelson)")
    if cfg["n"]:
        n = int(cfg["n"])
    elif rational_j is not None:
        n = fibonacci_approx(rational_j).f_j
    else:
        raise ConfigError("lattice size n (or tau = ra with j) is required")
    try:
        bc = BoundaryCondition(cfg["bc"].lower())
    except ValueError as exc:
        raise ConfigError(f"bc must be obc or pbc, got {cfg['bc']!r}") from exc
    return spec, n, bc


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, schema: str, cfg: dict[str, str],
              header: list[str], rows: list[list]) -> None:
    lines = [f"# schema = {schema}"]
    for key in sorted(cfg):
        lines.append(f"# {key} = {cfg[key]}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _parallel_map(fn: Callable, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def cmd_spectrum(cfg: dict[str, str], out_dir: Path, jobs: int) -> None:
    spec, n, bc = build_spec(cfg)
    eigenset = spectral.eig(build_matrix(spec, n, bc))
    order = np.lexsort((eigenset.eigenvalues.imag, eigenset.eigenvalues.real))
    rows = []
    for rank, k in enumerate(order):
        w = eigenset.eigenvalues[k]
        rows.append([rank, float(w.real), float(w.imag),
                     float(eigenset.fds[k]), float(eigenset.residuals[k])])
    write_csv(out_dir / "spectrum.csv", SCHEMAS["spectrum"], cfg,
              ["index", "re_E", "im_E", "fd", "residual"], rows)


def cmd_lyapunov(cfg: dict[str, str], out_dir: Path, jobs: int) -> None:
    spec, n, bc = build_spec(cfg)
    energies = _complexes(cfg["energies"])
    if not energies:
        raise ConfigError("lyapunov needs at least one probe energy")
    steps = int(cfg["steps"])
    eps = float(cfg["epsilon_zero"])
    warmup = int(cfg["warmup"])

    def one(energy: complex):
        try:
            ls = transfer.lyapunov_spectrum(spec, energy, steps,
                                            epsilon_zero=eps, warmup=warmup)
            return ls, "ok"
        except transfer.SingularTransferError as exc:
            return None, f"error: {exc}"

    results = _parallel_map(one, energies, jobs)
    if all(r[0] is None for r in results):
        raise RuntimeError("all probe energies failed")
    rows = []
    for energy, (ls, status) in zip(energies, results):
        if ls is None:
            gam = [math.nan] * (2 * spec.M)
            scen = ""
        else:
            gam = [float(x) for x in ls.gammas]
            scen = ls.scenario.value
        rows.append([float(energy.real), float(energy.imag), *gam, scen,
                     eps, steps, status])
    header = (["re_E", "im_E"]
              + [f"gamma_{i}" for i in range(1, 2 * spec.M + 1)]
              + ["scenario", "epsilon_zero", "steps", "status"])
    write_csv(out_dir / "lyapunov.csv", SCHEMAS["lyapunov"], cfg, header, rows)


def cmd_duality(cfg: dict[str, str], out_dir: Path, jobs: int) -> None:
    if cfg["tau"] != "ra" or not cfg["j"]:
        raise ConfigError("duality requires tau = ra and a Fibonacci index j")
    report = duality.duality_report(
        g=float(cfg["g"]), h=float(cfg["h"]), j=int(cfg["j"]),
        fd_loc_max=float(cfg["fd_loc_max"]),
        fd_ext_min=float(cfg["fd_ext_min"]),
        match_tol=float(cfg["match_tol"]))
    payload = report.to_dict()
    payload["schema"] = SCHEMAS["duality"]
    payload["config"] = dict(sorted(cfg.items()))
    with open(out_dir / "duality.json", "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    rows = []
    for k, p in enumerate(report.pairs):
        rows.append([k, p.energy_1.real, p.energy_1.imag, p.energy_2.real,
                     p.energy_2.imag, p.fd_1, p.fd_2, p.distance,
                     p.verdict.value, int(p.ambiguous)])
    write_csv(out_dir / "duality_pairs.csv", SCHEMAS["duality_pairs"], cfg,
              ["index", "re_E1", "im_E1", "re_E2", "im_E2", "fd1", "fd2",
               "distance", "verdict", "ambiguous"], rows)


def cmd_fit(cfg: dict[str, str], out_dir: Path, jobs: int) -> None:
    base_spec, n, bc = build_spec(cfg)
    energy = complex(cfg["energy"])
    g_values = _floats(cfg["g_values"]) if cfg["g_values"] else [base_spec.g]
    steps = int(cfg["steps"]) if cfg["steps"] else n
    skip = cfg["skip"] if cfg["skip"] == "auto" else int(cfg["skip"])
    refine = cfg["refine"].lower() in ("1", "true", "yes")
    window = int(cfg["window_sites"])
    floor = float(cfg["floor"])

    def one(g: float):
        from dataclasses import replace
        spec = replace(base_spec, g=g)
        matrix = build_matrix(spec, n, bc)
        w, state, _ = spectral.nearest_eigenpair(matrix, energy, refine=refine)
        fit = analysis.localization_fit(state, bc, window_sites=window,
                                        skip=skip, floor=floor)
        gammas = transfer.lyapunov_exponents(spec, [w], steps)[0]
        m = spec.M
        g3, g4 = float(gammas[m]), float(gammas[m + 1])
        return w, state, fit, g3, g4

    results = _parallel_map(one, g_values, jobs)
    rows = []
    for k, (g, (w, state, fit, g3, g4)) in enumerate(zip(g_values, results)):
        rel_l = abs(fit.left.slope - g4) / abs(g4) if g4 else math.nan
        rel_r = abs(fit.right.slope - g3) / abs(g3) if g3 else math.nan
        rows.append([float(w.real), g, fit.center, fit.left.slope,
                     fit.right.slope, g3, g4, rel_l, rel_r])
        amp = np.abs(np.asarray(state, dtype=complex))
        prof_cfg = dict(cfg)
        prof_cfg.update({
            "g": repr(g), "fit_center": str(fit.center),
            "fit_left_slope": repr(fit.left.slope),
            "fit_right_slope": repr(fit.right.slope),
            "gamma3": repr(g3), "gamma4": repr(g4),
        })
        prows = [[site + 1, float(a)] for site, a in enumerate(amp)]
        write_csv(out_dir / f"profile_{k}.csv", SCHEMAS["profile"], prof_cfg,
                  ["n", "abs_psi"], prows)
    write_csv(out_dir / "fits.csv", SCHEMAS["fits"], cfg,
              ["E", "g", "center", "left_slope", "right_slope", "gamma3",
               "gamma4", "rel_err_left", "rel_err_right"], rows)


def cmd_scaling(cfg: dict[str, str], out_dir: Path, jobs: int) -> None:
    spec, _, bc = build_spec(cfg)
    if not cfg["j_range"]:
        raise ConfigError("scaling needs j_range")
    j_range = _ints(cfg["j_range"])
    curve = analysis.scaling_sweep(
        spec, cfg["observable"], j_range, complex(cfg["ref_energy"]),
        window=float(cfg["track_window"]), bc=bc,
        steps=int(cfg["steps"]) if cfg["steps"] else None)
    if curve.observable == "fd":
        value_names = ["fd"]
    else:
        value_names = [f"gamma_{i}" for i in range(1, 2 * spec.M + 1)]
    rows = []
    for point in curve.points:
        base = [point.n_sites, 1.0 / math.log(point.n_sites)]
        if point.gap:
            rows.append(base + [math.nan] * len(value_names) + ["gap"])
        else:
            rows.append(base + [float(v) for v in point.values] + ["ok"])
    foot_cfg = dict(cfg)
    for name, b, err, slope in zip(value_names, curve.intercepts,
                                   curve.intercept_stderrs, curve.slopes):
        foot_cfg[f"intercept_{name}"] = repr(float(b))
        foot_cfg[f"intercept_stderr_{name}"] = repr(float(err))
        foot_cfg[f"slope_{name}"] = repr(float(slope))
    write_csv(out_dir / "scaling.csv", SCHEMAS["scaling"], foot_cfg,
              ["N", "inv_log_N"] + value_names + ["status"], rows)


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "lyapunov": cmd_lyapunov,
    "duality": cmd_duality,
    "fit": cmd_fit,
    "scaling": cmd_scaling,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasiloc",
        description="non-Hermitian quasiperiodic lattice experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None,
                       help="flat key = value config file")
        p.add_argument("--out", type=Path, default=Path("."),
                       help="output directory")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel workers for independent work items")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VAL",
                       help="config override (highest precedence)")
        p.add_argument("--seedless", action="store_true",
                       help="reserved; the runner uses no RNG anywhere")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        file_cfg = parse_config_file(args.config) if args.config else {}
        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VAL, got {item!r}")
            key, value = item.split("=", 1)
            overrides[key.strip()] = value.strip()
        cfg = resolve_config(args.command, file_cfg, overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    args.out.mkdir(parents=True, exist_ok=True)
    try:
        _COMMANDS[args.command](cfg, args.out, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
