"""Real-space localization fits and finite-size scaling sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np
import scipy.stats

from . import spectral, transfer
from .models import (BoundaryCondition, ModelSpec, build_matrix,
                     fibonacci_approx)


class DegenerateFitError(RuntimeError):
    """Too few usable profile points on one side of the peak."""


@dataclass(frozen=True)
class SideFit:
    slope: float
    stderr: float
    r_squared: float
    n_points: int


@dataclass(frozen=True)
class LocalizationFit:
    """Two-sided exponential fit around the amplitude maximum.

    Slopes carry the sign of d(ln|psi|)/dn: positive approaching the center
    from the left, negative leaving it to the right, for a localized state.
    """

    center: int
    left: SideFit
    right: SideFit
    window: tuple[int, int]


def _side_points(amp: np.ndarray, center: int, side: int, window_sites: int,
                 skip: int, floor: float, pbc: bool):
    n = len(amp)
    offsets = np.arange(skip, window_sites + 1)
    if pbc:
        idx = (center - 1 + side * offsets) % n
    else:
        raw = center - 1 + side * offsets
        keep = (raw >= 0) & (raw < n)
        offsets, idx = offsets[keep], raw[keep]
    values = amp[idx]
    good = values > floor
    # site coordinate unwrapped around the center
    x = center + side * offsets[good].astype(float)
    y = np.log(values[good])
    return x, y


def _auto_skip(x: np.ndarray, y: np.ndarray, center: int,
               lo: int = 3, hi: int = 60) -> int:
    """Skip roughly one localization length: the near-peak zone mixes decay
    channels and biases the asymptotic slope."""
    if len(x) < 4:
        return lo
    slope = scipy.stats.linregress(x, y).slope
    if not np.isfinite(slope) or slope == 0:
        return lo
    return int(np.clip(math.ceil(1.0 / abs(slope)), lo, hi))


def localization_fit(state: np.ndarray,
                     bc: BoundaryCondition = BoundaryCondition.PBC,
                     window_sites: int = 200,
                     skip: Union[int, str] = 3,
                     floor: float = 1e-13) -> LocalizationFit:
    """Least-squares lines through (n, ln|psi_n|) on both sides of the peak.

    The peak site itself is always excluded; ``skip`` drops that many sites
    nearest the peak (``"auto"`` skips about one localization length, which
    removes the channel-mixing transient).  Sites with |psi_n| < floor are
    ignored.  Under PBC, site indices are unwrapped circularly around the
    center before fitting.
    """
    bc = BoundaryCondition(bc)
    if window_sites < 4:
        raise ValueError("window_sites must be >= 4")
    state = np.asarray(state)
    n = len(state)
    pbc = bc is BoundaryCondition.PBC
    if pbc and window_sites > n // 2:
        raise ValueError(
            f"window of {window_sites} sites exceeds half the ring (N={n})")
    # extended-precision inputs only extend the usable floor; the fit itself
    # is insensitive to sub-double digits
    amp = np.abs(state).astype(np.float64)
    center = int(np.argmax(amp)) + 1

    sides = {}
    for label, side in (("left", -1), ("right", +1)):
        base_skip = 1 if skip == "auto" else int(skip)
        x, y = _side_points(amp, center, side, window_sites, max(1, base_skip),
                            floor, pbc)
        if skip == "auto":
            x2, y2 = _side_points(amp, center, side, window_sites,
                                  _auto_skip(x, y, center), floor, pbc)
            if len(x2) >= 4:
                x, y = x2, y2
        if len(x) < 3:
            raise DegenerateFitError(
                f"{label} side has {len(x)} usable points (floor {floor:g})")
        fit = scipy.stats.linregress(x, y)
        sides[label] = SideFit(slope=float(fit.slope),
                               stderr=float(fit.stderr),
                               r_squared=float(fit.rvalue ** 2),
                               n_points=len(x))
    return LocalizationFit(center=center, left=sides["left"],
                           right=sides["right"],
                           window=(window_sites, window_sites))


@dataclass(frozen=True)
class ScalingPoint:
    n_sites: int
    energy: Optional[complex]
    values: Optional[np.ndarray]
    gap: bool


@dataclass(frozen=True)
class ScalingCurve:
    """Per-size observable with a linear extrapolation in 1/ln N."""

    sizes: list[int]
    points: list[ScalingPoint] = field(repr=False)
    observable: str
    intercepts: np.ndarray
    intercept_stderrs: np.ndarray
    slopes: np.ndarray

    @property
    def inv_log_sizes(self) -> np.ndarray:
        return 1.0 / np.log(np.asarray(self.sizes, dtype=float))

    def value_matrix(self) -> np.ndarray:
        rows = [p.values for p in self.points if not p.gap]
        return np.asarray(rows, dtype=float)


def _extrapolate(x: np.ndarray, values: np.ndarray):
    intercepts, errs, slopes = [], [], []
    for col in range(values.shape[1]):
        fit = scipy.stats.linregress(x, values[:, col])
        intercepts.append(fit.intercept)
        errs.append(fit.intercept_stderr)
        slopes.append(fit.slope)
    return (np.asarray(intercepts), np.asarray(errs), np.asarray(slopes))


def scaling_sweep(spec: ModelSpec, observable: str, j_range: Sequence[int],
                  ref_energy: complex, window: float = 0.05,
                  bc: BoundaryCondition = BoundaryCondition.PBC,
                  steps: Optional[int] = None,
                  epsilon_zero: float = 0.02) -> ScalingCurve:
    """Track one state across Fibonacci sizes and extrapolate vs 1/ln N.

    ``observable`` is ``"fd"`` (fractal dimension of the tracked state) or
    ``"pattern"`` (the 2M exponents at the tracked eigenvalue, steps
    defaulting to the lattice size).  At each size the state nearest
    ``ref_energy`` is selected; if it falls outside the tracking window the
    size is recorded as a gap rather than failing.
    """
    if observable not in ("fd", "pattern"):
        raise ValueError("observable must be 'fd' or 'pattern'")
    j_list = list(j_range)
    if j_list != sorted(j_list):
        raise ValueError("j_range must be ascending")
    points = []
    sizes = []
    for j in j_list:
        n = fibonacci_approx(j).f_j
        sizes.append(n)
        size_spec = spec if spec.rational_j is None else replace(spec, rational_j=j)
        matrix = build_matrix(size_spec, n, bc)
        energy, state, _ = spectral.nearest_eigenpair(matrix, ref_energy)
        if abs(energy - ref_energy) > window / 2:
            points.append(ScalingPoint(n_sites=n, energy=None, values=None,
                                       gap=True))
            continue
        if observable == "fd":
            values = np.array([spectral.fractal_dimension(state)])
        else:
            values = transfer.lyapunov_exponents(
                size_spec, [energy], steps if steps is not None else n)[0]
        points.append(ScalingPoint(n_sites=n, energy=complex(energy),
                                   values=values, gap=False))
    kept = [(1.0 / math.log(p.n_sites), p.values) for p in points if not p.gap]
    if len(kept) >= 2:
        x = np.array([k[0] for k in kept])
        vals = np.array([k[1] for k in kept])
        intercepts, errs, slopes = _extrapolate(x, vals)
    else:
        width = 1 if observable == "fd" else 2 * spec.M
        intercepts = np.full(width, np.nan)
        errs = np.full(width, np.nan)
        slopes = np.full(width, np.nan)
    return ScalingCurve(sizes=sizes, points=points, observable=observable,
                        intercepts=intercepts, intercept_stderrs=errs,
                        slopes=slopes)
