"""Transfer matrices, QR-stabilized Lyapunov exponents and sign patterns.

The 2M x 2M single-site matrix propagates the stacked amplitudes
Psi_n = (psi_{n+M}, ..., psi_{n-M+1})^T by one site, with nonzero entries
only on the first row and the subdiagonal.  Products are stabilized by a QR
re-factorization every step; the per-site exponents are the accumulated
log magnitudes of diag(R), sorted ascending.

Amplitudes along a run are generated from the model's tau for n = 1..steps
without any wrapping: the exponents are thermodynamic-limit objects and do
not depend on the boundary condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .models import ModelSpec, hopping


class SingularTransferError(RuntimeError):
    """Transfer pivot |J_{n,n+M}| below threshold at some site."""

    def __init__(self, site: int, magnitude: float):
        super().__init__(
            f"transfer pivot underflow at site {site}: |J| = {magnitude:.3e}")
        self.site = site
        self.magnitude = magnitude


class Scenario(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class TransferMatrix:
    site: int
    energy: complex
    entries: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class LyapunovSpectrum:
    """Per-site exponents at one probe energy, sorted ascending."""

    energy: complex
    gammas: np.ndarray = field(repr=False)
    steps: int
    epsilon_zero: float
    scenario: Scenario

    def sign_pattern(self) -> str:
        signs = []
        for gamma in self.gammas:
            if abs(gamma) < self.epsilon_zero:
                signs.append("0")
            else:
                signs.append("-" if gamma < 0 else "+")
        return "(" + ",".join(signs) + ")"


def _first_row(spec: ModelSpec, n: int, energy: complex,
               pivot_threshold: float) -> np.ndarray:
    m = spec.M
    pivot = hopping(spec, n, n + m)
    if abs(pivot) < pivot_threshold:
        raise SingularTransferError(n, abs(pivot))
    row = np.empty(2 * m, dtype=complex)
    for col, t in enumerate(range(m - 1, -m - 1, -1)):
        if t == 0:
            row[col] = (energy - hopping(spec, n, n)) / pivot
        else:
            row[col] = -hopping(spec, n, n + t) / pivot
    return row


def transfer_matrix(spec: ModelSpec, n: int, energy: complex,
                    pivot_threshold: float = 1e-12) -> TransferMatrix:
    """Single-site transfer matrix T_n(E).

    First row holds the recursion coefficients at descending offsets
    M-1, ..., 1, 0 (energy term), -1, ..., -M, all divided by the pivot
    J_{n,n+M}; the subdiagonal is the identity shifted down by one row.
    """
    m = spec.M
    t = np.zeros((2 * m, 2 * m), dtype=complex)
    t[0, :] = _first_row(spec, n, energy, pivot_threshold)
    for i in range(1, 2 * m):
        t[i, i - 1] = 1.0
    return TransferMatrix(site=n, energy=complex(energy), entries=t)


def supercell_transfer(spec: ModelSpec, cell: int, energy: complex,
                       pivot_threshold: float = 1e-12) -> np.ndarray:
    """Product of M single-site matrices propagating by one supercell."""
    m = spec.M
    out = np.eye(2 * m, dtype=complex)
    for k in range(1, m + 1):
        site = (cell - 1) * m + k
        out = transfer_matrix(spec, site, energy, pivot_threshold).entries @ out
    return out


def lyapunov_exponents(spec: ModelSpec, energies: Sequence[complex],
                       steps: int, warmup: int = 100, start: int = 1,
                       pivot_threshold: float = 1e-12) -> np.ndarray:
    """Batched per-site exponents, one sorted row of 2M values per energy.

    The orthonormal frame is re-factored every step and the diagonal of R is
    forced positive real by absorbing phases into Q.
    """
    energies = np.asarray(list(energies), dtype=complex)
    nb = len(energies)
    m = spec.M
    dim = 2 * m
    q = np.broadcast_to(np.eye(dim, dtype=complex), (nb, dim, dim)).copy()
    sums = np.zeros((nb, dim))
    t = np.zeros((nb, dim, dim), dtype=complex)
    for i in range(1, dim):
        t[:, i, i - 1] = 1.0
    for step in range(warmup + steps):
        n = start + step
        pivot = hopping(spec, n, n + m)
        if abs(pivot) < pivot_threshold:
            raise SingularTransferError(n, abs(pivot))
        for col, off in enumerate(range(m - 1, -m - 1, -1)):
            if off == 0:
                t[:, 0, col] = (energies - hopping(spec, n, n)) / pivot
            else:
                t[:, 0, col] = -hopping(spec, n, n + off) / pivot
        q, r = np.linalg.qr(t @ q)
        diag = np.abs(np.einsum("bii->bi", r))
        phase = np.einsum("bii->bi", r) / np.where(diag > 0, diag, 1.0)
        q *= phase[:, None, :]
        if step >= warmup:
            with np.errstate(divide="ignore"):
                sums += np.log(diag)
    return np.sort(sums / steps, axis=1)


def classify_pattern(gammas: Sequence[float], m: int,
                     epsilon_zero: float) -> Scenario:
    """Sign-pattern decision table on the central exponents.

    With zero meaning |gamma| < epsilon_zero: I when both central exponents
    vanish; II when exactly one does; III when they straddle zero; IV/V when
    they share a sign and the adjacent exponent toward zero vanishes (IV) or
    strictly opposes (V).  Anything else, including patterns whose adjacent
    exponent does not exist (M = 1), is unclassified.
    """
    gammas = np.asarray(gammas, dtype=float)
    if len(gammas) != 2 * m:
        raise ValueError(f"expected {2 * m} exponents, got {len(gammas)}")
    lo, hi = gammas[m - 1], gammas[m]
    zlo, zhi = abs(lo) < epsilon_zero, abs(hi) < epsilon_zero
    if zlo and zhi:
        return Scenario.I
    if zlo != zhi:
        return Scenario.II
    if lo < 0 < hi:
        return Scenario.III
    # central pair shares a sign; look at the adjacent exponent toward zero
    if m < 2:
        return Scenario.UNCLASSIFIED
    adjacent = gammas[m + 1] if lo < 0 else gammas[m - 2]
    if abs(adjacent) < epsilon_zero:
        return Scenario.IV
    if (lo < 0 and adjacent > 0) or (lo > 0 and adjacent < 0):
        return Scenario.V
    return Scenario.UNCLASSIFIED


def lyapunov_spectrum(spec: ModelSpec, energy: complex, steps: int,
                      epsilon_zero: float = 0.02, warmup: int = 100,
                      start: int = 1,
                      pivot_threshold: float = 1e-12) -> LyapunovSpectrum:
    """Exponents at one probe energy plus the classified scenario."""
    if steps < 1:
        raise ValueError("steps must be positive")
    if epsilon_zero <= 0:
        raise ValueError("epsilon_zero must be positive")
    gammas = lyapunov_exponents(spec, [energy], steps, warmup=warmup,
                                start=start, pivot_threshold=pivot_threshold)[0]
    scenario = classify_pattern(gammas, spec.M, epsilon_zero)
    return LyapunovSpectrum(energy=complex(energy), gammas=gammas, steps=steps,
                            epsilon_zero=epsilon_zero, scenario=scenario)


def bloch_roots(coeffs: Mapping[int, complex], energy: complex) -> np.ndarray:
    """Roots of the clean-model characteristic polynomial, ascending |beta|.

    ``coeffs[s]`` is the row coefficient t_s = J(n, n+s); the characteristic
    equation sum_s t_s beta^s = E is cleared to a degree-2M polynomial.  The
    log magnitudes ln|beta_i| are the clean model's Lyapunov exponents.
    """
    m = max(abs(s) for s in coeffs)
    if abs(coeffs.get(m, 0)) == 0 or abs(coeffs.get(-m, 0)) == 0:
        raise ValueError("leading coefficients t_{+-M} must be nonzero")
    poly = np.zeros(2 * m + 1, dtype=complex)
    for s, value in coeffs.items():
        poly[s + m] += value
    poly[m] -= energy
    roots = np.roots(poly[::-1])
    return roots[np.argsort(np.abs(roots))]


def shift_check(spec: ModelSpec, energy: complex, g_values: Iterable[float],
                steps: int, warmup: int = 100) -> dict[float, float]:
    """Residuals of the nonreciprocal shift law for the range-2 model.

    For each g, compares the exponents against the g = 0 exponents shifted
    by -g and returns the max absolute deviation.
    """
    from dataclasses import replace

    from .models import Kind

    if spec.kind not in (Kind.H1, Kind.HATANO_NELSON):
        raise ValueError("shift law applies to the exp((m-n)g) gauge family")
    base = lyapunov_exponents(replace(spec, g=0.0), [energy], steps,
                              warmup=warmup)[0]
    out = {}
    for g in g_values:
        gammas = lyapunov_exponents(replace(spec, g=float(g)), [energy], steps,
                                    warmup=warmup)[0]
        out[float(g)] = float(np.abs(gammas - (base - g)).max())
    return out
