"""Quasiperiodic non-Hermitian lattice models as dense matrices.

Two concrete models are provided besides generic finite-range chains:

* ``Kind.H1`` -- hopping range 2, nonreciprocity ``g`` in the exponential
  prefactor and gain/loss ``h`` inside the cosine modulation,
  J(n -> n+t) = exp(-t*g) * cos(tau*pi*(2n+t) + i*h) / |t|**a.
* ``Kind.H2`` -- nearest-neighbor chain with two modulation harmonics,
  bond potential V_m = sum_{s=1,2} cos(tau*s*pi*(2m+1) + i*s*g) / s**a and
  directed amplitudes (exp(-h)*V_m, exp(+h)*V_m).

Site indices are 1-based throughout the amplitude rules; matrices map site
``n`` to row/column ``n-1``.  With ``rational_j`` set, tau is the exact
Fibonacci rational F_{j-1}/F_j and all modulation phases are reduced in
integer arithmetic, so matrices at size N = F_j are free of phase drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np

#: Inverse golden ratio, the irrational modulation frequency.
TAU = (math.sqrt(5.0) - 1.0) / 2.0

TauValue = Union[float, Fraction]


class Kind(str, Enum):
    GENERIC = "generic"
    H1 = "h1"
    H2 = "h2"
    UNIFORM_CHAIN = "uniform"
    HATANO_NELSON = "hatano_nelson"


class BoundaryCondition(str, Enum):
    OBC = "obc"
    PBC = "pbc"


@dataclass(frozen=True)
class FibonacciApprox:
    """Consecutive Fibonacci pair (F_{j-1}, F_j) and their ratio."""

    j: int
    f_prev: int
    f_j: int

    @property
    def tau_ra(self) -> Fraction:
        return Fraction(self.f_prev, self.f_j)


def fibonacci_approx(j: int) -> FibonacciApprox:
    """Rational approximation tau_RA = F_{j-1}/F_j with F_1 = 0, F_2 = 1.

    Parameters
    ----------
    j : int
        Fibonacci index, j >= 3 (so that F_j >= 1 and the ratio is defined).
    """
    if j < 3:
        raise ValueError(f"Fibonacci index must be >= 3, got {j}")
    a, b = 0, 1
    for _ in range(j - 2):
        a, b = b, a + b
    return FibonacciApprox(j=j, f_prev=a, f_j=b)


def fibonacci_index(n: int) -> int:
    """Index j with F_j == n, for Fibonacci lattice sizes."""
    a, b, j = 0, 1, 2
    while b < n:
        a, b = b, a + b
        j += 1
    if b != n:
        raise ValueError(f"{n} is not a Fibonacci number")
    return j


def modulated_cos(k: int, y: float, tau: TauValue) -> complex:
    """cos(tau*pi*k + i*y) for integer k.

    For rational tau = p/q the phase is reduced mod 2q in exact integer
    arithmetic before the float multiply, which keeps the phase error bounded
    independently of k.
    """
    if isinstance(tau, Fraction):
        p, q = tau.numerator, tau.denominator
        x = math.pi * ((p * k) % (2 * q)) / q
    else:
        x = math.pi * tau * k
    return complex(math.cos(x) * math.cosh(y), -math.sin(x) * math.sinh(y))


def h1_amplitude(n: int, t: int, g: float, h: float, tau: TauValue,
                 a: float = 3.0) -> complex:
    """Directed hopping amplitude of the range-2 model, from site n to n+t."""
    if t == 0 or abs(t) > 2:
        raise ValueError(f"offset must be in {{+-1, +-2}}, got {t}")
    return math.exp(-t * g) * modulated_cos(2 * n + t, h, tau) / abs(t) ** a


def h2_bond(m: int, g: float, h: float, tau: TauValue,
            a: float = 3.0) -> tuple[complex, complex]:
    """Directed amplitudes of bond (m, m+1) of the dual chain.

    Returns ``(forward, backward)`` where ``forward`` multiplies the hop from
    m+1 to m (matrix entry (m, m+1)) and ``backward`` the hop from m to m+1
    (entry (m+1, m)); their ratio is exp(2h) by construction.
    """
    v = sum(modulated_cos(s * (2 * m + 1), s * g, tau) / s ** a for s in (1, 2))
    return math.exp(-h) * v, math.exp(h) * v


@dataclass(frozen=True)
class ModelSpec:
    """Symbolic description of a lattice model.

    ``custom_amplitude(n, t)`` gives the directed amplitude from site n to
    site n+t for the GENERIC kind (t = 0 is an on-site term).
    """

    kind: Kind
    M: int
    g: float = 0.0
    h: float = 0.0
    a: float = 3.0
    rational_j: Optional[int] = None
    custom_amplitude: Optional[Callable[[int, int], complex]] = None

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("hopping range M must be >= 1")
        if self.kind is Kind.H1 and self.M != 2:
            raise ValueError("H1 has hopping range M = 2")
        if self.kind is Kind.H2 and self.M != 1:
            raise ValueError("H2 has hopping range M = 1")
        if self.kind is Kind.GENERIC and self.custom_amplitude is None:
            raise ValueError("GENERIC kind needs a custom_amplitude rule")
        if self.rational_j is not None and self.rational_j < 3:
            raise ValueError("rational approximation index must be >= 3")

    @cached_property
    def tau(self) -> TauValue:
        if self.rational_j is None:
            return TAU
        return fibonacci_approx(self.rational_j).tau_ra

    def required_size(self) -> Optional[int]:
        """Lattice size pinned by the rational approximation, if any."""
        if self.rational_j is None:
            return None
        return fibonacci_approx(self.rational_j).f_j


def h1_spec(g: float, h: float, a: float = 3.0,
            rational_j: Optional[int] = None) -> ModelSpec:
    return ModelSpec(kind=Kind.H1, M=2, g=g, h=h, a=a, rational_j=rational_j)


def h2_spec(g: float, h: float, a: float = 3.0,
            rational_j: Optional[int] = None) -> ModelSpec:
    return ModelSpec(kind=Kind.H2, M=1, g=g, h=h, a=a, rational_j=rational_j)


def uniform_chain() -> ModelSpec:
    return ModelSpec(kind=Kind.UNIFORM_CHAIN, M=1)


def hatano_nelson(g: float) -> ModelSpec:
    """Clean nonreciprocal chain with J(n, n+1) = e^{-g}, J(n+1, n) = e^{+g}."""
    return ModelSpec(kind=Kind.HATANO_NELSON, M=1, g=g)


def clean_model(coeffs: dict[int, complex], M: int) -> ModelSpec:
    """Translation-invariant model from row coefficients t_s = J(n, n+s)."""
    cc = dict(coeffs)

    def amplitude(n: int, t: int) -> complex:
        # J(n+t, n) = t_{-t} in the row convention
        return cc.get(-t, 0j)

    return ModelSpec(kind=Kind.GENERIC, M=M, custom_amplitude=amplitude)


def hopping(spec: ModelSpec, n: int, m: int) -> complex:
    """Matrix element J_{n,m} (amplitude from site m to site n), unwrapped."""
    t = n - m
    if abs(t) > spec.M:
        return 0j
    if spec.kind is Kind.H1:
        if t == 0:
            return 0j
        return h1_amplitude(m, t, spec.g, spec.h, spec.tau, spec.a)
    if spec.kind is Kind.H2:
        if t == 1:
            return h2_bond(m, spec.g, spec.h, spec.tau, spec.a)[1]
        if t == -1:
            return h2_bond(n, spec.g, spec.h, spec.tau, spec.a)[0]
        return 0j
    if spec.kind is Kind.UNIFORM_CHAIN:
        return 1.0 + 0j if abs(t) == 1 else 0j
    if spec.kind is Kind.HATANO_NELSON:
        if t == 1:
            return complex(math.exp(spec.g))
        if t == -1:
            return complex(math.exp(-spec.g))
        return 0j
    return complex(spec.custom_amplitude(m, t))


@dataclass(frozen=True)
class LatticeMatrix:
    """Dense realization of a model under a boundary condition."""

    spec: ModelSpec
    bc: BoundaryCondition
    entries: np.ndarray = field(repr=False)

    @property
    def n_sites(self) -> int:
        return self.entries.shape[0]


def build_matrix(spec: ModelSpec, n_sites: int,
                 bc: BoundaryCondition = BoundaryCondition.OBC) -> LatticeMatrix:
    """Assemble the dense N x N matrix of a model.

    Every directed bond is generated once from its source site with the
    unwrapped amplitude rule; under PBC only the destination index is reduced
    mod N.  At a rational tau with N = F_j the amplitude sequence is exactly
    N-periodic, so the wrap introduces no seam.
    """
    bc = BoundaryCondition(bc)
    required = spec.required_size()
    if required is not None and n_sites != required:
        raise ValueError(
            f"rational approximation j={spec.rational_j} requires N={required}, "
            f"got {n_sites}")
    if n_sites <= 2 * spec.M:
        raise ValueError(f"lattice size must exceed 2M={2 * spec.M}, got {n_sites}")

    a = np.zeros((n_sites, n_sites), dtype=complex)
    pbc = bc is BoundaryCondition.PBC

    if spec.kind is Kind.H2:
        last = n_sites if pbc else n_sites - 1
        for m in range(1, last + 1):
            fwd, bwd = h2_bond(m, spec.g, spec.h, spec.tau, spec.a)
            d = m % n_sites + 1
            a[m - 1, d - 1] += fwd
            a[d - 1, m - 1] += bwd
        return LatticeMatrix(spec=spec, bc=bc, entries=a)

    offsets = [t for t in range(-spec.M, spec.M + 1)
               if t != 0 or spec.kind is Kind.GENERIC]
    for n in range(1, n_sites + 1):
        for t in offsets:
            d = n + t
            if pbc:
                d = (d - 1) % n_sites + 1
            elif d < 1 or d > n_sites:
                continue
            # directed amplitude from source n to destination n+t, unwrapped
            a[d - 1, n - 1] += hopping(spec, n + t, n)
    return LatticeMatrix(spec=spec, bc=bc, entries=a)


def gauge_exponent(spec: ModelSpec) -> Optional[float]:
    """Exponent alpha such that diag(e^{alpha n}) A diag(e^{-alpha n}) is
    Hermitian under OBC, when the nonreciprocity is a pure gauge.

    Applies to H1 with h = 0 (alpha = g), H2 with g = 0 (alpha = -h) and the
    clean nonreciprocal chain (alpha = g).  Returns None otherwise.
    """
    if spec.kind is Kind.H1 and spec.h == 0.0 and spec.g != 0.0:
        return spec.g
    if spec.kind is Kind.H2 and spec.g == 0.0 and spec.h != 0.0:
        return -spec.h
    if spec.kind is Kind.HATANO_NELSON and spec.g != 0.0:
        return spec.g
    return None


def gauged_matrix(matrix: LatticeMatrix, alpha: float) -> np.ndarray:
    """diag(e^{alpha n}) A diag(e^{-alpha n}), computed entrywise.

    Only offsets |n - m| <= M occur under OBC, so the scaling factors stay
    bounded regardless of the lattice size.
    """
    n_sites = matrix.n_sites
    rows, cols = np.nonzero(matrix.entries)
    out = np.zeros_like(matrix.entries)
    out[rows, cols] = matrix.entries[rows, cols] * np.exp(
        alpha * (rows.astype(float) - cols.astype(float)))
    return out


def save_triplets(matrix: LatticeMatrix, path) -> None:
    """Dump nonzero entries as text rows ``row col re im`` (1-based indices)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# row col re im\n")
        rows, cols = np.nonzero(matrix.entries)
        for r, c in zip(rows, cols):
            v = matrix.entries[r, c]
            fh.write(f"{r + 1} {c + 1} {v.real:.17g} {v.imag:.17g}\n")
