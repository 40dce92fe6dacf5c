#!/usr/bin/env python3
# ReducedDensity.py
# Author: John Akujobi
# Date: 2026-10-19
# Version: 1.0
"""
The (1,1)-reduced density operator, the Hartree projector, trace distances and
the nine bound terms controlling the distance through fluctuation moments.

Reduced densities are stored as M² x M² matrices in orthonormal mode
coordinates, rows and columns indexed by the site pair (x, y) -> x·M + y.
In these coordinates the operator has trace 1; the pointwise lattice kernel
(whose h^{2d}-weighted trace is 1) is `ReducedDensity.kernel()`.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .Errors import DimensionError, NumericalError
from .FockSpace import SectorState, TruncatedFockState, annihilation_matrix

HERMITIAN_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-9
POSITIVITY_TOLERANCE = 1e-9


@dataclass
class ReducedDensity:
    """
    Hermitian operator on one-body ⊗ one-body space.

    Attributes:
        matrix: (M², M²) complex matrix in mode coordinates.
        modes: M.
        cell_volume: h^d of the lattice (for `kernel`).
        normalization: the divisor actually used (⟨𝒩⊗𝒩⟩, n1·n2 or N1·N2).
    """
    matrix: np.ndarray
    modes: int
    cell_volume: float = 1.0
    normalization: float = 1.0

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def kernel(self) -> np.ndarray:
        """Pointwise kernel γ(x, y; x', y') on the lattice."""
        return self.matrix / self.cell_volume ** 2

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) if self.matrix.size else 0.0

    def invariant_report(self) -> Dict[str, float]:
        return {"hermiticity": self.hermiticity_residual(),
                "trace_error": abs(self.trace - 1.0),
                "min_eigenvalue": float(self.eigenvalues()[0])}

    def satisfies_invariants(self) -> bool:
        report = self.invariant_report()
        return (report["hermiticity"] <= HERMITIAN_TOLERANCE and report["trace_error"] <= TRACE_TOLERANCE
                and report["min_eigenvalue"] >= -POSITIVITY_TOLERANCE)


def _pair_amplitudes(psi: np.ndarray, modes: int, n1: int, n2: int) -> np.ndarray:
    """Rows K[(x, y)] = b_x c_y ψ, flattened."""
    rows = []
    c_ops = [annihilation_matrix(y, modes, n2) for y in range(modes)]
    for x in range(modes):
        bx_psi = annihilation_matrix(x, modes, n1) @ psi
        for y in range(modes):
            rows.append((c_ops[y] @ bx_psi.T).T.ravel())
    return np.array(rows)


def _unnormalized_sector_density(state: SectorState) -> np.ndarray:
    amplitudes = _pair_amplitudes(state.matrix, state.modes, state.n1, state.n2)
    return amplitudes @ amplitudes.conj().T


def reduced_density_sector(state: SectorState, cell_volume: float = 1.0) -> ReducedDensity:
    """
    γ(x,y; x',y') = ⟨ψ, b*_{x'} c*_{y'} c_y b_x ψ⟩ / (n1 n2) on one sector,
    the partial trace over n1 - 1 and n2 - 1 variables.

    Args:
        state: Sector state with n1, n2 >= 1 (need not be normalized)
        cell_volume: h^d, carried into the result for kernel conversion

    Returns:
        ReducedDensity: Trace-one γ on the M² x M² pair space

    Raises:
        DimensionError: n1 = 0 or n2 = 0.
    """
    if state.n1 < 1 or state.n2 < 1:
        raise DimensionError(f"reduced density needs n1, n2 >= 1, got sector {state.label}")
    norm_sq = state.norm_sq
    if not norm_sq > 0:
        raise NumericalError(f"sector {state.label} state has zero norm")
    divisor = state.n1 * state.n2 * norm_sq
    return ReducedDensity(_unnormalized_sector_density(state) / divisor, state.modes, cell_volume, divisor)


def reduced_density_fock(state: TruncatedFockState, cell_volume: float = 1.0,
                         normalization: str = "actual",
                         reference: Optional[Tuple[float, float]] = None) -> ReducedDensity:
    """
    γ for a truncated Fock state. b_x c_y lowers both numbers by one, so only
    same-sector matrix elements survive and γ is a sum over sectors.

    normalization:
        'actual'  - divide by the truncated ⟨ψ, 𝒩⊗𝒩 ψ⟩ (trace exactly 1).
        'exact_n' - divide by N1·N2 ‖ψ‖² from `reference` (trace 1 up to truncation).

    Returns:
        ReducedDensity: γ with `divisor` recording the normalization used

    Raises:
        NumericalError: no sector with n1, n2 >= 1 carries weight.
    """
    M = state.modes
    total = np.zeros((M * M, M * M), dtype=complex)
    weight = 0.0
    for (n1, n2), sector in sorted(state.sectors.items()):
        if n1 < 1 or n2 < 1 or sector.norm_sq == 0:
            continue
        total += _unnormalized_sector_density(sector)
        weight += n1 * n2 * sector.norm_sq
    if not weight > 0:
        raise NumericalError("reduced density of a state without weight in any sector n1, n2 >= 1")
    if normalization == "actual":
        divisor = weight
    elif normalization == "exact_n":
        if reference is None:
            raise ValueError("normalization 'exact_n' needs the reference numbers (N1, N2)")
        divisor = reference[0] * reference[1] * state.norm_sq
    else:
        raise ValueError(f"normalization must be 'actual' or 'exact_n', got {normalization!r}")
    return ReducedDensity(total / divisor, M, cell_volume, divisor)


def hartree_projector(u: np.ndarray, v: np.ndarray, cell_volume: float = 1.0) -> ReducedDensity:
    """
    |u ⊗ v⟩⟨u ⊗ v| for lattice-normalized u, v.

    Raises:
        NumericalError: h^d‖u‖² or h^d‖v‖² differs from 1 by more than 1e-8.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionError(f"u and v must be vectors of equal length, got {u.shape} and {v.shape}")
    for name, orbital in (("u", u), ("v", v)):
        norm_sq = cell_volume * float(np.vdot(orbital, orbital).real)
        if abs(norm_sq - 1.0) > 1e-8:
            raise NumericalError(f"{name} is not normalized (h^d‖{name}‖² = {norm_sq!r})")
    w = np.kron(np.sqrt(cell_volume) * u, np.sqrt(cell_volume) * v)
    return ReducedDensity(np.outer(w, w.conj()), u.shape[0], cell_volume, 1.0)


def trace_distance(a: Union[ReducedDensity, np.ndarray], b: Union[ReducedDensity, np.ndarray]) -> float:
    """
    Tr|A - B| = Σ|λ_k| over the eigenvalues of the Hermitian difference.

    Raises:
        DimensionError: shapes differ.
        NumericalError: an input is not Hermitian within 1e-8.
    """
    ma = a.matrix if isinstance(a, ReducedDensity) else np.asarray(a)
    mb = b.matrix if isinstance(b, ReducedDensity) else np.asarray(b)
    if ma.shape != mb.shape or ma.ndim != 2 or ma.shape[0] != ma.shape[1]:
        raise DimensionError(f"incompatible operators of shapes {ma.shape} and {mb.shape}")
    for name, m in (("first", ma), ("second", mb)):
        residual = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if residual > 1e-8:
            raise NumericalError(f"{name} operator is not Hermitian (residual {residual:.2e})")
    diff = ma - mb
    diff = 0.5 * (diff + diff.conj().T)
    return float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def species_marginals(gamma: ReducedDensity) -> Tuple[np.ndarray, np.ndarray]:
    """
    One-species densities of a two-species γ.

    Args:
        gamma: Reduced density on the M² x M² pair space

    Returns:
        Tuple[np.ndarray, np.ndarray]: Tr_y γ and Tr_x γ, each M x M with the trace of γ
    """
    M = gamma.modes
    tensor = gamma.matrix.reshape(M, M, M, M)
    return np.einsum("xyzy->xz", tensor), np.einsum("xyxw->yw", tensor)


def condensate_fractions(gamma: ReducedDensity) -> Tuple[float, float]:
    """
    Largest eigenvalue of each one-species marginal.

    Args:
        gamma: Reduced density with trace 1

    Returns:
        Tuple[float, float]: Condensate fraction of species 1 and of species 2, each in [0, 1]
    """
    first, second = species_marginals(gamma)
    return float(np.linalg.eigvalsh(first)[-1]), float(np.linalg.eigvalsh(second)[-1])


@dataclass
class BoundBreakdown:
    """The nine terms p1..p9 bounding the trace distance, with their sum."""
    t: float
    terms: Tuple[float, ...]
    distance: float = float("nan")

    @property
    def total(self) -> float:
        return float(sum(self.terms))

    def as_dict(self) -> Dict[str, float]:
        out = {f"p{j + 1}": value for j, value in enumerate(self.terms)}
        out["p_sum"] = self.total
        return out


MOMENT_TOLERANCE = 1e-10


def part1_bound_terms(moments, N1: float, N2: float, distance: float = float("nan")) -> BoundBreakdown:
    """
    p1 = 2 N1^{-1/2} m10^{1/2}           p2 = 2 N2^{-1/2} m01^{1/2}
    p3 = 2 (N1N2)^{-1/2} m11^{1/2}       p4 = 2 (N1N2)^{-1/2} (m10 m01)^{1/2}
    p5 = m10/N1                          p6 = m01/N2
    p7 = 2 N1^{-1} N2^{-1/2} (m11 m10)^{1/2}
    p8 = 2 N1^{-1/2} N2^{-1} (m11 m01)^{1/2}
    p9 = m11/(N1N2)

    Moments within 1e-10 below zero count as zero.

    Args:
        moments: Any object with m10, m01, m11 (and optionally t) attributes
        N1, N2: Particle numbers
        distance: Measured trace distance, stored alongside for reporting

    Returns:
        BoundBreakdown: The nine terms in order, summed by `total`

    Raises:
        NumericalError: a moment is negative beyond roundoff.
    """
    values = []
    for name in ("m10", "m01", "m11"):
        value = float(getattr(moments, name))
        if value < -MOMENT_TOLERANCE or not math.isfinite(value):
            raise NumericalError(f"moment {name} = {value!r} is negative or not finite")
        values.append(max(value, 0.0))
    m10, m01, m11 = values
    s1, s2 = math.sqrt(N1), math.sqrt(N2)
    terms = (
        2.0 * math.sqrt(m10) / s1,
        2.0 * math.sqrt(m01) / s2,
        2.0 * math.sqrt(m11) / (s1 * s2),
        2.0 * math.sqrt(m10 * m01) / (s1 * s2),
        m10 / N1,
        m01 / N2,
        2.0 * math.sqrt(m11 * m10) / (N1 * s2),
        2.0 * math.sqrt(m11 * m01) / (s1 * N2),
        m11 / (N1 * N2),
    )
    return BoundBreakdown(float(getattr(moments, "t", 0.0)), terms, distance)
