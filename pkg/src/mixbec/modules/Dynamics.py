#!/usr/bin/env python3
# Dynamics.py
# Author: John Akujobi
# Date: 2026-10-19
# Version: 1.0
"""
Mean-field many-body dynamics, one fixed-number sector at a time.

The Hamiltonian H_{N1,N2} conserves both particle numbers, so it is block
diagonal over sectors (n1, n2). On a sector, in lattice mode operators,

    H = Σ T_ij b*_i b_j + (1/2N1) Σ V1(i,j) b*_i b*_j b_j b_i
      + Σ T_ij c*_i c_j + (1/2N2) Σ V2(i,j) c*_i c*_j c_j c_i
      + 1/(N1+N2) Σ V12(i,j) b*_i c*_j c_j b_i

with T the matrix of -Δ. The two-body parts are diagonal in the occupation
basis (they reproduce the first-quantized pair sums, on-site pairs included),
so only the hopping terms produce off-diagonal entries. The mean-field
denominators always use the reference numbers (N1, N2), whatever the sector.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import sparse

from .Errors import (ConfigError, DimensionError, KrylovConvergenceError, MixbecError, NumericalError,
                     SectorTooLargeError)
from .FockSpace import (SectorState, TruncatedFockState, annihilation_matrix, creation_matrix,
                        displaced_number_moments, enumerate_sector_basis, product_state, sector_dimension)
from .Krylov import expm_krylov
from .Lattice import LatticeModel
from .Logger import logger

PROPAGATION_METHODS = ("auto", "dense_eig", "krylov")
NORM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PropagatorConfig:
    """
    How exp(-iHt) is applied to a sector state.

    method: 'dense_eig', 'krylov', or 'auto' (dense up to dense_threshold).
    krylov_dim: Lanczos vectors per substep (>= 4).
    substep: initial Krylov substep; halved on failure up to retry_limit times.
    tolerance: accepted a-posteriori error per substep.
    max_sector_dim: sectors above this size are refused.
    """
    method: str = "auto"
    krylov_dim: int = 30
    substep: float = 0.05
    dense_threshold: int = 2000
    tolerance: float = 1e-12
    retry_limit: int = 8
    max_sector_dim: int = 200000

    def __post_init__(self):
        if self.method not in PROPAGATION_METHODS:
            raise ConfigError(f"method must be one of {PROPAGATION_METHODS}, got {self.method!r}",
                              key="propagator.method")
        if self.krylov_dim < 4:
            raise ConfigError(f"must be at least 4, got {self.krylov_dim}", key="propagator.krylov_dim")
        if not self.substep > 0:
            raise ConfigError(f"must be positive, got {self.substep}", key="propagator.substep")
        if self.dense_threshold <= 0:
            raise ConfigError(f"must be positive, got {self.dense_threshold}", key="propagator.dense_threshold")
        if not self.tolerance > 0:
            raise ConfigError(f"must be positive, got {self.tolerance}", key="propagator.tolerance")
        if self.retry_limit < 0:
            raise ConfigError(f"must be nonnegative, got {self.retry_limit}", key="propagator.retry_limit")

    def use_dense(self, dimension: int) -> bool:
        if self.method == "auto":
            return dimension <= self.dense_threshold
        return self.method == "dense_eig"


@dataclass
class SectorHamiltonian:
    """Sparse Hermitian block of H_{N1,N2} on sector (n1, n2)."""
    label: Tuple[int, int]
    reference: Tuple[int, int]
    matrix: sparse.csr_matrix
    model_fingerprint: str
    _eigensystem: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ vector

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def eigensystem(self) -> Tuple[np.ndarray, np.ndarray]:
        """Cached eigendecomposition, reused for every propagation time."""
        if self._eigensystem is None:
            self._eigensystem = np.linalg.eigh(self.dense())
        return self._eigensystem

    def hermiticity_residual(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0


def _species_block(laplacian: np.ndarray, potential: np.ndarray, N: int, n: int) -> sparse.csr_matrix:
    """One-species part on sector n: hopping Σ T_ij a*_i a_j plus (1/2N) pair sums."""
    M = laplacian.shape[0]
    basis = enumerate_sector_basis(M, n)
    occ = basis.occupations.astype(float)
    dim = basis.dimension
    diagonal = occ @ np.diag(laplacian)
    diagonal += (np.einsum("ki,ij,kj->k", occ, potential, occ) - occ @ np.diag(potential)) / (2.0 * N)
    block = sparse.diags(diagonal, format="csr")
    if n == 0:
        return block
    for i in range(M):
        for j in range(M):
            if i == j or laplacian[i, j] == 0:
                continue
            hop = creation_matrix(i, M, n - 1) @ annihilation_matrix(j, M, n)
            block = block + laplacian[i, j] * hop
    return block.tocsr()


def assemble_sector_hamiltonian(model: LatticeModel, N1: int, N2: int, n1: int, n2: int,
                                max_dimension: Optional[int] = None) -> SectorHamiltonian:
    """
    H_{N1,N2} restricted to sector (n1, n2), in the product occupation basis.

    Args:
        model: Lattice with its laplacian and the three sampled potentials
        N1, N2: Reference particle numbers fixing the mean-field denominators
        n1, n2: Occupation numbers of the sector
        max_dimension: Refuse sectors larger than this (None for no limit)

    Returns:
        SectorHamiltonian: Sparse CSR operator tagged with its sector and model fingerprint

    Raises:
        SectorTooLargeError: dim(n1)·dim(n2) above max_dimension.
    """
    if N1 < 1 or N2 < 1:
        raise ConfigError(f"reference particle numbers must be positive, got ({N1}, {N2})")
    M = model.total_sites
    dim1, dim2 = sector_dimension(M, n1), sector_dimension(M, n2)
    if max_dimension is not None and dim1 * dim2 > max_dimension:
        raise SectorTooLargeError(f"({n1}, {n2})", dim1 * dim2, max_dimension)

    h1 = _species_block(model.laplacian, model.v1, N1, n1)
    h2 = _species_block(model.laplacian, model.v2, N2, n2)
    occ1 = enumerate_sector_basis(M, n1).occupations.astype(float)
    occ2 = enumerate_sector_basis(M, n2).occupations.astype(float)
    cross = (occ1 @ model.v12 @ occ2.T).ravel() / (N1 + N2)

    matrix = (sparse.kron(h1, sparse.identity(dim2), format="csr")
              + sparse.kron(sparse.identity(dim1), h2, format="csr")
              + sparse.diags(cross, format="csr"))
    logger.debug(f"Assembled sector ({n1}, {n2}) for N=({N1}, {N2}): dim {dim1 * dim2}, nnz {matrix.nnz}")
    return SectorHamiltonian((n1, n2), (N1, N2), matrix.tocsr(), model.fingerprint)


def _propagate_krylov(vector: np.ndarray, H: SectorHamiltonian, t: float, config: PropagatorConfig) -> np.ndarray:
    remaining = t
    substep = config.substep
    retries = 0
    while remaining > 1e-15:
        dt = min(substep, remaining)
        candidate, error = expm_krylov(H.apply, vector, dt, config.krylov_dim)
        if error > config.tolerance:
            retries += 1
            if retries > config.retry_limit:
                raise KrylovConvergenceError(dt, error)
            substep = dt / 2.0
            logger.debug(f"Krylov substep {dt:.3g} rejected (error {error:.2e}); retrying with {substep:.3g}")
            continue
        vector = candidate
        remaining -= dt
    return vector


def propagate_sector(state: SectorState, H: SectorHamiltonian, t: float,
                     config: Optional[PropagatorConfig] = None) -> SectorState:
    """
    exp(-iHt) applied to a sector state (dense eigendecomposition or Krylov).

    Args:
        state: Sector state at time state.t
        H: Hamiltonian of the same sector
        t: Elapsed time, nonnegative
        config: Method choice and Krylov controls (defaults if None)

    Returns:
        SectorState: New state at state.t + t; the input is left untouched

    Raises:
        DimensionError: state and Hamiltonian belong to different sectors.
        KrylovConvergenceError: Krylov failed after the retry limit.
        NumericalError: the norm drifted by more than 1e-9.
    """
    config = config or PropagatorConfig()
    if state.label != H.label or state.coefficients.shape[0] != H.dimension:
        raise DimensionError(f"state in sector {state.label} (size {state.coefficients.shape[0]}) does not "
                             f"match Hamiltonian of sector {H.label} (size {H.dimension})")
    if t < 0:
        raise ConfigError(f"propagation time must be nonnegative, got {t}")
    if t == 0:
        return state.with_coefficients(state.coefficients.copy())

    psi = state.coefficients
    if config.use_dense(H.dimension):
        values, vectors = H.eigensystem
        out = vectors @ (np.exp(-1j * t * values) * (vectors.conj().T @ psi))
    else:
        out = _propagate_krylov(psi, H, t, config)

    before, after = state.norm_sq, float(np.vdot(out, out).real)
    if abs(after - before) > NORM_TOLERANCE * max(before, 1e-300):
        raise NumericalError(f"sector {state.label}: norm² changed from {before!r} to {after!r}")
    return state.with_coefficients(out, state.t + t)


def sector_energy(state: SectorState, H: SectorHamiltonian) -> float:
    """⟨ψ, Hψ⟩ / ‖ψ‖²."""
    psi = state.coefficients
    return float(np.vdot(psi, H.apply(psi)).real / state.norm_sq)


def many_body_energy_per_particle(model: LatticeModel, u: np.ndarray, v: np.ndarray, N1: int, N2: int) -> float:
    """⟨ψ, Hψ⟩/(N1+N2) for the product state u^{⊗N1} ⊗ v^{⊗N2}."""
    state = product_state(u, v, N1, N2, model.cell_volume)
    H = assemble_sector_hamiltonian(model, N1, N2, N1, N2)
    return sector_energy(state, H) / (N1 + N2)


class HamiltonianCache:
    """Sector Hamiltonians of one (model, N1, N2), assembled on first use."""

    def __init__(self, model: LatticeModel, N1: int, N2: int, max_dimension: Optional[int] = None):
        self.model = model
        self.reference = (N1, N2)
        self.max_dimension = max_dimension
        self._blocks: Dict[Tuple[int, int], SectorHamiltonian] = {}

    def get(self, n1: int, n2: int) -> SectorHamiltonian:
        key = (n1, n2)
        if key not in self._blocks:
            self._blocks[key] = assemble_sector_hamiltonian(self.model, *self.reference, n1, n2, self.max_dimension)
        return self._blocks[key]

    def __len__(self) -> int:
        return len(self._blocks)


def propagate_coherent(state: TruncatedFockState, model: LatticeModel, N1: int, N2: int, t: float,
                       config: Optional[PropagatorConfig] = None, threads: int = 1,
                       cache: Optional[HamiltonianCache] = None) -> TruncatedFockState:
    """
    Propagate every occupied sector independently under H_{N1,N2}.

    Sector masses (and so the truncation deficit) are unchanged. With
    threads > 1 sectors run on a thread pool; results are collected by
    sector label, so scheduling never changes the output.

    Args:
        state: Truncated Fock state to evolve
        model: Lattice the Hamiltonians are assembled on
        N1, N2: Reference particle numbers shared by every sector
        t: Elapsed time
        config: Propagator controls
        threads: Worker count for the sector pool
        cache: Reused sector Hamiltonians; must have been built for (N1, N2)

    Returns:
        TruncatedFockState: Same sectors and cutoffs at time state.t + t

    Raises:
        ConfigError: cache built for other reference numbers.
        NumericalError: some sector failed to propagate.
    """
    config = config or PropagatorConfig()
    if cache is None:
        cache = HamiltonianCache(model, N1, N2, config.max_sector_dim)
    elif cache.reference != (N1, N2):
        raise ConfigError(f"Hamiltonian cache built for {cache.reference}, not ({N1}, {N2})")

    labels = sorted(state.sectors)
    # assembly mutates the cache, keep it on this thread
    blocks = {label: cache.get(*label) for label in labels}

    def run(label):
        try:
            return label, propagate_sector(state.sectors[label], blocks[label], t, config)
        except MixbecError as e:
            logger.error(f"Propagation of sector {label} failed: {e}")
            raise NumericalError(f"sector {label}: {e}") from e

    if threads > 1 and len(labels) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(pool.map(run, labels))
    else:
        results = dict(run(label) for label in labels)
    return state.replace_sectors({label: results[label] for label in labels}, state.t + t)


@dataclass(frozen=True)
class FluctuationMoments:
    """Number moments of the fluctuation vector ω_t = W_t* ψ_t."""
    t: float
    m10: float
    m01: float
    m11: float

    def is_nonnegative(self, tolerance: float = 1e-10) -> bool:
        return min(self.m10, self.m01, self.m11) >= -tolerance


def fluctuation_moments(state: TruncatedFockState, u_t: np.ndarray, v_t: np.ndarray, N1: float, N2: float,
                        cell_volume: float = 1.0) -> FluctuationMoments:
    """
    ⟨ω_t, (𝒩⊗I)ω_t⟩, ⟨ω_t, (I⊗𝒩)ω_t⟩, ⟨ω_t, (𝒩⊗𝒩)ω_t⟩ with
    ω_t = W(√N1 u_t, √N2 v_t)* ψ_t, evaluated through the conjugated
    observables on ψ_t (ω_t itself is never built).

    Args:
        state: Evolved many-body state ψ_t
        u_t, v_t: Hartree orbitals at the same time, lattice-normalized
        N1, N2: Particle numbers scaling the displacement

    Returns:
        FluctuationMoments: m10, m01, m11 stamped with state.t

    Raises:
        NumericalError: u_t or v_t not normalized, or ψ_t has zero norm.
    """
    for name, orbital in (("u_t", u_t), ("v_t", v_t)):
        norm_sq = cell_volume * float(np.vdot(orbital, orbital).real)
        if abs(norm_sq - 1.0) > 1e-8:
            raise NumericalError(f"{name} is not normalized (h^d‖·‖² = {norm_sq!r})")
    m10, m01, m11 = displaced_number_moments(state, math.sqrt(N1) * np.asarray(u_t),
                                             math.sqrt(N2) * np.asarray(v_t), cell_volume)
    return FluctuationMoments(state.t, m10, m01, m11)
