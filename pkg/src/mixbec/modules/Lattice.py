#!/usr/bin/env python3
# Lattice.py
# Author: John Akujobi
# Date: 2026-10-19
# Version: 1.0
"""
Discretized one-body space shared by every other module.

A `LatticeModel` is a periodic hypercubic lattice with L sites per axis and
spacing h in d = 1, 2 or 3 dimensions. It carries the kinetic operator -Δ
(nearest-neighbour stencil) and the three sampled pair potentials V1, V2, V12.

Conventions:
- Site index = row-major flattening of the d-dimensional site multi-index.
- Orbitals are lattice functions u with weighted norm h^d Σ|u_i|² = 1.
  Their *mode amplitudes* h^{d/2} u have Euclidean norm 1; the Fock-space
  modules work exclusively with mode amplitudes (see `to_modes`).
"""

import hashlib
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .Errors import ConfigError, DimensionError


class PotentialKind(Enum):
    """Shapes of pair potentials that can be sampled on the lattice."""
    ZERO = "zero"
    GAUSSIAN = "gaussian"
    SOFT_COULOMB = "soft_coulomb"
    YUKAWA = "yukawa"
    CONTACT = "contact"


# Kinds whose range/softening parameter must be positive.
_NEEDS_RANGE = {PotentialKind.GAUSSIAN, PotentialKind.SOFT_COULOMB, PotentialKind.YUKAWA}


@dataclass(frozen=True)
class PotentialSpec:
    """
    A pair potential V(r).

    Args:
        kind: shape of the potential.
        strength: signed prefactor g (attractive and repulsive both allowed).
        range: σ for gaussian/yukawa, softening a for soft_coulomb.
    """
    kind: PotentialKind
    strength: float = 0.0
    range: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.kind, PotentialKind):
            try:
                object.__setattr__(self, "kind", PotentialKind(self.kind))
            except ValueError:
                raise ConfigError(f"unknown potential kind '{self.kind}'", key="kind") from None
        if self.kind in _NEEDS_RANGE:
            if self.range is None or not self.range > 0:
                raise ConfigError(f"{self.kind.value} potential needs a positive range, got {self.range}",
                                  key="range")
        if self.kind is not PotentialKind.ZERO and not math.isfinite(self.strength):
            raise ConfigError(f"strength must be finite, got {self.strength}", key="strength")

    @classmethod
    def zero(cls) -> "PotentialSpec":
        return cls(PotentialKind.ZERO)

    @classmethod
    def from_dict(cls, data: Dict) -> "PotentialSpec":
        return cls(kind=data.get("kind", "zero"),
                   strength=float(data.get("strength", 0.0)),
                   range=None if data.get("range") is None else float(data["range"]))

    def to_dict(self) -> Dict:
        return {"kind": self.kind.value, "strength": self.strength, "range": self.range}


def build_laplacian(d: int, L: int, h: float) -> np.ndarray:
    """
    Nearest-neighbour periodic stencil for -Δ on L^d sites.

    In 1D, (-Δψ)_j = (2ψ_j - ψ_{j-1} - ψ_{j+1}) / h² with indices mod L; higher
    dimensions use the Kronecker sum of the 1D stencil. For L = 2 both
    neighbours are the same site, so the off-diagonal entry is -2/h² and rows
    still sum to zero.

    Raises:
        ConfigError: d not in {1, 2, 3}, L < 2 or h <= 0.
    """
    if d not in (1, 2, 3):
        raise ConfigError(f"dimension must be 1, 2 or 3, got {d}", key="lattice.dimension")
    if L < 2:
        raise ConfigError(f"stencil needs at least 2 sites per axis, got {L}", key="lattice.sites_per_axis")
    if not h > 0:
        raise ConfigError(f"spacing must be positive, got {h}", key="lattice.spacing")

    stencil = np.zeros((L, L))
    for j in range(L):
        stencil[j, j] += 2.0
        stencil[j, (j - 1) % L] -= 1.0
        stencil[j, (j + 1) % L] -= 1.0
    stencil /= h * h

    identity = np.eye(L)
    lap = np.zeros((L ** d, L ** d))
    for axis in range(d):
        factors = [identity] * d
        factors[axis] = stencil
        term = factors[0]
        for factor in factors[1:]:
            term = np.kron(term, factor)
        lap += term
    return lap


def site_coordinates(d: int, L: int) -> np.ndarray:
    """Integer multi-indices of all sites, shape (L^d, d), in flattening order."""
    return np.array(np.unravel_index(np.arange(L ** d), (L,) * d)).T


def minimal_image_distances(d: int, L: int, h: float) -> np.ndarray:
    """Matrix of periodic minimal-image distances r_ij."""
    coords = site_coordinates(d, L)
    delta = np.abs(coords[:, None, :] - coords[None, :, :])
    delta = np.minimum(delta, L - delta) * h
    return np.sqrt(np.sum(delta ** 2, axis=-1))


def evaluate_potential(spec: PotentialSpec, r: np.ndarray, h: float, d: int) -> np.ndarray:
    """Evaluate V(r) for an array of distances."""
    g = spec.strength
    if spec.kind is PotentialKind.ZERO:
        return np.zeros_like(r, dtype=float)
    if spec.kind is PotentialKind.GAUSSIAN:
        return g * np.exp(-(r / spec.range) ** 2)
    if spec.kind is PotentialKind.SOFT_COULOMB:
        return g / np.sqrt(r ** 2 + spec.range ** 2)
    if spec.kind is PotentialKind.YUKAWA:
        # on-site value is the value at r = h/2
        r_eff = np.maximum(r, h / 2.0)
        return g * np.exp(-r_eff / spec.range) / r_eff
    if spec.kind is PotentialKind.CONTACT:
        return np.where(r == 0.0, g / h ** d, 0.0)
    raise ConfigError(f"unknown potential kind '{spec.kind}'")


def sample_potential(spec: PotentialSpec, d: int, L: int, h: float) -> np.ndarray:
    """
    Sample V(x_i - x_j) on the lattice with minimal-image periodic distance.

    Returns:
        Real symmetric (L^d x L^d) matrix; entry (i, j) depends only on i - j.
    """
    r = minimal_image_distances(d, L, h)
    values = evaluate_potential(spec, r, h, d)
    # exact symmetry regardless of floating point in the distance computation
    return 0.5 * (values + values.T)


class LatticeModel:
    """
    Periodic lattice with kinetic operator and sampled pair potentials.

    Attributes:
        dimension, sites_per_axis, spacing: geometry (d, L, h).
        laplacian: the matrix of -Δ (real symmetric, positive semidefinite).
        v1, v2, v12: sampled intra-species and inter-species potentials.
        potential_specs: the PotentialSpec each matrix was sampled from.
    """

    periodic = True

    def __init__(self, dimension: int, sites_per_axis: int, spacing: float,
                 v1: PotentialSpec, v2: PotentialSpec, v12: PotentialSpec):
        self.dimension = int(dimension)
        self.sites_per_axis = int(sites_per_axis)
        self.spacing = float(spacing)
        self.potential_specs = {"V1": v1, "V2": v2, "V12": v12}

        if self.sites_per_axis == 1:
            self.laplacian = self._single_site_laplacian()
        else:
            self.laplacian = build_laplacian(self.dimension, self.sites_per_axis, self.spacing)

        args = (self.dimension, self.sites_per_axis, self.spacing)
        self.v1 = sample_potential(v1, *args)
        self.v2 = sample_potential(v2, *args)
        self.v12 = sample_potential(v12, *args)
        for name, matrix in (("V1", self.v1), ("V2", self.v2), ("V12", self.v12)):
            if not np.all(np.isfinite(matrix)):
                raise ConfigError("sampled potential has non-finite entries", key=f"potentials.{name}")

        for array in (self.laplacian, self.v1, self.v2, self.v12):
            array.setflags(write=False)

        self._kinetic_eigensystem: Optional[Tuple[np.ndarray, np.ndarray]] = None
        self._fingerprint: Optional[str] = None

    def _single_site_laplacian(self) -> np.ndarray:
        if self.dimension not in (1, 2, 3):
            raise ConfigError(f"dimension must be 1, 2 or 3, got {self.dimension}", key="lattice.dimension")
        if not self.spacing > 0:
            raise ConfigError(f"spacing must be positive, got {self.spacing}", key="lattice.spacing")
        # the periodic stencil on one site is 2ψ - ψ - ψ = 0
        return np.zeros((1, 1))

    @classmethod
    def single_mode(cls, v1: PotentialSpec, v2: PotentialSpec, v12: PotentialSpec,
                    spacing: float = 1.0, dimension: int = 1) -> "LatticeModel":
        """One-site model: a single mode per species, no kinetic energy."""
        return cls(dimension, 1, spacing, v1, v2, v12)

    @property
    def total_sites(self) -> int:
        return self.sites_per_axis ** self.dimension

    @property
    def cell_volume(self) -> float:
        """h^d, the lattice integration weight."""
        return self.spacing ** self.dimension

    @property
    def kinetic_eigensystem(self) -> Tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and orthonormal eigenvectors of -Δ (computed once)."""
        if self._kinetic_eigensystem is None:
            values, vectors = np.linalg.eigh(self.laplacian)
            self._kinetic_eigensystem = (values, vectors)
        return self._kinetic_eigensystem

    @property
    def fingerprint(self) -> str:
        """Short hash of the operators, used to tag assembled Hamiltonians."""
        if self._fingerprint is None:
            digest = hashlib.sha256()
            for array in (self.laplacian, self.v1, self.v2, self.v12):
                digest.update(np.ascontiguousarray(array, dtype="<f8").tobytes())
            self._fingerprint = digest.hexdigest()[:16]
        return self._fingerprint

    def weighted_norm_sq(self, u: np.ndarray) -> float:
        return float(self.cell_volume * np.vdot(u, u).real)

    def weighted_inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """⟨f, g⟩ = h^d Σ conj(f_i) g_i."""
        return complex(self.cell_volume * np.vdot(f, g))

    def convolve(self, potential: np.ndarray, density: np.ndarray) -> np.ndarray:
        """(V ⋆ ρ)_i = h^d Σ_j V(i, j) ρ_j."""
        return self.cell_volume * (potential @ density)

    def to_modes(self, u: np.ndarray) -> np.ndarray:
        """Mode amplitudes h^{d/2} u of a lattice orbital."""
        self.check_vector(u)
        return np.sqrt(self.cell_volume) * np.asarray(u, dtype=complex)

    def from_modes(self, phi: np.ndarray) -> np.ndarray:
        return np.asarray(phi, dtype=complex) / np.sqrt(self.cell_volume)

    def check_vector(self, u: np.ndarray) -> None:
        if np.shape(u) != (self.total_sites,):
            raise DimensionError(f"expected a vector of length {self.total_sites}, got shape {np.shape(u)}")

    def plane_wave_energies(self) -> np.ndarray:
        """ε_k of the 1D plane waves (2 - 2cos(2πk/L))/h², k = 0..L-1."""
        k = np.arange(self.sites_per_axis)
        return (2.0 - 2.0 * np.cos(2.0 * np.pi * k / self.sites_per_axis)) / self.spacing ** 2

    def __repr__(self) -> str:
        kinds = ", ".join(f"{k}={s.kind.value}" for k, s in self.potential_specs.items())
        return (f"LatticeModel(d={self.dimension}, L={self.sites_per_axis}, h={self.spacing}, "
                f"M={self.total_sites}, {kinds})")


def make_orbital(lattice: LatticeModel, kind: str = "gaussian", mode: Sequence[int] = (0,),
                 center: Optional[Sequence[float]] = None, width: float = 1.0,
                 amplitude: float = 0.3, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    Build a normalized lattice orbital (h^d Σ|u|² = 1).

    kinds:
        plane_wave - exp(2πi k·x / L) for the integer wave vector `mode`.
        gaussian   - periodic gaussian of `width` (sites) around `center`, with
                     the phase of `mode` imprinted.
        cosine     - 1 + amplitude·cos(2π k·x / L), a gentle density modulation.
        random     - complex gaussian entries drawn from `rng` (seeded by the caller).
    """
    d, L = lattice.dimension, lattice.sites_per_axis
    coords = site_coordinates(d, L).astype(float)
    k = np.zeros(d)
    k[:min(d, len(mode))] = list(mode)[:d]
    phase = np.exp(2j * np.pi * (coords @ k) / L)

    if kind == "plane_wave":
        u = phase
    elif kind == "gaussian":
        if center is None:
            c = np.full(d, (L - 1) / 2.0)
        else:
            c = np.asarray(center, dtype=float).ravel()
            if c.shape != (d,):
                raise ConfigError(f"center needs {d} coordinates, got {list(c)}", key="orbitals.center")
        delta = np.abs(coords - c)
        delta = np.minimum(delta, L - delta)
        u = np.exp(-np.sum(delta ** 2, axis=1) / (2.0 * width ** 2)) * phase
    elif kind == "cosine":
        u = 1.0 + amplitude * np.cos(2.0 * np.pi * (coords @ k) / L) + 0j
    elif kind == "random":
        rng = rng if rng is not None else np.random.default_rng(0)
        u = rng.standard_normal(coords.shape[0]) + 1j * rng.standard_normal(coords.shape[0])
    else:
        raise ConfigError(f"unknown orbital kind '{kind}'", key="orbitals.kind")

    norm_sq = lattice.weighted_norm_sq(u)
    if not norm_sq > 0:
        raise ConfigError("orbital vanishes identically", key="orbitals")
    return u / np.sqrt(norm_sq)
