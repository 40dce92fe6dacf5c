#!/usr/bin/env python3
# FockSpace.py
# Author: John Akujobi
# Date: 2026-10-19
# Version: 1.0
"""
Truncated two-species bosonic Fock space over the lattice modes.

Each species lives in the symmetric Fock space of M lattice modes. A sector
(n1, n2) is the fixed-number block spanned by products of occupation vectors
(m_1..m_M) with Σm = n1 for species 1 and Σm = n2 for species 2.

Representation used throughout:
- A sector state is a coefficient matrix Ψ of shape (dim(n1), dim(n2)),
  flattened row-major. Species-1 operators act from the left (A @ Ψ),
  species-2 operators from the right (Ψ @ B.T).
- Orbitals enter through their mode amplitudes φ = h^{d/2} f, so that
  a*(f) = h^{d/2} Σ_i f_i a*_i = Σ_i φ_i a*_i and [a(f), a*(g)] = ⟨f, g⟩
  with the lattice-weighted inner product.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from prettytable import PrettyTable
from scipy import sparse
from scipy.special import gammaln
from scipy.stats import poisson

from .Errors import DimensionError, NumericalError, SectorTooLargeError
from .Logger import logger

DEFAULT_SECTOR_LIMIT = 2_000_000


def sector_dimension(M: int, n: int) -> int:
    """C(n + M - 1, M - 1)."""
    return math.comb(n + M - 1, M - 1)


def _occupations(M: int, n: int) -> Iterator[Tuple[int, ...]]:
    # lexicographic descending: first mode takes n, n-1, ..., 0
    if M == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _occupations(M - 1, n - first):
            yield (first,) + rest


class SectorBasis:
    """
    Occupation basis of n bosons in M modes.

    Attributes:
        modes, particles: M and n.
        occupations: int array (dim, M), lexicographic descending.
        index: dict occupation tuple -> row.
    """

    def __init__(self, M: int, n: int, occupations: np.ndarray):
        self.modes = M
        self.particles = n
        self.occupations = occupations
        self.occupations.setflags(write=False)
        self.index: Dict[Tuple[int, ...], int] = {tuple(int(x) for x in occ): k for k, occ in enumerate(occupations)}

    @property
    def dimension(self) -> int:
        return self.occupations.shape[0]

    def __len__(self) -> int:
        return self.dimension

    def state_of(self, k: int) -> Tuple[int, ...]:
        return tuple(int(x) for x in self.occupations[k])

    def to_table(self) -> PrettyTable:
        """Index/occupation listing for debugging dumps."""
        table = PrettyTable(["index"] + [f"m{i}" for i in range(self.modes)])
        for k, occ in enumerate(self.occupations):
            table.add_row([k] + [int(x) for x in occ])
        table.title = f"Sector basis M={self.modes}, n={self.particles}"
        return table

    def __repr__(self) -> str:
        return f"SectorBasis(M={self.modes}, n={self.particles}, dim={self.dimension})"


@lru_cache(maxsize=None)
def _cached_basis(M: int, n: int) -> SectorBasis:
    occupations = np.array(list(_occupations(M, n)), dtype=np.int64).reshape(-1, M)
    return SectorBasis(M, n, occupations)


def enumerate_sector_basis(M: int, n: int, limit: int = DEFAULT_SECTOR_LIMIT) -> SectorBasis:
    """
    All occupation vectors of n bosons in M modes, lexicographic descending.

    Raises:
        DimensionError: M < 1 or n < 0.
        SectorTooLargeError: the basis would have more than `limit` elements.
    """
    if M < 1 or n < 0:
        raise DimensionError(f"need M >= 1 and n >= 0, got M={M}, n={n}")
    size = sector_dimension(M, n)
    if size > limit:
        raise SectorTooLargeError(f"n={n} in M={M} modes", size, limit)
    return _cached_basis(M, n)


@lru_cache(maxsize=None)
def _creation(i: int, M: int, n: int) -> sparse.csr_matrix:
    source = enumerate_sector_basis(M, n)
    target = enumerate_sector_basis(M, n + 1)
    occ = source.occupations
    raised = occ.copy()
    raised[:, i] += 1
    rows = np.array([target.index[tuple(int(x) for x in r)] for r in raised], dtype=np.int64)
    cols = np.arange(source.dimension)
    values = np.sqrt(occ[:, i] + 1.0)
    return sparse.csr_matrix((values, (rows, cols)), shape=(target.dimension, source.dimension))


def _check_mode(i: int, M: int) -> None:
    if not 0 <= i < M:
        raise DimensionError(f"mode index {i} out of range for M={M}")


def creation_matrix(i: int, M: int, n: int) -> sparse.csr_matrix:
    """a*_i from sector n to sector n+1: m -> m + e_i with amplitude √(m_i + 1)."""
    _check_mode(i, M)
    return _creation(i, M, n)


def annihilation_matrix(i: int, M: int, n: int) -> sparse.csr_matrix:
    """
    a_i from sector n to sector n-1: m -> m - e_i with amplitude √m_i.

    Raises:
        DimensionError: n = 0 (a_i Ω = 0 is left to the caller) or bad mode.
    """
    _check_mode(i, M)
    if n < 1:
        raise DimensionError("annihilation needs n >= 1; a(f) on the vacuum is handled as zero by callers")
    return _creation(i, M, n - 1).T.tocsr()


def smeared_operator(f: np.ndarray, kind: str, M: int, n: int, cell_volume: float = 1.0) -> sparse.csr_matrix:
    """
    a*(f) = h^{d/2} Σ f_i a*_i (kind 'create', linear in f) or
    a(f)  = h^{d/2} Σ conj(f_i) a_i (kind 'annihilate', antilinear), on sector n.
    """
    f = np.asarray(f)
    if f.shape != (M,):
        raise DimensionError(f"orbital length {f.shape} does not match M={M}")
    phi = np.sqrt(cell_volume) * f.astype(complex)
    if kind == "create":
        shape = (sector_dimension(M, n + 1), sector_dimension(M, n))
        terms = ((phi[i], creation_matrix(i, M, n)) for i in range(M))
    elif kind == "annihilate":
        if n < 1:
            raise DimensionError("annihilation needs n >= 1")
        shape = (sector_dimension(M, n - 1), sector_dimension(M, n))
        terms = ((np.conj(phi[i]), annihilation_matrix(i, M, n)) for i in range(M))
    else:
        raise ValueError(f"kind must be 'create' or 'annihilate', got {kind!r}")
    result = sparse.csr_matrix(shape, dtype=complex)
    for coefficient, matrix in terms:
        if coefficient != 0:
            result = result + coefficient * matrix
    return result.tocsr()


# ----------------------------------------------------------------------------
# States
# ----------------------------------------------------------------------------
@dataclass
class SectorState:
    """
    Coefficients of a state in sector (n1, n2) over the product occupation basis.

    `coefficients` has length dim(n1)·dim(n2), species-1 index major.
    """
    modes: int
    n1: int
    n2: int
    coefficients: np.ndarray
    t: float = 0.0
    normalized: bool = False

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex).ravel()
        expected = self.dims[0] * self.dims[1]
        if self.coefficients.shape != (expected,):
            raise DimensionError(f"sector ({self.n1}, {self.n2}) needs {expected} coefficients, "
                                 f"got {self.coefficients.shape}")
        if not np.all(np.isfinite(self.coefficients)):
            raise NumericalError(f"sector ({self.n1}, {self.n2}) has non-finite coefficients")
        if self.normalized and abs(self.norm_sq - 1.0) > 1e-10:
            raise NumericalError(f"sector state flagged normalized has norm² {self.norm_sq!r}")

    @property
    def label(self) -> Tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def dims(self) -> Tuple[int, int]:
        return sector_dimension(self.modes, self.n1), sector_dimension(self.modes, self.n2)

    @property
    def basis1(self) -> SectorBasis:
        return enumerate_sector_basis(self.modes, self.n1)

    @property
    def basis2(self) -> SectorBasis:
        return enumerate_sector_basis(self.modes, self.n2)

    @property
    def matrix(self) -> np.ndarray:
        """Coefficients as the (dim1, dim2) matrix Ψ (a view)."""
        return self.coefficients.reshape(self.dims)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.coefficients, self.coefficients).real)

    def with_coefficients(self, coefficients: np.ndarray, t: Optional[float] = None) -> "SectorState":
        return SectorState(self.modes, self.n1, self.n2, coefficients, self.t if t is None else t)

    def normalize(self) -> "SectorState":
        norm = math.sqrt(self.norm_sq)
        if norm == 0:
            raise NumericalError(f"cannot normalize the zero vector in sector {self.label}")
        return SectorState(self.modes, self.n1, self.n2, self.coefficients / norm, self.t, normalized=True)


@dataclass
class TruncatedFockState:
    """
    Two-species Fock state restricted to 0 <= n1 <= M1, 0 <= n2 <= M2.

    Sector weights are folded into the coefficients, so the total norm² is the
    sum of the sector norms² and `deficit` = 1 - norm² is the mass lost to the
    cutoffs.
    """
    modes: int
    cutoffs: Tuple[int, int]
    sectors: Dict[Tuple[int, int], SectorState] = field(default_factory=dict)
    t: float = 0.0
    deficit_warning: bool = False

    @property
    def norm_sq(self) -> float:
        return float(sum(s.norm_sq for s in self.sectors.values()))

    @property
    def deficit(self) -> float:
        return 1.0 - self.norm_sq

    def sector_masses(self) -> Dict[Tuple[int, int], float]:
        return {label: s.norm_sq for label, s in sorted(self.sectors.items())}

    def sector_matrix(self, n1: int, n2: int) -> Optional[np.ndarray]:
        sector = self.sectors.get((n1, n2))
        return None if sector is None else sector.matrix

    def replace_sectors(self, sectors: Dict[Tuple[int, int], SectorState], t: float) -> "TruncatedFockState":
        return TruncatedFockState(self.modes, self.cutoffs, sectors, t, self.deficit_warning)

    @classmethod
    def from_sector(cls, state: SectorState) -> "TruncatedFockState":
        return cls(state.modes, (state.n1, state.n2), {state.label: state}, state.t)


def _product_amplitudes(phi: np.ndarray, n: int) -> np.ndarray:
    """Π_i φ_i^{m_i} / √(m_i!) over the sector-n basis."""
    occ = enumerate_sector_basis(phi.shape[0], n).occupations
    powers = np.ones(occ.shape[0], dtype=complex)
    for i, amplitude in enumerate(phi):
        table = np.concatenate(([1.0 + 0j], np.cumprod(np.full(n, amplitude, dtype=complex))))
        powers *= table[occ[:, i]]
    return powers * np.exp(-0.5 * np.sum(gammaln(occ + 1.0), axis=1))


def coherent_state(f: np.ndarray, g: np.ndarray, cutoffs: Tuple[int, int], cell_volume: float = 1.0,
                   deficit_bound: Optional[float] = None) -> TruncatedFockState:
    """
    The two-species coherent state W(f, g)ω truncated to n1 <= M1, n2 <= M2.

    Sector (n1, n2) carries e^{-‖f‖²/2} f^{⊗n1}/√(n1!) ⊗ e^{-‖g‖²/2} g^{⊗n2}/√(n2!)
    written in the occupation basis: amplitude Π φ_i^{m_i}/√(m_i!). The lost
    mass equals the product-Poisson tail beyond the cutoffs.
    """
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if f.shape != g.shape or f.ndim != 1:
        raise DimensionError(f"f and g must be vectors of equal length, got {f.shape} and {g.shape}")
    m1, m2 = cutoffs
    if m1 < 0 or m2 < 0:
        raise DimensionError(f"cutoffs must be nonnegative, got {cutoffs}")
    M = f.shape[0]
    phi = np.sqrt(cell_volume) * f
    chi = np.sqrt(cell_volume) * g
    prefactor = math.exp(-0.5 * float(np.vdot(phi, phi).real) - 0.5 * float(np.vdot(chi, chi).real))

    species1 = [_product_amplitudes(phi, n) for n in range(m1 + 1)]
    species2 = [_product_amplitudes(chi, n) for n in range(m2 + 1)]
    sectors = {}
    for n1 in range(m1 + 1):
        for n2 in range(m2 + 1):
            coefficients = prefactor * np.outer(species1[n1], species2[n2]).ravel()
            sectors[(n1, n2)] = SectorState(M, n1, n2, coefficients)
    state = TruncatedFockState(M, (m1, m2), sectors)

    if deficit_bound is not None and state.deficit > deficit_bound:
        state.deficit_warning = True
        logger.warning(f"Coherent state truncation deficit {state.deficit:.3e} exceeds bound {deficit_bound:.1e} "
                       f"(cutoffs {cutoffs})")
    return state


def poisson_tail_deficit(mean1: float, mean2: float, cutoffs: Tuple[int, int]) -> float:
    """Closed form 1 - P(n1 <= M1) P(n2 <= M2) for independent Poisson numbers."""
    inside = poisson.cdf(cutoffs[0], mean1) * poisson.cdf(cutoffs[1], mean2)
    return float(1.0 - inside)


def product_state(u: np.ndarray, v: np.ndarray, n1: int, n2: int, cell_volume: float = 1.0) -> SectorState:
    """Normalized u^{⊗n1} ⊗ v^{⊗n2} (u, v lattice-normalized)."""
    phi = np.sqrt(cell_volume) * np.asarray(u, dtype=complex)
    chi = np.sqrt(cell_volume) * np.asarray(v, dtype=complex)
    a = math.exp(0.5 * math.lgamma(n1 + 1)) * _product_amplitudes(phi, n1)
    b = math.exp(0.5 * math.lgamma(n2 + 1)) * _product_amplitudes(chi, n2)
    return SectorState(phi.shape[0], n1, n2, np.outer(a, b).ravel()).normalize()


def number_expectation(state: TruncatedFockState, which: str) -> float:
    """
    ⟨𝒩⊗I⟩, ⟨I⊗𝒩⟩ or ⟨𝒩⊗𝒩⟩ ('species1', 'species2', 'product'),
    renormalized by the truncated norm.
    """
    powers = {"species1": (1, 0), "species2": (0, 1), "product": (1, 1)}
    if which not in powers:
        raise ValueError(f"which must be one of {sorted(powers)}, got {which!r}")
    p, q = powers[which]
    total = state.norm_sq
    if not total > 0:
        raise NumericalError("number expectation of a zero-norm state")
    weighted = sum(s.norm_sq * s.n1 ** p * s.n2 ** q for s in state.sectors.values())
    return float(weighted / total)


# ----------------------------------------------------------------------------
# Algebraic checks
# ----------------------------------------------------------------------------
@dataclass
class CCRResiduals:
    """Max residuals of [a(f), a*(g)] - ⟨f,g⟩ and [a(f), a(g)] over tested states."""
    mixed: float
    annihilators: float
    states_tested: int


def _apply_annihilate(f, M, n, psi, cell_volume):
    if n == 0:
        return np.zeros(0, dtype=complex)
    return smeared_operator(f, "annihilate", M, n, cell_volume) @ psi


def check_ccr(f: np.ndarray, g: np.ndarray, n_max: int, cell_volume: float = 1.0,
              states_per_sector: int = 4, rng: Optional[np.random.Generator] = None,
              states: Optional[List[Tuple[int, np.ndarray]]] = None) -> CCRResiduals:
    """
    Residuals of the canonical commutation relations on single-species sectors
    n <= n_max (the space is taken as truncated at n_max + 1, whose top sector
    is never used as a starting point).

    Args:
        states: optional explicit (n, vector) pairs; otherwise random states
            are drawn from `rng` for every sector.
    """
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    M = f.shape[0]
    overlap = cell_volume * np.vdot(f, g)
    if states is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        states = []
        for n in range(n_max + 1):
            dim = sector_dimension(M, n)
            for _ in range(states_per_sector):
                psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
                states.append((n, psi / np.linalg.norm(psi)))

    mixed = 0.0
    annihilators = 0.0
    for n, psi in states:
        if n > n_max:
            raise DimensionError(f"state in sector {n} above n_max={n_max}")
        create_g = smeared_operator(g, "create", M, n, cell_volume)
        a_f_create = smeared_operator(f, "annihilate", M, n + 1, cell_volume) @ (create_g @ psi)
        if n >= 1:
            create_back = smeared_operator(g, "create", M, n - 1, cell_volume)
            a_star_a = create_back @ _apply_annihilate(f, M, n, psi, cell_volume)
        else:
            a_star_a = np.zeros_like(psi)
        mixed = max(mixed, float(np.linalg.norm(a_f_create - a_star_a - overlap * psi)))

        if n >= 2:
            fg = _apply_annihilate(f, M, n - 1, _apply_annihilate(g, M, n, psi, cell_volume), cell_volume)
            gf = _apply_annihilate(g, M, n - 1, _apply_annihilate(f, M, n, psi, cell_volume), cell_volume)
            annihilators = max(annihilators, float(np.linalg.norm(fg - gf)))
    return CCRResiduals(mixed, annihilators, len(states))


def _species_op(f, kind, state: SectorState, species: int, cell_volume: float) -> np.ndarray:
    """Apply b(f)/b*(f) (species 1) or c(f)/c*(f) (species 2) to a sector state; returns the new matrix."""
    psi = state.matrix
    M = state.modes
    if species == 1:
        if kind == "annihilate" and state.n1 == 0:
            return np.zeros((0, psi.shape[1]), dtype=complex)
        return smeared_operator(f, kind, M, state.n1, cell_volume) @ psi
    if kind == "annihilate" and state.n2 == 0:
        return np.zeros((psi.shape[0], 0), dtype=complex)
    return (smeared_operator(f, kind, M, state.n2, cell_volume) @ psi.T).T


def check_number_bounds(f: np.ndarray, g: np.ndarray, state: TruncatedFockState,
                        cell_volume: float = 1.0) -> Dict[str, float]:
    """
    Slack (rhs - lhs) of the four ladder-operator bounds

        ‖b*(f)ψ‖ <= ‖f‖ ‖((𝒩+1)^{1/2}⊗I)ψ‖    ‖c*(g)ψ‖ <= ‖g‖ ‖(I⊗(𝒩+1)^{1/2})ψ‖
        ‖b(f)ψ‖  <= ‖f‖ ‖(𝒩^{1/2}⊗I)ψ‖        ‖c(g)ψ‖  <= ‖g‖ ‖(I⊗𝒩^{1/2})ψ‖

    evaluated exactly (creation out of the top sector is kept, not truncated).
    """
    norm_f = math.sqrt(cell_volume) * float(np.linalg.norm(f))
    norm_g = math.sqrt(cell_volume) * float(np.linalg.norm(g))
    sums = {key: 0.0 for key in ("b_star", "c_star", "b", "c")}
    rhs = {key: 0.0 for key in sums}
    # sectors map injectively under each operator, so norms add sector by sector
    for sector in state.sectors.values():
        weight = sector.norm_sq
        sums["b_star"] += np.linalg.norm(_species_op(f, "create", sector, 1, cell_volume)) ** 2
        sums["c_star"] += np.linalg.norm(_species_op(g, "create", sector, 2, cell_volume)) ** 2
        sums["b"] += np.linalg.norm(_species_op(f, "annihilate", sector, 1, cell_volume)) ** 2
        sums["c"] += np.linalg.norm(_species_op(g, "annihilate", sector, 2, cell_volume)) ** 2
        rhs["b_star"] += (sector.n1 + 1) * weight
        rhs["c_star"] += (sector.n2 + 1) * weight
        rhs["b"] += sector.n1 * weight
        rhs["c"] += sector.n2 * weight
    norms = {"b_star": norm_f, "b": norm_f, "c_star": norm_g, "c": norm_g}
    return {key: norms[key] * math.sqrt(rhs[key]) - math.sqrt(sums[key]) for key in sums}


def species_commutator_residual(f: np.ndarray, g: np.ndarray, state: SectorState,
                                cell_volume: float = 1.0) -> float:
    """
    max over the four pairings of ‖[X1, Y2]ψ‖ with X1 ∈ {b(f), b*(f)} and
    Y2 ∈ {c(g), c*(g)}: operators on different species commute.
    """
    worst = 0.0
    M = state.modes
    psi = state.matrix
    for kind1 in ("create", "annihilate"):
        if kind1 == "annihilate" and state.n1 == 0:
            continue
        for kind2 in ("create", "annihilate"):
            if kind2 == "annihilate" and state.n2 == 0:
                continue
            x = smeared_operator(f, kind1, M, state.n1, cell_volume)
            y = smeared_operator(g, kind2, M, state.n2, cell_volume)
            first = x @ (y @ psi.T).T        # X1 Y2 ψ
            second = (y @ (x @ psi).T).T     # Y2 X1 ψ
            worst = max(worst, float(np.linalg.norm(first - second)))
    return worst


def displaced_number_moments(state: TruncatedFockState, f_shift: np.ndarray, g_shift: np.ndarray,
                             cell_volume: float = 1.0) -> Tuple[float, float, float]:
    """
    Number moments of ω = W(f', g')* ψ computed on ψ directly:

        W(𝒩⊗I)W* = 𝒩⊗I - b*(f') - b(f') + ‖f'‖²   (species 2 alike)

    Returns (⟨𝒩⊗I⟩_ω, ⟨I⊗𝒩⟩_ω, ⟨𝒩⊗𝒩⟩_ω), renormalized by the truncated norm.
    Components the creation terms push past the cutoffs cannot pair with
    anything inside them, so the box-restricted inner products are exact.
    """
    total = state.norm_sq
    if not total > 0:
        raise NumericalError("displaced moments of a zero-norm state")
    M = state.modes
    norm_f = cell_volume * float(np.vdot(f_shift, f_shift).real)
    norm_g = cell_volume * float(np.vdot(g_shift, g_shift).real)
    a1: Dict[Tuple[int, int], np.ndarray] = {}
    a2: Dict[Tuple[int, int], np.ndarray] = {}
    for (n1, n2), sector in state.sectors.items():
        psi = sector.matrix
        out1 = (n1 + norm_f) * psi
        lower = state.sector_matrix(n1 - 1, n2)
        if lower is not None:
            out1 = out1 - smeared_operator(f_shift, "create", M, n1 - 1, cell_volume) @ lower
        upper = state.sector_matrix(n1 + 1, n2)
        if upper is not None:
            out1 = out1 - smeared_operator(f_shift, "annihilate", M, n1 + 1, cell_volume) @ upper
        a1[(n1, n2)] = out1

        out2 = (n2 + norm_g) * psi
        lower = state.sector_matrix(n1, n2 - 1)
        if lower is not None:
            out2 = out2 - (smeared_operator(g_shift, "create", M, n2 - 1, cell_volume) @ lower.T).T
        upper = state.sector_matrix(n1, n2 + 1)
        if upper is not None:
            out2 = out2 - (smeared_operator(g_shift, "annihilate", M, n2 + 1, cell_volume) @ upper.T).T
        a2[(n1, n2)] = out2

    m10 = sum(np.vdot(s.matrix, a1[k]) for k, s in state.sectors.items()).real / total
    m01 = sum(np.vdot(s.matrix, a2[k]) for k, s in state.sectors.items()).real / total
    m11 = sum(np.vdot(a1[k], a2[k]) for k in state.sectors).real / total
    return float(m10), float(m01), float(m11)


def weyl_displacement_check(f: np.ndarray, f_shift: np.ndarray, g: np.ndarray, g_shift: np.ndarray,
                            cutoffs: Tuple[int, int], cell_volume: float = 1.0) -> Tuple[float, float]:
    """
    W(f', g')* W(f, g) ω is, up to phase, the coherent state of (f - f', g - g'),
    so its species number expectations must be ‖f - f'‖² and ‖g - g'‖².
    Returns the absolute deviations (bounded by the truncation tail).
    """
    state = coherent_state(f, g, cutoffs, cell_volume)
    m10, m01, _ = displaced_number_moments(state, f_shift, g_shift, cell_volume)
    expected1 = cell_volume * float(np.linalg.norm(np.asarray(f) - np.asarray(f_shift)) ** 2)
    expected2 = cell_volume * float(np.linalg.norm(np.asarray(g) - np.asarray(g_shift)) ** 2)
    return abs(m10 - expected1), abs(m01 - expected2)
