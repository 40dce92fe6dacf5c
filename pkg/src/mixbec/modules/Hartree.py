#!/usr/bin/env python3
# Hartree.py
# Author: John Akujobi
# Date: 2026-10-19
# Version: 1.0
"""
Coupled Hartree system on the lattice.

    i ∂t u = -Δu + (V1 ⋆ |u|²) u + c2 (V12 ⋆ |v|²) u
    i ∂t v = -Δv + (V2 ⋆ |v|²) v + c1 (V12 ⋆ |u|²) v

Integrated with Strang splitting: half a step of the (frozen) Hartree
potential phase, an exact kinetic step through the eigenbasis of -Δ, and a
second potential half-step recomputed from the new densities. Every stage is a
unitary multiplication, so masses are conserved up to roundoff; they are
monitored, never renormalized.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .Errors import DimensionError, NonFiniteStateError, ConfigError
from .Lattice import LatticeModel
from .Logger import logger


@dataclass(frozen=True)
class HartreeState:
    """Orbital pair (u, v) at time t; lattice-weighted norms are 1."""
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def conjugate(self) -> "HartreeState":
        return HartreeState(np.conj(self.u), np.conj(self.v), self.t)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)))


@dataclass
class HartreeTrajectory:
    """Samples (t_k, state_k) with mass and energy diagnostics."""
    states: List[HartreeState] = field(default_factory=list)
    mass1: List[float] = field(default_factory=list)
    mass2: List[float] = field(default_factory=list)
    energies: List[float] = field(default_factory=list)

    CSV_HEADER = ("t", "mass1", "mass2", "energy")

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def final(self) -> HartreeState:
        return self.states[-1]

    def record(self, state: HartreeState, model: LatticeModel, couplings) -> None:
        m1, m2 = mass(state, model)
        self.states.append(state)
        self.mass1.append(m1)
        self.mass2.append(m2)
        self.energies.append(energy(state, model, couplings))

    def rows(self) -> List[Tuple[float, float, float, float]]:
        return [(s.t, m1, m2, e) for s, m1, m2, e in zip(self.states, self.mass1, self.mass2, self.energies)]

    def max_mass_drift(self) -> float:
        m = np.array([self.mass1, self.mass2])
        return float(np.max(np.abs(m - m[:, :1])))

    def max_energy_drift(self) -> float:
        e = np.array(self.energies)
        return float(np.max(np.abs(e - e[0])))


def _check_state(state: HartreeState, model: LatticeModel) -> None:
    shape = (model.total_sites,)
    if np.shape(state.u) != shape or np.shape(state.v) != shape:
        raise DimensionError(f"orbitals must have length {model.total_sites}, "
                             f"got {np.shape(state.u)} and {np.shape(state.v)}")


def hartree_potentials(state: HartreeState, model: LatticeModel, couplings) -> Tuple[np.ndarray, np.ndarray]:
    """Mean-field potentials W1, W2 felt by u and v."""
    rho_u = np.abs(state.u) ** 2
    rho_v = np.abs(state.v) ** 2
    w1 = model.convolve(model.v1, rho_u) + couplings.c2 * model.convolve(model.v12, rho_v)
    w2 = model.convolve(model.v2, rho_v) + couplings.c1 * model.convolve(model.v12, rho_u)
    return w1, w2


def hartree_rhs(state: HartreeState, model: LatticeModel, couplings) -> Tuple[np.ndarray, np.ndarray]:
    """(du/dt, dv/dt) of the coupled Hartree system."""
    _check_state(state, model)
    w1, w2 = hartree_potentials(state, model, couplings)
    du = -1j * (model.laplacian @ state.u + w1 * state.u)
    dv = -1j * (model.laplacian @ state.v + w2 * state.v)
    return du, dv


def _kinetic_step(model: LatticeModel, dt: float, psi: np.ndarray) -> np.ndarray:
    values, vectors = model.kinetic_eigensystem
    return vectors @ (np.exp(-1j * dt * values) * (vectors.T @ psi))


def _potential_half_step(state: HartreeState, model: LatticeModel, couplings, dt: float) -> HartreeState:
    w1, w2 = hartree_potentials(state, model, couplings)
    return HartreeState(np.exp(-0.5j * dt * w1) * state.u, np.exp(-0.5j * dt * w2) * state.v, state.t)


def step_strang(state: HartreeState, model: LatticeModel, couplings, dt: float) -> HartreeState:
    """One Strang step of size dt (potential/2, kinetic, potential/2)."""
    if not dt > 0:
        raise ConfigError(f"time step must be positive, got {dt}", key="time.dt")
    _check_state(state, model)
    half = _potential_half_step(state, model, couplings, dt)
    kinetic = HartreeState(_kinetic_step(model, dt, half.u), _kinetic_step(model, dt, half.v), state.t)
    out = _potential_half_step(kinetic, model, couplings, dt)
    return HartreeState(out.u, out.v, state.t + dt)


def free_propagator(model: LatticeModel, t: float) -> np.ndarray:
    """exp(iΔt) as a dense matrix."""
    values, vectors = model.kinetic_eigensystem
    return (vectors * np.exp(-1j * t * values)) @ vectors.T


def evolve(initial: HartreeState, model: LatticeModel, couplings, t_final: float, dt: float,
           stride: int = 1) -> HartreeTrajectory:
    """
    Repeated Strang steps from `initial` up to t_final (to within dt).

    Diagnostics are recorded every `stride` steps and at the last step.

    Raises:
        NonFiniteStateError: a step produced NaN/Inf (carries the step index).
    """
    if stride < 1:
        raise ConfigError(f"stride must be at least 1, got {stride}", key="time.stride")
    n_steps = int(round(t_final / dt)) if t_final > 0 else 0
    trajectory = HartreeTrajectory()
    trajectory.record(initial, model, couplings)
    state = initial
    for k in range(1, n_steps + 1):
        state = step_strang(state, model, couplings, dt)
        if not state.is_finite():
            logger.error(f"Hartree evolution produced non-finite values at step {k}")
            raise NonFiniteStateError(k, state.t)
        if k % stride == 0 or k == n_steps:
            trajectory.record(state, model, couplings)
    logger.debug(f"Hartree evolution: {n_steps} steps to t={state.t:.6g}, "
                 f"mass drift {trajectory.max_mass_drift():.2e}, energy drift {trajectory.max_energy_drift():.2e}")
    return trajectory


def hartree_orbit(initial: HartreeState, model: LatticeModel, couplings, times: Sequence[float],
                  dt: float) -> List[HartreeState]:
    """
    States at each requested time (ascending). Between targets the step is
    shrunk slightly so every target is reached exactly.
    """
    states: List[HartreeState] = []
    state = initial
    step_count = 0
    for target in sorted(times):
        span = target - state.t
        if span < -1e-12:
            raise ConfigError("sample times must not precede the initial time", key="time.sample_times")
        n = int(np.ceil(span / dt - 1e-9)) if span > 1e-15 else 0
        for _ in range(n):
            state = step_strang(state, model, couplings, span / n)
            step_count += 1
            if not state.is_finite():
                raise NonFiniteStateError(step_count, state.t)
        state = HartreeState(state.u, state.v, float(target))
        states.append(state)
    return states


def energy(state: HartreeState, model: LatticeModel, couplings) -> float:
    """
    Hartree energy per particle

        E = c1⟨u,-Δu⟩ + c2⟨v,-Δv⟩ + (c1/2)∬V1|u|²|u|² + (c2/2)∬V2|v|²|v|²
            + c1 c2 ∬V12|u|²|v|²

    with lattice weights h^d per integration variable.
    """
    _check_state(state, model)
    c1, c2 = couplings.c1, couplings.c2
    rho_u = np.abs(state.u) ** 2
    rho_v = np.abs(state.v) ** 2
    kin_u = model.weighted_inner(state.u, model.laplacian @ state.u).real
    kin_v = model.weighted_inner(state.v, model.laplacian @ state.v).real
    w = model.cell_volume
    pot_11 = w * w * rho_u @ model.v1 @ rho_u
    pot_22 = w * w * rho_v @ model.v2 @ rho_v
    pot_12 = w * w * rho_u @ model.v12 @ rho_v
    return float(c1 * kin_u + c2 * kin_v + 0.5 * c1 * pot_11 + 0.5 * c2 * pot_22 + c1 * c2 * pot_12)


def mass(state: HartreeState, model: Optional[LatticeModel] = None) -> Tuple[float, float]:
    """(h^d‖u‖², h^d‖v‖²); without a model h^d is taken as 1."""
    w = 1.0 if model is None else model.cell_volume
    return float(w * np.vdot(state.u, state.u).real), float(w * np.vdot(state.v, state.v).real)


def write_trajectory(trajectory: HartreeTrajectory, csv_path: str, file_handler,
                     snapshot_path: Optional[str] = None) -> None:
    """CSV of (t, mass1, mass2, energy); optionally the full fields as binary records."""
    file_handler.write_csv(csv_path, HartreeTrajectory.CSV_HEADER, trajectory.rows())
    if snapshot_path is not None:
        fields = np.array([[s.u, s.v] for s in trajectory.states])
        file_handler.write_snapshot(snapshot_path, fields, {
            "layout": "sample species site",
            "times": " ".join(repr(float(t)) for t in trajectory.times),
        })
