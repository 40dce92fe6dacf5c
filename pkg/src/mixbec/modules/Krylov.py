#!/usr/bin/env python3
# Krylov.py
# Author: John Akujobi
# Date: 2026-10-19
# Version: 1.0
"""
Lanczos approximation of exp(-i dt H) v for Hermitian H given as a matvec.

The Lanczos vectors are fully reorthogonalized (subspaces stay small, at
most a few dozen vectors), and an early breakdown of the recursion means the
Krylov space is invariant, which makes the result exact.
"""

from typing import Callable, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

BREAKDOWN_TOLERANCE = 1e-13


def lanczos_iteration(apply_h: Callable[[np.ndarray], np.ndarray], vstart: np.ndarray,
                      numiter: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """
    "Matrix free" Lanczos iteration.

    Args:
        apply_h:  w = H v
        vstart:   starting vector (nonzero)
        numiter:  maximal number of Lanczos vectors

    Returns:
        alpha:    diagonal of the tridiagonal projection (length k)
        beta:     off-diagonal (length k-1)
        V:        n x k matrix of orthonormal Lanczos vectors
        residual: norm of the next residual vector (0 on breakdown)
    """
    nrmv = np.linalg.norm(vstart)
    assert nrmv > 0
    n = vstart.shape[0]
    numiter = max(1, min(numiter, n))

    V = np.zeros((numiter, n), dtype=complex)
    alpha = np.zeros(numiter)
    beta = np.zeros(numiter)
    V[0] = vstart / nrmv

    k = numiter
    residual = 0.0
    for j in range(numiter):
        w = apply_h(V[j])
        alpha[j] = np.vdot(V[j], w).real
        w = w - alpha[j] * V[j]
        if j > 0:
            w = w - beta[j - 1] * V[j - 1]
        # full reorthogonalization, twice is enough
        for _ in range(2):
            w = w - V[:j + 1].T @ (V[:j + 1].conj() @ w)
        b = np.linalg.norm(w)
        if j == numiter - 1:
            residual = b
            break
        if b < BREAKDOWN_TOLERANCE * max(1.0, abs(alpha[j])):
            k = j + 1
            residual = 0.0
            break
        beta[j] = b
        V[j + 1] = w / b

    return alpha[:k], beta[:k - 1], V[:k].T, float(residual)


def expm_krylov(apply_h: Callable[[np.ndarray], np.ndarray], v: np.ndarray, dt: float,
                numiter: int) -> Tuple[np.ndarray, float]:
    """
    Krylov approximation of exp(-i dt H) v.

    Returns:
        (w, error_estimate) with error_estimate = ‖v‖·residual·|last coefficient|,
        the usual a-posteriori bound for the Lanczos exponential.
    """
    nrmv = np.linalg.norm(v)
    if nrmv == 0:
        return np.zeros_like(v, dtype=complex), 0.0
    alpha, beta, V, residual = lanczos_iteration(apply_h, v, numiter)
    if alpha.shape[0] == 1:
        coefficients = np.array([np.exp(-1j * dt * alpha[0])])
    else:
        w_hess, u_hess = eigh_tridiagonal(alpha, beta)
        coefficients = u_hess @ (np.exp(-1j * dt * w_hess) * u_hess[0])
    error_estimate = nrmv * residual * abs(coefficients[-1])
    return nrmv * (V @ coefficients), float(error_estimate)
