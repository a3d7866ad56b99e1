"""Vacuum-noise completion of a candidate coherent controller.

Given ``F, G1, G2`` the drift realisability identity generally fails.  Extra
noise channels ``v`` with coupling ``L_v = Lambda_v x^`` are added; ``Lambda_v``
is any factor of a Hermitian PSD matrix and ``G3`` follows from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qsde import DimensionError
from .quadrature import GammaMap, make_gamma, theta


class CompletionError(RuntimeError):
    pass


@dataclass(frozen=True)
class NoiseCompletion:
    lambda_v: np.ndarray
    xi_v: np.ndarray
    G3: np.ndarray
    psd_shift: float

    @property
    def n_v(self) -> int:
        return self.G3.shape[1]

    @property
    def rhs(self) -> np.ndarray:
        return self.lambda_v.conj().T @ self.lambda_v


def completion_rhs(F, G1, G2, theta_x=None, theta_w=None, theta_z=None, xi_v=None):
    F, G1, G2 = (np.asarray(m, dtype=float) for m in (F, G1, G2))
    n = F.shape[0]
    if F.shape != (n, n) or G1.shape[0] != n or G2.shape[0] != n:
        raise DimensionError(f"inconsistent shapes F{F.shape} G1{G1.shape} G2{G2.shape}")
    Tx = theta(n) if theta_x is None else np.asarray(theta_x)
    Tw = theta(G1.shape[1]) if theta_w is None else np.asarray(theta_w)
    Tz = theta(G2.shape[1]) if theta_z is None else np.asarray(theta_z)
    if xi_v is None:
        xi_v = np.zeros((n, n))
    xi_v = np.asarray(xi_v, dtype=float)
    if xi_v.shape != (n, n):
        raise DimensionError(f"xi_v must be {n}x{n}, got {xi_v.shape}")
    if not np.array_equal(xi_v, xi_v.T):
        raise ValueError("xi_v must be exactly symmetric")
    h0 = (-0.25j * (Tx @ F + F.T @ Tx)
          + 0.25j * Tx @ G1 @ Tw @ G1.T @ Tx
          + 0.25j * Tx @ G2 @ Tz @ G2.T @ Tx)
    rhs = h0 + xi_v
    return 0.5 * (rhs + rhs.conj().T)


def choose_xi(h0) -> tuple[np.ndarray, float]:
    """Smallest scalar shift ``c I`` making ``h0 + c I`` positive semidefinite."""
    h0 = np.asarray(h0)
    n = h0.shape[0]
    if n == 0:
        return np.zeros((0, 0)), 0.0
    lam_min = float(np.linalg.eigvalsh(0.5 * (h0 + h0.conj().T))[0])
    shift = max(0.0, -lam_min)
    return shift * np.eye(n), shift


def default_rank_tol(rhs) -> float:
    if rhs.size == 0:
        return 0.0
    return 1e-12 * max(1.0, float(np.abs(np.linalg.eigvalsh(rhs)).max()))


def factor_lambda(rhs, rank_tol=None) -> np.ndarray:
    """Factor ``rhs = Lambda^dagger Lambda`` with one row per retained eigenvalue.

    Rows follow descending eigenvalue order; each eigenvector is rotated so its
    first non-negligible component is real and positive.
    """
    rhs = np.asarray(rhs, dtype=complex)
    n = rhs.shape[0]
    rhs = 0.5 * (rhs + rhs.conj().T)
    if rank_tol is None:
        rank_tol = default_rank_tol(rhs)
    lam, vecs = np.linalg.eigh(rhs)
    if n and lam[0] < -rank_tol:
        raise CompletionError(
            f"completion matrix is not PSD (min eigenvalue {lam[0]:.3e} < -{rank_tol:.1e})")
    order = np.argsort(-lam, kind="stable")
    keep = [k for k in order if lam[k] > rank_tol]
    rows = []
    for k in keep:
        v = vecs[:, k]
        j = int(np.argmax(np.abs(v) > 1e-12 * np.abs(v).max()))
        v = v * (np.conj(v[j]) / abs(v[j]))
        rows.append(np.sqrt(lam[k]) * v.conj())
    if not rows:
        return np.zeros((0, n), dtype=complex)
    return np.array(rows)


def compute_g3(lambda_v, theta_x=None, gamma: GammaMap | None = None, imag_tol=1e-12) -> np.ndarray:
    lambda_v = np.atleast_2d(np.asarray(lambda_v, dtype=complex))
    r, n = lambda_v.shape
    if r == 0:
        return np.zeros((n, 0))
    n_v = 2 * r
    Tx = theta(n) if theta_x is None else np.asarray(theta_x)
    gamma = gamma or make_gamma(n_v)
    if gamma.n != n_v:
        raise DimensionError(f"Gamma built for n_v={gamma.n}, need {n_v}")
    stacked = np.hstack([-lambda_v.conj().T, lambda_v.T])
    g3 = 2j * Tx @ stacked @ gamma.gamma
    imag = float(np.abs(g3.imag).max())
    if imag > imag_tol * max(1.0, float(np.abs(g3.real).max())):
        raise CompletionError(f"G3 has imaginary residue {imag:.3e}; quadrature convention broken")
    return np.ascontiguousarray(g3.real)


def complete_noise(F, G1, G2, xi_v=None, rank_tol=None) -> NoiseCompletion:
    """Run the full completion: pick ``Xi_v`` (scalar shift unless given), factor, build ``G3``."""
    n = np.asarray(F).shape[0]
    h0 = completion_rhs(F, G1, G2)
    if xi_v is None:
        xi, shift = choose_xi(h0)
    else:
        xi = np.asarray(xi_v, dtype=float)
        if xi.shape != (n, n) or not np.allclose(xi, xi.T, rtol=0, atol=1e-14):
            raise ValueError("xi_v must be a real symmetric n_x x n_x matrix")
        xi = 0.5 * (xi + xi.T)
        shift = 0.0
    rhs = h0 + xi
    lam = factor_lambda(rhs, rank_tol)
    g3 = compute_g3(lam)
    return NoiseCompletion(lambda_v=lam, xi_v=xi, G3=g3, psd_shift=shift)
