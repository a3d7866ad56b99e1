"""Quadrature bookkeeping: symplectic form, pair permutation and the Gamma map.

State vectors are ordered ``(q1, p1, q2, p2, ...)`` throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

J = np.array([[0.0, 1.0], [-1.0, 0.0]])

#: quadrature -> (annihilation, creation) block
M = 0.5 * np.array([[1.0, 1.0j], [1.0, -1.0j]])


def _check_even(n, name="n"):
    if isinstance(n, bool) or int(n) != n or n < 2 or n % 2:
        raise ValueError(f"{name} must be an even integer >= 2, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class SymplecticStructure:
    n: int
    theta: np.ndarray


@dataclass(frozen=True)
class QuadraturePermutation:
    """``perm[k]`` is the (0-based) source index placed at position ``k``."""

    n: int
    perm: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        P = np.zeros((self.n, self.n))
        P[np.arange(self.n), self.perm] = 1.0
        return P

    def apply(self, a):
        return np.asarray(a)[self.perm]


@dataclass(frozen=True)
class GammaMap:
    n: int
    gamma: np.ndarray


def theta(n: int) -> np.ndarray:
    """Return ``I_{n/2} kron J`` as a plain array."""
    n = _check_even(n)
    return np.kron(np.eye(n // 2), J)


def make_theta(n: int) -> SymplecticStructure:
    n = _check_even(n)
    t = theta(n)
    t.flags.writeable = False
    return SymplecticStructure(n, t)


def theta_blockdiag(*dims: int) -> np.ndarray:
    """Block-diagonal symplectic form over several channels; zero-size blocks are skipped."""
    blocks = [theta(d) for d in dims if d]
    total = sum(dims)
    out = np.zeros((total, total))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def make_permutation(n: int) -> QuadraturePermutation:
    """Odd-position entries first, then even-position ones: (a1, a3, ..., a2, a4, ...)."""
    n = _check_even(n)
    perm = np.concatenate([np.arange(0, n, 2), np.arange(1, n, 2)])
    perm.flags.writeable = False
    return QuadraturePermutation(n, perm)


def make_gamma(n_v: int) -> GammaMap:
    n_v = _check_even(n_v, "n_v")
    P = make_permutation(n_v).matrix
    g = P @ np.kron(np.eye(n_v // 2), M)
    g.flags.writeable = False
    return GammaMap(n_v, g)


def quadratures_to_ladder(x, gamma: GammaMap | None = None) -> np.ndarray:
    """Map a quadrature vector to stacked ``(a_1..a_k, a_1^#..a_k^#)``."""
    x = np.asarray(x)
    gamma = gamma or make_gamma(x.shape[0])
    return gamma.gamma @ x


def ladder_to_quadratures(a, gamma: GammaMap | None = None) -> np.ndarray:
    a = np.asarray(a)
    gamma = gamma or make_gamma(a.shape[0])
    return np.linalg.solve(gamma.gamma, a)
