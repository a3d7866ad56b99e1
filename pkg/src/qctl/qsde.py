"""Linear quantum plant / coherent controller models and their structural checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import _check_even, theta

DEFAULT_TOL = 1e-9


class DimensionError(ValueError):
    pass


def _mat(a, name, shape=None, dtype=float):
    a = np.array(a, dtype=dtype)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D matrix, got shape {a.shape}")
    if shape is not None and a.shape != shape:
        raise DimensionError(f"{name} has shape {a.shape}, expected {shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class QuadraturePlant:
    """Real quadrature-form plant ``dx = Ax dt + B1 dw + B2 du``, ``dy = Cx dt + dw``."""

    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = _mat(self.A, "A")
        n_x = A.shape[0]
        if A.shape != (n_x, n_x):
            raise DimensionError(f"A must be square, got {A.shape}")
        B1 = _mat(self.B1, "B1")
        B2 = _mat(self.B2, "B2")
        C = _mat(self.C, "C")
        if B1.shape[0] != n_x or B2.shape[0] != n_x or C.shape[1] != n_x:
            raise DimensionError(
                f"inconsistent shapes A{A.shape} B1{B1.shape} B2{B2.shape} C{C.shape}")
        # dy = Cx dt + dw forces one output quadrature per input-noise quadrature
        if C.shape[0] != B1.shape[1]:
            raise DimensionError(f"n_y={C.shape[0]} must equal n_w={B1.shape[1]}")
        for name, d in (("n_x", n_x), ("n_w", B1.shape[1]), ("n_u", B2.shape[1])):
            _check_even(d, name)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B1", B1)
        object.__setattr__(self, "B2", B2)
        object.__setattr__(self, "C", C)

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_w(self) -> int:
        return self.B1.shape[1]

    @property
    def n_u(self) -> int:
        return self.B2.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class ObserverController:
    """Coherent controller ``dx^ = F x^ dt + G1 dy + G2 dz + G3 dv``, ``du = H x^ dt + dz``.

    ``G3`` may have zero columns (no extra vacuum channels needed).
    """

    F: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    G3: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        F = _mat(self.F, "F")
        n_x = F.shape[0]
        if F.shape != (n_x, n_x):
            raise DimensionError(f"F must be square, got {F.shape}")
        G1 = _mat(self.G1, "G1")
        G2 = _mat(self.G2, "G2")
        G3 = np.array(self.G3, dtype=float).reshape(n_x, -1)
        G3 = _mat(G3, "G3")
        H = _mat(self.H, "H")
        if G1.shape[0] != n_x or G2.shape[0] != n_x or H.shape[1] != n_x:
            raise DimensionError(
                f"inconsistent shapes F{F.shape} G1{G1.shape} G2{G2.shape} H{H.shape}")
        if G2.shape[1] != H.shape[0]:
            raise DimensionError(f"n_z mismatch: G2 has {G2.shape[1]} columns, H has {H.shape[0]} rows")
        _check_even(n_x, "n_x")
        _check_even(G1.shape[1], "n_y")
        _check_even(G2.shape[1], "n_z")
        if G3.shape[1] % 2:
            raise DimensionError(f"n_v must be even, got {G3.shape[1]}")
        for name, v in (("F", F), ("G1", G1), ("G2", G2), ("G3", G3), ("H", H)):
            object.__setattr__(self, name, v)

    @property
    def n_x(self) -> int:
        return self.F.shape[0]

    @property
    def n_y(self) -> int:
        return self.G1.shape[1]

    @property
    def n_z(self) -> int:
        return self.G2.shape[1]

    @property
    def n_v(self) -> int:
        return self.G3.shape[1]


@dataclass(frozen=True)
class DirectCoupling:
    """Interaction Hamiltonian ``1/2 x^T Rc x^ + 1/2 x^^T Rc^T x``."""

    Rc: np.ndarray

    def __post_init__(self):
        Rc = _mat(self.Rc, "Rc")
        if Rc.shape[0] != Rc.shape[1]:
            raise DimensionError(f"Rc must be square, got {Rc.shape}")
        object.__setattr__(self, "Rc", Rc)

    @classmethod
    def zero(cls, n_x: int) -> "DirectCoupling":
        return cls(np.zeros((n_x, n_x)))

    @property
    def asymmetry(self) -> float:
        return float(np.linalg.norm(self.Rc - self.Rc.T))

    @property
    def is_symmetric(self) -> bool:
        return self.asymmetry <= 1e-12


@dataclass(frozen=True)
class RealizabilityReport:
    residual_a: float
    residual_b: float
    physical: bool


def plant_residuals(plant: QuadraturePlant):
    """Return the two realisability residual matrices (drift, input/output)."""
    Tx, Tw, Tu = theta(plant.n_x), theta(plant.n_w), theta(plant.n_u)
    ra = (plant.A @ Tx + Tx @ plant.A.T
          + plant.B1 @ Tw @ plant.B1.T + plant.B2 @ Tu @ plant.B2.T)
    rb = plant.B1 - Tx @ plant.C.T @ Tw
    return ra, rb


def check_plant_realizability(plant: QuadraturePlant, tol: float = DEFAULT_TOL) -> RealizabilityReport:
    ra, rb = plant_residuals(plant)
    a, b = float(np.linalg.norm(ra)), float(np.linalg.norm(rb))
    return RealizabilityReport(a, b, a <= tol and b <= tol)


def controller_residuals(ctrl: ObserverController, include_g3: bool = True):
    Tx, Ty, Tz = theta(ctrl.n_x), theta(ctrl.n_y), theta(ctrl.n_z)
    ra = (ctrl.F @ Tx + Tx @ ctrl.F.T
          + ctrl.G1 @ Ty @ ctrl.G1.T + ctrl.G2 @ Tz @ ctrl.G2.T)
    if include_g3 and ctrl.n_v:
        ra = ra + ctrl.G3 @ theta(ctrl.n_v) @ ctrl.G3.T
    rb = ctrl.G2 - Tx @ ctrl.H.T @ Tz
    return ra, rb


def check_controller_realizability(ctrl: ObserverController, tol: float = DEFAULT_TOL) -> RealizabilityReport:
    ra, rb = controller_residuals(ctrl)
    a, b = float(np.linalg.norm(ra)), float(np.linalg.norm(rb))
    return RealizabilityReport(a, b, a <= tol and b <= tol)


def numerical_rank(M, tol=None) -> int:
    """Rank with cutoff ``max(shape) * eps * sigma_max`` unless ``tol`` is given."""
    M = np.atleast_2d(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if tol is None:
        tol = max(M.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    return int(np.sum(s > tol))


def _square_pair(A, X, axis):
    A = np.asarray(A, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"A must be square, got {A.shape}")
    if X.shape[axis] != A.shape[0]:
        raise DimensionError(f"shape mismatch: A{A.shape} vs {X.shape}")
    return A, X


def controllability_matrix(A, B) -> np.ndarray:
    A, B = _square_pair(A, B, 0)
    blocks = [B]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def is_controllable(A, B, tol=None) -> bool:
    A, B = _square_pair(A, B, 0)
    return numerical_rank(controllability_matrix(A, B), tol) == A.shape[0]


def is_detectable(A, C, tol=None) -> bool:
    """PBH test over the eigenvalues with non-negative real part."""
    A, C = _square_pair(A, C, 1)
    n = A.shape[0]
    # marginal modes count as unstable: Hurwitz needs a strict margin
    margin = 1e-10 * max(1.0, np.linalg.norm(A, 2))
    for lam in np.linalg.eigvals(A):
        if lam.real < -margin:
            continue
        pbh = np.vstack([A - lam * np.eye(n), C])
        if numerical_rank(pbh, tol) < n:
            return False
    return True


def random_physical_plant(rng: np.random.Generator, n_x: int, n_w: int = 2, n_u: int = 2,
                          scale: float = 1.0) -> QuadraturePlant:
    """Draw a plant satisfying both realisability identities exactly (up to rounding).

    ``A = Theta R + Q Theta / 2`` with ``R`` symmetric solves the drift identity
    for ``Q = B1 Theta B1^T + B2 Theta B2^T``.
    """
    Tx = theta(n_x)
    C = scale * rng.standard_normal((n_w, n_x))
    B1 = Tx @ C.T @ theta(n_w)
    B2 = scale * rng.standard_normal((n_x, n_u))
    R = scale * rng.standard_normal((n_x, n_x))
    R = 0.5 * (R + R.T)
    Q = B1 @ theta(n_w) @ B1.T + B2 @ theta(n_u) @ B2.T
    A = Tx @ R + 0.5 * Q @ Tx
    return QuadraturePlant(A, B1, B2, C)
