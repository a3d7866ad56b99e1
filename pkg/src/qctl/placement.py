"""Pole placement for the regulator and observer loops, plus pole-region checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize, signal

from .qsde import DimensionError, is_controllable, is_detectable
from .quadrature import theta


class PlacementError(RuntimeError):
    pass


@dataclass(frozen=True)
class PoleRegion:
    """``|z| <= r_max``, ``Re z <= -alpha_min`` and damping angle ``|arg(-z)| <= theta_max``."""

    r_max: float
    alpha_min: float
    theta_max: float  # radians

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if self.alpha_min < 0:
            raise ValueError("alpha_min must be non-negative")
        if not 0 < self.theta_max <= math.pi / 2 + 1e-15:
            raise ValueError("theta_max must lie in (0, pi/2]")

    @classmethod
    def from_degrees(cls, r_max, alpha_min, theta_max_deg):
        return cls(float(r_max), float(alpha_min), math.radians(theta_max_deg))


@dataclass(frozen=True)
class PoleSpec:
    poles: tuple = ()
    region: PoleRegion | None = None

    def __post_init__(self):
        poles = tuple(complex(p) for p in self.poles)
        object.__setattr__(self, "poles", poles)
        if poles and not is_conjugate_closed(poles):
            raise ValueError("pole set is not closed under complex conjugation")


@dataclass(frozen=True)
class PoleCheck:
    pole: complex
    modulus_ok: bool
    decay_ok: bool
    damping_ok: bool

    @property
    def ok(self) -> bool:
        return self.modulus_ok and self.decay_ok and self.damping_ok


@dataclass
class RegionReport:
    ok: bool
    checks: list = field(default_factory=list)


def is_conjugate_closed(poles, tol=1e-9) -> bool:
    p = np.asarray(poles, dtype=complex)
    if p.size == 0:
        return True
    cost = np.abs(p[:, None] - p.conj()[None, :])
    rows, cols = optimize.linear_sum_assignment(cost)
    return bool(cost[rows, cols].max() <= tol * max(1.0, np.abs(p).max()))


def pole_pairing_error(actual, target) -> float:
    """Largest distance under the optimal one-to-one matching of two pole multisets."""
    a = np.asarray(actual, dtype=complex).ravel()
    t = np.asarray(target, dtype=complex).ravel()
    if a.size != t.size:
        raise ValueError(f"pole counts differ: {a.size} vs {t.size}")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - t[None, :])
    rows, cols = optimize.linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def real_block_form(poles) -> np.ndarray:
    """Real block-diagonal matrix with the given (conjugate-closed) spectrum."""
    p = list(np.asarray(poles, dtype=complex))
    blocks = []
    reals = [z for z in p if abs(z.imag) <= 1e-12 * max(1.0, abs(z))]
    upper = sorted((z for z in p if z.imag > 1e-12 * max(1.0, abs(z))),
                   key=lambda z: (z.real, z.imag))
    for z in reals:
        blocks.append(np.array([[z.real]]))
    for z in upper:
        blocks.append(np.array([[z.real, z.imag], [-z.imag, z.real]]))
    L = linalg.block_diag(*blocks) if blocks else np.zeros((0, 0))
    if L.shape[0] != len(p):
        raise ValueError("pole set is not closed under complex conjugation")
    return L


def _sylvester_gain(A, B, Lam, rng, max_tries, cond_max, tol, target):
    # X is the closed-loop eigenvector basis, so among draws meeting tol keep the
    # best-conditioned one: it bounds transient growth and rounding amplification
    n, m = B.shape
    best = None
    for _ in range(max_tries):
        G = rng.standard_normal((m, n))
        try:
            X = linalg.solve_sylvester(A, -Lam, -B @ G)
        except (linalg.LinAlgError, ValueError):
            continue
        if not np.all(np.isfinite(X)):
            continue
        cond = np.linalg.cond(X)
        if cond > cond_max:
            continue
        H = np.linalg.solve(X.T, G.T).T
        err = pole_pairing_error(np.linalg.eigvals(A + B @ H), target)
        key = (err > tol, cond if err <= tol else err)
        if best is None or key < best[0]:
            best = (key, err, H)
    return None if best is None else best[1:]


def place_state_feedback(A_eff, B, spec: PoleSpec | list, rng=None, *, tol=1e-8,
                         accept_tol=1e-6, max_tries=25, cond_max=1e8) -> np.ndarray:
    """Gain ``H`` such that ``eig(A_eff + B H)`` equals the requested poles.

    Uses the Sylvester-equation parametrisation ``A X - X Lam = -B G``,
    ``H = G X^-1`` with random ``G`` drawn from ``rng``; an ill-conditioned
    ``X`` triggers a redraw.  All ``max_tries`` draws are made; among those
    whose pole pairing error is below ``tol`` the one with the best-conditioned
    ``X`` wins.  Otherwise the most accurate gain is returned if it is below ``accept_tol``
    (single-input gains are unique, so eigenvalue conditioning sets the floor).
    """
    A = np.asarray(A_eff, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n = A.shape[0]
    if A.shape != (n, n) or B.shape[0] != n:
        raise DimensionError(f"shape mismatch A{A.shape} B{B.shape}")
    spec = spec if isinstance(spec, PoleSpec) else PoleSpec(tuple(spec))
    target = np.array(spec.poles, dtype=complex)
    if target.size != n:
        raise ValueError(f"need {n} poles, got {target.size}")
    if pole_pairing_error(np.linalg.eigvals(A), target) <= tol:
        return np.zeros((B.shape[1], n))
    if not is_controllable(A, B):
        raise PlacementError("(A_eff, B) is not controllable")
    rng = np.random.default_rng(0) if rng is None else rng
    Lam = real_block_form(target)
    best = _sylvester_gain(A, B, Lam, rng, max_tries, cond_max, tol, target)
    if best is not None and best[0] <= tol:
        return best[1]
    # Sylvester route stalls when targets coincide with open-loop eigenvalues
    try:
        res = signal.place_poles(A, B, target, method="YT", maxiter=100)
        H = -res.gain_matrix
        err = pole_pairing_error(np.linalg.eigvals(A + B @ H), target)
        if best is None or err < best[0]:
            best = (err, H)
    except ValueError:
        pass
    if best is None or best[0] > accept_tol:
        got = "no finite gain" if best is None else f"pairing error {best[0]:.2e}"
        raise PlacementError(f"pole placement failed after {max_tries} draws ({got})")
    return best[1]


def place_observer_gain(A_eff, C, spec: PoleSpec | list, rng=None, **kw) -> np.ndarray:
    """Gain ``G1`` with ``eig(A_eff - G1 C)`` at the requested poles (dual problem)."""
    A = np.asarray(A_eff, dtype=float)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if not is_detectable(A, C):
        raise PlacementError("(A_eff, C) is not detectable")
    return -place_state_feedback(A.T, C.T, spec, rng, **kw).T


def structured_gain_search(A_eff, K, target, bounds=(-10.0, 10.0), grid=4001):
    """Best scalar ``s`` for ``eig(A_eff + s K)`` against ``target`` poles.

    Coarse grid followed by bounded Brent refinement of the squared pairing error.
    Returns ``(s, achieved_poles, pairing_error)``.
    """
    A = np.asarray(A_eff, dtype=float)
    K = np.asarray(K, dtype=float)
    target = np.asarray(target, dtype=complex)

    def cost(s):
        return pole_pairing_error(np.linalg.eigvals(A + s * K), target) ** 2

    ss = np.linspace(bounds[0], bounds[1], grid)
    vals = np.array([cost(s) for s in ss])
    k = int(np.argmin(vals))
    lo, hi = ss[max(k - 1, 0)], ss[min(k + 1, grid - 1)]
    res = optimize.minimize_scalar(cost, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-14, "maxiter": 500})
    s = float(res.x) if res.fun <= vals[k] else float(ss[k])
    poles = np.linalg.eigvals(A + s * K)
    return s, poles, pole_pairing_error(poles, target)


def structured_region_scan(A_eff, K, region: PoleRegion, bounds=(-10.0, 10.0), grid=4001):
    """Sweep ``s`` in ``eig(A_eff + s K)`` and collect the values landing inside ``region``.

    Returns a dict with the feasible ``s`` values, the chosen one (largest
    stability margin) and the modulus range of the reachable poles.
    """
    A = np.asarray(A_eff, dtype=float)
    K = np.asarray(K, dtype=float)
    feasible, moduli = [], []
    best = None
    for s in np.linspace(bounds[0], bounds[1], grid):
        p = np.linalg.eigvals(A + s * K)
        if poles_in_region(p, region).ok:
            feasible.append(float(s))
            moduli.extend(np.abs(p))
            margin = float(-p.real.max())
            if best is None or margin > best[0]:
                best = (margin, float(s), p)
    if best is None:
        return {"feasible": [], "s": None, "poles": None, "modulus_range": None}
    return {"feasible": feasible, "s": best[1], "poles": best[2],
            "modulus_range": (float(min(moduli)), float(max(moduli)))}


def closed_loop_char_poly(plant, H, G1, Rc):
    """Monic regulator and observer characteristic polynomials (highest power first)."""
    Rc = np.asarray(getattr(Rc, "Rc", Rc), dtype=float)
    if np.linalg.norm(Rc - Rc.T) > 1e-12:
        raise ValueError("closed-loop polynomial factorises only for symmetric Rc")
    T2R = 2.0 * theta(plant.n_x) @ Rc
    reg = plant.A + plant.B2 @ np.asarray(H) + T2R
    obs = plant.A - np.asarray(G1) @ plant.C - T2R
    return np.real(np.poly(reg)), np.real(np.poly(obs))


def poles_in_region(poles, region: PoleRegion, tol=1e-12) -> RegionReport:
    checks = []
    for z in np.atleast_1d(np.asarray(poles, dtype=complex)):
        z = complex(z)
        mod_ok = abs(z) <= region.r_max * (1 + tol) + tol
        decay_ok = z.real <= -region.alpha_min + tol
        ang = abs(math.atan2(-z.imag, -z.real))
        damp_ok = z.real < 0 and ang <= region.theta_max + tol
        checks.append(PoleCheck(z, mod_ok, decay_ok, damp_ok))
    return RegionReport(all(c.ok for c in checks), checks)
