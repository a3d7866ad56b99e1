"""Observer-based coherent controller synthesis and closed-loop assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .completion import CompletionError, NoiseCompletion, complete_noise
from .placement import (PoleSpec, place_observer_gain, place_state_feedback,
                        pole_pairing_error, poles_in_region, structured_gain_search,
                        structured_region_scan)
from .qsde import (DEFAULT_TOL, DimensionError, DirectCoupling, ObserverController,
                   QuadraturePlant, check_controller_realizability, is_controllable,
                   is_detectable)
from .quadrature import theta, theta_blockdiag


class AssumptionError(ValueError):
    """A hypothesis of the synthesis procedure does not hold for the given plant."""


@dataclass(frozen=True)
class StructuredGain:
    """Scalar-multiple-of-identity constraints on ``H`` and/or ``G1``.

    A fixed value (``h``/``g1``) is used as is; otherwise the scalar is searched
    within ``bounds`` against the pole spec (explicit poles or region).
    """

    H_scalar: bool = False
    G1_scalar: bool = False
    h: float | None = None
    g1: float | None = None
    bounds: tuple = (-10.0, 10.0)


@dataclass(frozen=True)
class SynthesisProblem:
    plant: QuadraturePlant
    Rc: DirectCoupling
    regulator_spec: PoleSpec
    observer_spec: PoleSpec
    structured_gain: StructuredGain | None = None
    xi_v: np.ndarray | None = None
    force_asymmetric_rc: bool = False


@dataclass
class LoopDesign:
    """What one loop (regulator or observer) ended up with."""

    poles: np.ndarray
    scalar: float | None = None
    pairing_error: float | None = None
    region_ok: bool | None = None
    reachable_modulus: tuple | None = None
    notes: list = field(default_factory=list)


@dataclass
class DesignInfo:
    regulator: LoopDesign
    observer: LoopDesign
    completion: NoiseCompletion


@dataclass
class ClosedLoopSystem:
    A_s: np.ndarray
    B_s: np.ndarray
    A_e: np.ndarray
    B_e: np.ndarray
    ctrl: ObserverController
    Rc: DirectCoupling
    plant: QuadraturePlant
    design: DesignInfo | None = None

    @property
    def n_x(self) -> int:
        return self.plant.n_x

    @property
    def noise_theta(self) -> np.ndarray:
        return theta_blockdiag(self.plant.n_w, self.ctrl.n_z, self.ctrl.n_v)


@dataclass(frozen=True)
class SeparationReport:
    triangular: bool
    lower_left_norm: float
    spectrum_union_residual: float


def assemble_closed_loop(plant: QuadraturePlant, ctrl: ObserverController,
                         Rc: DirectCoupling | np.ndarray | None = None) -> ClosedLoopSystem:
    n = plant.n_x
    if Rc is None:
        Rc = DirectCoupling.zero(n)
    elif not isinstance(Rc, DirectCoupling):
        Rc = DirectCoupling(Rc)
    if ctrl.n_x != n or Rc.Rc.shape != (n, n):
        raise DimensionError("plant, controller and Rc disagree on n_x")
    if ctrl.n_y != plant.n_y or ctrl.n_z != plant.n_u:
        raise DimensionError(
            f"controller channels (n_y={ctrl.n_y}, n_z={ctrl.n_z}) do not match plant "
            f"(n_y={plant.n_y}, n_u={plant.n_u})")
    A, B1, B2, C = plant.A, plant.B1, plant.B2, plant.C
    F, G1, G2, G3, H = ctrl.F, ctrl.G1, ctrl.G2, ctrl.G3, ctrl.H
    T2 = 2.0 * theta(n)
    R = Rc.Rc
    A_s = np.block([[A, B2 @ H + T2 @ R],
                    [G1 @ C + T2 @ R.T, F]])
    B_s = np.block([[B1, B2, np.zeros((n, ctrl.n_v))],
                    [G1, G2, G3]])
    # coordinates (x, e = x - x^); for F = A - G1 C + B2 H the lower-left block is 2 Theta (Rc - Rc^T)
    A_e = np.block([[A + B2 @ H + T2 @ R, -B2 @ H - T2 @ R],
                    [A - G1 @ C - T2 @ R.T + B2 @ H + T2 @ R - F, F - B2 @ H - T2 @ R]])
    B_e = np.vstack([B_s[:n], B_s[:n] - B_s[n:]])
    return ClosedLoopSystem(A_s, B_s, A_e, B_e, ctrl, Rc, plant)


def _hausdorff(a, b) -> float:
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size == 0 and b.size == 0:
        return 0.0
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def verify_separation(cls: ClosedLoopSystem, tol: float = 1e-12) -> SeparationReport:
    n = cls.n_x
    lower_left = float(np.linalg.norm(cls.A_e[n:, :n]))
    reg = np.linalg.eigvals(cls.A_e[:n, :n])
    obs = np.linalg.eigvals(cls.A_e[n:, n:])
    resid = _hausdorff(np.linalg.eigvals(cls.A_s), np.concatenate([reg, obs]))
    return SeparationReport(lower_left <= tol, lower_left, resid)


def _identity_gain(n_rows, n_cols, what):
    if n_rows != n_cols:
        raise DimensionError(f"scalar {what} needs a square gain, got {n_rows}x{n_cols}")
    return np.eye(n_rows)


def _design_loop(A_eff, K, spec: PoleSpec, fixed, search, bounds, label):
    """Structured (scalar) loop design; ``K`` is the direction ``A_eff + s K``."""
    if fixed is not None:
        poles = np.linalg.eigvals(A_eff + fixed * K)
        d = LoopDesign(poles, scalar=float(fixed))
        if spec.poles:
            d.pairing_error = pole_pairing_error(poles, spec.poles)
        return d
    if not search:
        raise ValueError(f"{label}: no scalar value given and search disabled")
    if spec.poles:
        s, poles, err = structured_gain_search(A_eff, K, spec.poles, bounds)
        d = LoopDesign(poles, scalar=s, pairing_error=err)
        if err > 1e-8:
            d.notes.append(f"{label}: requested poles not reachable with a scalar gain "
                           f"(best pairing error {err:.3e})")
        return d
    if spec.region is None:
        raise ValueError(f"{label}: structured search needs target poles or a region")
    scan = structured_region_scan(A_eff, K, spec.region, bounds)
    if scan["s"] is None:
        s, poles = 0.0, np.linalg.eigvals(A_eff)
        d = LoopDesign(poles, scalar=s)
        d.notes.append(f"{label}: no scalar gain in {bounds} puts the poles inside the region")
        return d
    d = LoopDesign(scan["poles"], scalar=scan["s"], reachable_modulus=scan["modulus_range"])
    lo, hi = scan["modulus_range"]
    feas = scan["feasible"]
    d.notes.append(f"{label}: scalar gain feasible on [{feas[0]:.4g}, {feas[-1]:.4g}]")
    if hi - lo <= 1e-9 * max(1.0, hi):
        d.notes.append(f"{label}: reachable poles confined to the arc |z| = {hi:.6g}")
    else:
        d.notes.append(f"{label}: reachable pole moduli span [{lo:.6g}, {hi:.6g}]")
    return d


def synthesize(problem: SynthesisProblem, rng: np.random.Generator | None = None,
               tol: float = DEFAULT_TOL) -> ClosedLoopSystem:
    """Design ``G1``, then ``H``, then ``G2``, then the noise completion ``G3``."""
    plant, Rc = problem.plant, problem.Rc
    n = plant.n_x
    if Rc.Rc.shape != (n, n):
        raise DimensionError(f"Rc must be {n}x{n}")
    if not Rc.is_symmetric and not problem.force_asymmetric_rc:
        raise AssumptionError(
            f"Rc is not symmetric (||Rc - Rc^T|| = {Rc.asymmetry:.3e}); "
            "separation of observer and regulator design fails")
    rng = np.random.default_rng(0) if rng is None else rng
    T2R = 2.0 * theta(n) @ Rc.Rc
    A_obs = plant.A - T2R
    A_reg = plant.A + T2R
    sg = problem.structured_gain or StructuredGain()

    if not is_detectable(A_obs, plant.C):
        raise AssumptionError("(A - 2 Theta Rc, C) is not detectable")
    if not is_controllable(A_reg, plant.B2):
        raise AssumptionError("(A + 2 Theta Rc, B2) is not controllable")

    if sg.G1_scalar:
        I = _identity_gain(n, plant.n_y, "G1")
        obs = _design_loop(A_obs, -plant.C, problem.observer_spec, sg.g1, True, sg.bounds, "observer")
        G1 = obs.scalar * I
    else:
        if not problem.observer_spec.poles:
            raise ValueError("observer: explicit target poles required for unstructured design")
        G1 = place_observer_gain(A_obs, plant.C, problem.observer_spec, rng)
        obs = LoopDesign(np.linalg.eigvals(A_obs - G1 @ plant.C))
        obs.pairing_error = pole_pairing_error(obs.poles, problem.observer_spec.poles)

    if sg.H_scalar:
        I = _identity_gain(plant.n_u, n, "H")
        reg = _design_loop(A_reg, plant.B2, problem.regulator_spec, sg.h, True, sg.bounds, "regulator")
        H = reg.scalar * I
    else:
        if not problem.regulator_spec.poles:
            raise ValueError("regulator: explicit target poles required for unstructured design")
        H = place_state_feedback(A_reg, plant.B2, problem.regulator_spec, rng)
        reg = LoopDesign(np.linalg.eigvals(A_reg + plant.B2 @ H))
        reg.pairing_error = pole_pairing_error(reg.poles, problem.regulator_spec.poles)

    for loop, spec in ((reg, problem.regulator_spec), (obs, problem.observer_spec)):
        if spec.region is not None:
            loop.region_ok = poles_in_region(loop.poles, spec.region).ok

    F = plant.A - G1 @ plant.C + plant.B2 @ H
    G2 = theta(n) @ H.T @ theta(plant.n_u)
    comp = complete_noise(F, G1, G2, xi_v=problem.xi_v)
    ctrl = ObserverController(F, G1, G2, comp.G3, H)
    rep = check_controller_realizability(ctrl, tol)
    if not rep.physical:
        raise CompletionError(
            f"completed controller is not realisable (residuals {rep.residual_a:.3e}, {rep.residual_b:.3e})")
    cls = assemble_closed_loop(plant, ctrl, Rc)
    cls.design = DesignInfo(regulator=reg, observer=obs, completion=comp)
    return cls
