"""Mean-value dynamics and the commutation-relation witness.

Input fields are vacuum (zero mean), so first moments obey ``d<xi>/dt = A_sys <xi>``.
The commutation witness ``S`` (the real skew matrix behind ``2i Theta``) obeys
``S' = A S + S A^T + B Theta_noise B^T`` and stays at ``Theta`` exactly when the
system is physically realisable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import BACKEND, kernels
from .quadrature import theta

__all__ = ["BACKEND", "CommutationDefect", "MeanTrajectory", "SimulationError",
           "commutation_defect", "default_dt", "simulate_means", "step_response_metrics"]


class SimulationError(RuntimeError):
    pass


@dataclass
class MeanTrajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), n)


@dataclass
class CommutationDefect:
    times: np.ndarray
    defect: np.ndarray
    S: np.ndarray  # every step, or just the final matrix when not stored

    @property
    def max_defect(self) -> float:
        return float(self.defect.max())


def default_dt(A_sys) -> float:
    """``0.01 / max|eig|``; uses the full modulus so fast rotations stay resolved."""
    lam = np.abs(np.linalg.eigvals(np.asarray(A_sys, dtype=float)))
    top = float(lam.max()) if lam.size else 0.0
    return 0.01 / top if top > 0 else 0.01


def _grid(t_final, dt):
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    n_steps = int(math.ceil(t_final / dt - 1e-9)) if t_final > 0 else 0
    if n_steps:
        dt = t_final / n_steps
    return n_steps, dt, np.arange(n_steps + 1) * dt


def simulate_means(A_sys, x0, t_final, dt=None) -> MeanTrajectory:
    """Fixed-step classic RK4 for ``x' = A_sys x``.

    The step is shrunk slightly so the grid lands exactly on ``t_final``.
    """
    A = np.ascontiguousarray(A_sys, dtype=float)
    x0 = np.ascontiguousarray(x0, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != x0.size:
        raise ValueError(f"shape mismatch: A{A.shape}, x0 of length {x0.size}")
    dt = default_dt(A) if dt is None else float(dt)
    n_steps, dt, times = _grid(t_final, dt)
    states = np.asarray(kernels.rk4_linear(A, x0, dt, n_steps))
    if not np.all(np.isfinite(states)):
        bad = int(np.argmax(~np.isfinite(states).all(axis=1)))
        raise SimulationError(f"mean trajectory diverged at t={times[bad]:.6g}")
    return MeanTrajectory(times, states)


def _pr_residual(A, B, Tn, T):
    """``A T + T A^T + B Tn B^T`` accumulated in extended precision where available."""
    ld = np.longdouble
    A, B, Tn, T = (np.asarray(m, dtype=ld) for m in (A, B, Tn, T))
    return np.ascontiguousarray((A @ T + T @ A.T + B @ Tn @ B.T).astype(float))


def commutation_defect(A_sys, B_sys, theta_noise, t_final, dt=None, store=False) -> CommutationDefect:
    """Propagate ``S' = A S + S A^T + B Tn B^T`` from ``S(0) = Theta``.

    The deviation ``D = S - Theta`` is integrated instead of ``S``; it obeys the
    same equation with the constant forcing ``A Theta + Theta A^T + B Tn B^T``,
    so rounding scales with the defect rather than with ``Theta``.
    """
    A = np.ascontiguousarray(A_sys, dtype=float)
    n = A.shape[0]
    B = np.asarray(B_sys, dtype=float).reshape(n, -1)
    Tn = np.asarray(theta_noise, dtype=float).reshape(B.shape[1], B.shape[1])
    T = theta(n)
    R0 = _pr_residual(A, B, Tn, T)
    dt = default_dt(A) if dt is None else float(dt)
    n_steps, dt, times = _grid(t_final, dt)
    zero = np.zeros((n, n))
    D, defect = kernels.rk4_lyapunov(A, R0, zero, zero, dt, n_steps, bool(store))
    D, defect = np.asarray(D), np.asarray(defect)
    if not np.all(np.isfinite(defect)):
        bad = int(np.argmax(~np.isfinite(defect)))
        raise SimulationError(f"commutation witness diverged at t={times[bad]:.6g}")
    return CommutationDefect(times, defect, (D if store else D[0]) + T)


def _crossing(times, y, level, start=0):
    """First time at or after index ``start`` where ``y`` reaches ``level`` (linear interp)."""
    for k in range(max(start, 1), len(y)):
        if y[k] >= level:
            y0, y1 = y[k - 1], y[k]
            if y1 == y0:
                return float(times[k])
            return float(times[k - 1] + (level - y0) / (y1 - y0) * (times[k] - times[k - 1]))
    return None


def step_response_metrics(traj: MeanTrajectory, component_index: int = 0, band: float = 0.02) -> dict:
    """Overshoot, settling time (2 % band) and 10-90 % rise time of one component.

    The last sample is taken as the final value.
    """
    t = np.asarray(traj.times, dtype=float)
    y = np.asarray(traj.states, dtype=float)[:, component_index]
    y0, yf = y[0], y[-1]
    span = yf - y0
    if abs(span) <= 1e-14 * max(1.0, abs(y0)):
        raise ValueError("trajectory has no net transition; step metrics undefined")
    # progress in [0, 1] along the transition, regardless of its direction
    prog = (y - y0) / span
    dev = np.abs(y - yf) / abs(span)
    tail = dev[int(0.9 * len(dev)):]
    if tail.max() > band:
        raise ValueError("trajectory has not converged within the horizon")
    overshoot = max(0.0, float(prog.max() - 1.0))
    outside = np.nonzero(dev > band)[0]
    if outside.size == 0:
        settling = 0.0
    else:
        k = int(outside[-1])
        d0, d1 = dev[k], dev[k + 1]
        settling = float(t[k] + (d0 - band) / (d0 - d1) * (t[k + 1] - t[k]))
    t10 = _crossing(t, prog, 0.1)
    t90 = _crossing(t, prog, 0.9)
    rise = t90 - t10
    return {"overshoot": overshoot, "settling_time_2pct": settling, "rise_time_10_90": rise}
