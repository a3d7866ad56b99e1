"""Pure numpy fallback for the compiled RK4 kernels (same signatures)."""

import numpy as np


def rk4_linear(A, x0, dt, n_steps):
    A = np.asarray(A, dtype=float)
    x = np.array(x0, dtype=float)
    out = np.empty((n_steps + 1, x.size))
    out[0] = x
    for s in range(n_steps):
        k1 = A @ x
        k2 = A @ (x + 0.5 * dt * k1)
        k3 = A @ (x + 0.5 * dt * k2)
        k4 = A @ (x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[s + 1] = x
    return out


def rk4_lyapunov(A, Q, S0, target, dt, n_steps, store):
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    S = np.array(S0, dtype=float)
    target = np.asarray(target, dtype=float)
    At = A.T

    def f(X):
        return A @ X + X @ At + Q

    defect = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1 if store else 1,) + S.shape)
    defect[0] = np.linalg.norm(S - target)
    if store:
        states[0] = S
    for s in range(n_steps):
        k1 = f(S)
        k2 = f(S + 0.5 * dt * k1)
        k3 = f(S + 0.5 * dt * k2)
        k4 = f(S + dt * k3)
        S = S + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        defect[s + 1] = np.linalg.norm(S - target)
        if store:
            states[s + 1] = S
    if not store:
        states[0] = S
    return states, defect
