# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fixed-step RK4 kernels for linear ODEs on small dense matrices."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline void _matvec(const double[:, ::1] A, const double[::1] x, double[::1] out,
                         Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(n):
            acc = acc + A[i, k] * x[k]
        out[i] = acc


def rk4_linear(const double[:, ::1] A, const double[::1] x0, double dt, Py_ssize_t n_steps):
    """Integrate ``x' = A x``; returns all ``n_steps + 1`` states."""
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((n_steps + 1, n))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef double[::1] tmp = np.empty(n)
    cdef double[::1] k1 = np.empty(n)
    cdef double[::1] k2 = np.empty(n)
    cdef double[::1] k3 = np.empty(n)
    cdef double[::1] k4 = np.empty(n)
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0
    cdef Py_ssize_t s, i
    with nogil:
        for i in range(n):
            out[0, i] = x[i]
        for s in range(n_steps):
            _matvec(A, x, k1, n)
            for i in range(n):
                tmp[i] = x[i] + h2 * k1[i]
            _matvec(A, tmp, k2, n)
            for i in range(n):
                tmp[i] = x[i] + h2 * k2[i]
            _matvec(A, tmp, k3, n)
            for i in range(n):
                tmp[i] = x[i] + dt * k3[i]
            _matvec(A, tmp, k4, n)
            for i in range(n):
                x[i] = x[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                out[s + 1, i] = x[i]
    return out_arr


cdef inline void _lyap_rhs(const double[:, ::1] A, const double[:, ::1] Q,
                           const double[:, ::1] S, double[:, ::1] out,
                           Py_ssize_t n) noexcept nogil:
    # out = A S + S A^T + Q
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(n):
        for j in range(n):
            acc = Q[i, j]
            for k in range(n):
                acc = acc + A[i, k] * S[k, j] + S[i, k] * A[j, k]
            out[i, j] = acc


cdef inline double _frob_diff(const double[:, ::1] S, const double[:, ::1] T,
                              Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc = 0.0, d
    for i in range(n):
        for j in range(n):
            d = S[i, j] - T[i, j]
            acc = acc + d * d
    return sqrt(acc)


def rk4_lyapunov(const double[:, ::1] A, const double[:, ::1] Q, const double[:, ::1] S0,
                 const double[:, ::1] target, double dt, Py_ssize_t n_steps, bint store):
    """Integrate ``S' = A S + S A^T + Q``.

    Returns ``(states, defect)`` where ``defect[k] = ||S_k - target||_F`` and
    ``states`` holds every step when ``store`` is true, otherwise only the last.
    """
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] defect_arr = np.empty(n_steps + 1)
    cdef double[::1] defect = defect_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=3] states_arr = np.empty(
        (n_steps + 1 if store else 1, n, n))
    cdef double[:, :, ::1] states = states_arr
    cdef double[:, ::1] S = np.array(S0, dtype=np.float64)
    cdef double[:, ::1] tmp = np.empty((n, n))
    cdef double[:, ::1] k1 = np.empty((n, n))
    cdef double[:, ::1] k2 = np.empty((n, n))
    cdef double[:, ::1] k3 = np.empty((n, n))
    cdef double[:, ::1] k4 = np.empty((n, n))
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0
    cdef Py_ssize_t s, i, j
    with nogil:
        defect[0] = _frob_diff(S, target, n)
        if store:
            states[0, :, :] = S
        for s in range(n_steps):
            _lyap_rhs(A, Q, S, k1, n)
            for i in range(n):
                for j in range(n):
                    tmp[i, j] = S[i, j] + h2 * k1[i, j]
            _lyap_rhs(A, Q, tmp, k2, n)
            for i in range(n):
                for j in range(n):
                    tmp[i, j] = S[i, j] + h2 * k2[i, j]
            _lyap_rhs(A, Q, tmp, k3, n)
            for i in range(n):
                for j in range(n):
                    tmp[i, j] = S[i, j] + dt * k3[i, j]
            _lyap_rhs(A, Q, tmp, k4, n)
            for i in range(n):
                for j in range(n):
                    S[i, j] = S[i, j] + h6 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
            defect[s + 1] = _frob_diff(S, target, n)
            if store:
                states[s + 1, :, :] = S
        if not store:
            states[0, :, :] = S
    return states_arr, defect_arr
