# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False, language_level=3
"""Compiled symplectic stepping kernels.

Loops are kept flat and branch-free so gcc can vectorize the exp calls
through libmvec.  The build uses -ffast-math, which disables reliable
isfinite checks, so blow-up detection is an explicit bound test on the
force exponent before exp is taken.
"""

import numpy as np

cdef extern from "math.h":
    double exp(double x) nogil

# exp argument above this overflows double range
DEF EXP_BOUND = 700.0

cdef double W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
cdef double W0 = 1.0 - 2.0 * W1


cdef inline int _kick(double[::1] q, double[::1] p, double dt,
                      double[::1] d, double[::1] e) noexcept nogil:
    """p += dt * F(q) with free ends; returns 1 on exponent overflow."""
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t i
    cdef double dmax = -EXP_BOUND
    for i in range(n - 1):
        d[i] = q[i] - q[i + 1]
    for i in range(n - 1):
        if d[i] > dmax:
            dmax = d[i]
    if dmax > EXP_BOUND:
        return 1
    for i in range(n - 1):
        e[i] = exp(d[i])
    for i in range(n - 1):
        p[i] -= dt * e[i]
    for i in range(1, n):
        p[i] += dt * e[i - 1]
    return 0


cdef inline void _drift(double[::1] q, double[::1] p, double dt) noexcept nogil:
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t i
    for i in range(n):
        q[i] += dt * p[i]


cdef int _verlet_loop(double[::1] q, double[::1] p, double dt, long n_steps,
                      double[::1] d, double[::1] e) noexcept nogil:
    cdef double half = 0.5 * dt
    cdef long s
    for s in range(n_steps):
        _drift(q, p, half)
        if _kick(q, p, dt, d, e):
            return 1
        _drift(q, p, half)
    return 0


cdef int _yoshida_loop(double[::1] q, double[::1] p, double dt, long n_steps,
                       double[::1] d, double[::1] e) noexcept nogil:
    cdef double c1 = 0.5 * W1 * dt
    cdef double c2 = 0.5 * (W0 + W1) * dt
    cdef double k1 = W1 * dt
    cdef double k0 = W0 * dt
    cdef long s
    for s in range(n_steps):
        _drift(q, p, c1)
        if _kick(q, p, k1, d, e):
            return 1
        _drift(q, p, c2)
        if _kick(q, p, k0, d, e):
            return 1
        _drift(q, p, c2)
        if _kick(q, p, k1, d, e):
            return 1
        _drift(q, p, c1)
    return 0


def step_verlet(double[::1] q, double[::1] p, double dt, long n_steps):
    """Position-Verlet D(h/2) K(h) D(h/2); returns 0, or 1 on blow-up."""
    cdef double[::1] d = np.empty(q.shape[0] - 1)
    cdef double[::1] e = np.empty(q.shape[0] - 1)
    cdef int status
    with nogil:
        status = _verlet_loop(q, p, dt, n_steps, d, e)
    return status


def step_yoshida4(double[::1] q, double[::1] p, double dt, long n_steps):
    """Fourth-order composition with three force evaluations per step."""
    cdef double[::1] d = np.empty(q.shape[0] - 1)
    cdef double[::1] e = np.empty(q.shape[0] - 1)
    cdef int status
    with nogil:
        status = _yoshida_loop(q, p, dt, n_steps, d, e)
    return status
