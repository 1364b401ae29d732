"""Pure-numpy stepping kernels, API-compatible with the compiled core."""

import numpy as np

_EXP_BOUND = 700.0

_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1


def _kick(q, p, dt):
    d = q[:-1] - q[1:]
    if d.size and d.max() > _EXP_BOUND:
        return 1
    e = np.exp(d)
    p[:-1] -= dt * e
    p[1:] += dt * e
    return 0


def step_verlet(q, p, dt, n_steps):
    half = 0.5 * dt
    for _ in range(n_steps):
        q += half * p
        if _kick(q, p, dt):
            return 1
        q += half * p
    return 0


def step_yoshida4(q, p, dt, n_steps):
    c1 = 0.5 * _W1 * dt
    c2 = 0.5 * (_W0 + _W1) * dt
    for _ in range(n_steps):
        q += c1 * p
        if _kick(q, p, _W1 * dt):
            return 1
        q += c2 * p
        if _kick(q, p, _W0 * dt):
            return 1
        q += c2 * p
        if _kick(q, p, _W1 * dt):
            return 1
        q += c1 * p
    return 0
