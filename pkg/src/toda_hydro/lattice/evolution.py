"""Time evolution of the open-ended lattice.

The stepping kernels come from the compiled extension when it imported
cleanly; setting TODA_HYDRO_NO_EXT in the environment (or an import
failure) selects the pure-numpy fallback with identical semantics.
"""

import math
import os

import numpy as np

from .config import TodaState
from . import _fallback

if os.environ.get("TODA_HYDRO_NO_EXT"):
    _kernels = _fallback
else:
    try:
        from . import _core as _kernels
    except ImportError:
        _kernels = _fallback

__all__ = ["BlowUpError", "evolve", "backend_name"]

# steps shorter than dt * _REMAINDER_CUTOFF are rounding residue, not steps
_REMAINDER_CUTOFF = 1e-12


class BlowUpError(FloatingPointError):
    """A stretch collapsed far enough to overflow the force exponent."""


def backend_name():
    """Which stepping implementation is active: 'compiled' or 'fallback'."""
    return "fallback" if _kernels is _fallback else "compiled"


def _stepper(config):
    if config.integrator == "verlet2":
        return _kernels.step_verlet
    return _kernels.step_yoshida4


def evolve(state, t_final, callback=None):
    """Integrate to t_final in fixed dt steps (last one shortened).

    Returns a new consistent state; the input is left untouched.  When
    callback is given it is called with the freshly synchronized state
    after every step, which costs one state rebuild per step and is meant
    for low-rate diagnostics such as current accumulation.
    """
    if t_final < state.time - _REMAINDER_CUTOFF:
        raise ValueError("t_final precedes the state time")
    span = max(t_final - state.time, 0.0)
    config = state.config
    dt = config.dt
    n_full = int(math.floor(span / dt + _REMAINDER_CUTOFF))
    remainder = span - n_full * dt
    if remainder < dt * _REMAINDER_CUTOFF:
        remainder = 0.0

    q = state.q.copy()
    p = state.b.copy()
    step = _stepper(config)

    def _sync(time_now):
        a = np.exp(-0.5 * (q[1:] - q[:-1]))
        return TodaState(config, a, p.copy(), q.copy(), time=time_now)

    if span == 0.0:
        return _sync(state.time)

    def _run(h, n, time_now):
        if step(q, p, h, n):
            raise BlowUpError(
                "force exponent exceeded its overflow bound at t~%.6g; "
                "the trajectory blew up" % time_now
            )

    if callback is None:
        if n_full:
            _run(dt, n_full, state.time)
        if remainder:
            _run(remainder, 1, state.time + n_full * dt)
    else:
        for k in range(n_full):
            _run(dt, 1, state.time + k * dt)
            callback(_sync(state.time + (k + 1) * dt))
        if remainder:
            _run(remainder, 1, state.time + n_full * dt)
            callback(_sync(t_final))

    return _sync(t_final)
