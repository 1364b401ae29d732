"""Local conserved charges, their currents, and integrated transport.

Everything here works on the symmetric tridiagonal matrix built from the
Flaschka variables.  Powers are taken with a banded recursion that only
ever forms the diagonals up to offset m, so a single-site charge touches
sites within distance m and costs O(m^2).
"""

import numpy as np

from .config import ChargeField

__all__ = [
    "band_power",
    "local_charge",
    "local_current",
    "charge_field",
    "integrated_current",
]


def band_power(a, b, m):
    """Diagonals of the m-th matrix power.

    Returns a list diag[d], d = 0..m, with diag[d][i] = [L^m]_{i, i+d}.
    The matrix is symmetric so negative offsets are the same arrays.
    """
    if m < 0:
        raise ValueError("power must be nonnegative")
    n = b.shape[0]
    diags = [np.ones(n)]
    for _ in range(m):
        width = len(diags)
        new = []
        for d in range(width + 1):
            ln = n - d
            out = np.zeros(ln)
            if d < width:
                out += b[:ln] * diags[d]
            if d + 1 < width:
                out[1:] += a[: ln - 1] * diags[d + 1]
            if d >= 1 and d - 1 < width:
                out += a[:ln] * diags[d - 1][1 : ln + 1]
            elif d == 0 and width > 1:
                out[: n - 1] += a * diags[1]
            new.append(out)
        diags = new
    return diags


def _site_index(state, i):
    return state.config.site_index(i)


def local_charge(state, m, i, modified=False):
    """Charge density of order m at site i.

    The modified family replaces the order-0 density by the stretch, which
    exists only below the top site.
    """
    if m < 0:
        raise ValueError("charge order must be nonnegative")
    ii = _site_index(state, i)
    if m == 0:
        if not modified:
            return 1.0
        if i >= state.config.n2:
            raise IndexError("stretch charge needs a site below the top end")
        return state.q[ii + 1] - state.q[ii]
    n = state.config.n_sites
    lo = max(0, ii - m)
    hi = min(n, ii + m + 1)
    diags = band_power(state.a[lo : hi - 1], state.b[lo:hi], m)
    return float(diags[0][ii - lo])


def local_current(state, m, i):
    """Current density of order m at site i (needs the bond below i)."""
    if m < 0:
        raise ValueError("charge order must be nonnegative")
    ii = _site_index(state, i)
    if ii < 1:
        raise IndexError("current needs a site above the bottom end")
    if m == 0:
        return 0.0
    n = state.config.n_sites
    lo = max(0, ii - m - 1)
    hi = min(n, ii + m + 1)
    diags = band_power(state.a[lo : hi - 1], state.b[lo:hi], m)
    return float(state.a[ii - 1] * diags[1][ii - 1 - lo])


def charge_field(state, m, modified=False):
    """Charge densities of order m on every site, as one vectorized pass."""
    if m < 0:
        raise ValueError("charge order must be nonnegative")
    n = state.config.n_sites
    if m == 0:
        if not modified:
            return ChargeField(0, np.ones(n), False)
        values = np.empty(n)
        values[:-1] = state.q[1:] - state.q[:-1]
        values[-1] = np.nan  # the top site has no stretch
        return ChargeField(0, values, True)
    diags = band_power(state.a, state.b, m)
    return ChargeField(m, diags[0], modified)


def current_field(state, m):
    """Current densities of order m on sites above the bottom end.

    Entry 0 (the bottom site) is NaN: its current would need the bond
    below the window.
    """
    n = state.config.n_sites
    values = np.full(n, np.nan)
    if m == 0:
        values[1:] = 0.0
        return values
    diags = band_power(state.a, state.b, m)
    values[1:] = state.a * diags[1]
    return values


def integrated_current(state0, state1, m, q_left, q_right):
    """Net charge of order m transported between two position cuts.

    Counts the charge initially below q_left minus the charge finally
    below q_right, using the particle positions of each state as the
    membership test.
    """
    if state0.config is not state1.config and state0.config != state1.config:
        raise ValueError("states must share a lattice config")
    k0 = charge_field(state0, m).values
    k1 = charge_field(state1, m).values
    return float(
        k0[state0.q < q_left].sum() - k1[state1.q < q_right].sum()
    )
