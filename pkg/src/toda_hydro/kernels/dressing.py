"""Dressing transform and the derived hydrodynamic quantities.

Everything here is a dense Nystrom solve of

    (I - 2*theta * L_w * diag(rho_beta)) f_dr = f

on the product-integration grid, where L_w is the log-kernel weight matrix
(the factor 2 belongs to the operator T f = 2 int log|x-y| f(y) dy).  The
LU factorization is computed once per (grid, profiles) pair and cached on
the grid.
"""

import math

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

__all__ = [
    "ConditioningError",
    "MonotonicityError",
    "DressedProfiles",
    "VelocityMap",
    "dress",
    "dressed_profiles",
    "effective_velocity",
    "operator_F",
    "bilinear_C",
    "sigma2",
]

_COND_LIMIT = 1e12


class ConditioningError(RuntimeError):
    """The Nystrom matrix is numerically singular (theta too large)."""


class MonotonicityError(RuntimeError):
    """The effective velocity failed to be strictly increasing on nodes."""


def _factorization(grid, profiles):
    """(LU, condition estimate) for the dressing matrix, cached on the grid."""
    key = ("dress", id(profiles))
    hit = grid._factor_cache.get(key)
    if hit is not None and hit[0] is profiles:
        return hit[1], hit[2]
    theta = profiles.theta
    a = (-2.0 * theta) * (grid.log_kernel * profiles.rho_beta[None, :])
    a[np.diag_indices_from(a)] += 1.0
    anorm = float(np.abs(a).sum(axis=0).max())
    lu, piv = lu_factor(a)
    gecon = get_lapack_funcs("gecon", (a,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0:
        raise ConditioningError("condition estimation failed (info=%d)" % info)
    cond = math.inf if rcond == 0 else 1.0 / float(rcond)
    if not cond < _COND_LIMIT:
        raise ConditioningError(
            "dressing matrix condition estimate %.3e at theta=%g exceeds %.0e; "
            "the dressing is not numerically invertible here"
            % (cond, theta, _COND_LIMIT)
        )
    grid._factor_cache[key] = (profiles, (lu, piv), cond)
    return (lu, piv), cond


def dress(grid, profiles, f):
    """Solve the dressing equation for nodal data f (vector or stacked columns)."""
    lu, _ = _factorization(grid, profiles)
    f = np.asarray(f, dtype=float)
    return lu_solve(lu, f)


def dressing_condition(grid, profiles):
    """1-norm condition estimate of the dressing matrix."""
    _, cond = _factorization(grid, profiles)
    return cond


class VelocityMap:
    """Monotone cubic representation of v_eff with a bisection inverse."""

    def __init__(self, nodes, values):
        self.nodes = np.asarray(nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self._interp = PchipInterpolator(self.nodes, self.values)
        self._deriv = self._interp.derivative()

    def __call__(self, x):
        return self._interp(x)

    def derivative(self, x):
        return self._deriv(x)

    @property
    def range(self):
        return float(self.values[0]), float(self.values[-1])

    def inverse(self, y, tol=1e-12):
        """Solve v_eff(x) = y by bisection; y may be scalar or array."""
        y = np.asarray(y, dtype=float)
        scalar = y.ndim == 0
        yf = np.atleast_1d(y).astype(float)
        lo2, hi2 = self.range
        if np.any(yf < lo2) or np.any(yf > hi2):
            raise ValueError("velocity value outside the representable range")
        lo = np.full_like(yf, self.nodes[0])
        hi = np.full_like(yf, self.nodes[-1])
        span = float(self.nodes[-1] - self.nodes[0])
        n_iter = max(1, int(math.ceil(math.log2(span / tol))))
        for _ in range(n_iter):
            mid = 0.5 * (lo + hi)
            below = self._interp(mid) < yf
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        return float(out[0]) if scalar else out


def effective_velocity(profiles, dressed):
    """v_eff = s1_dr / s0_dr with its monotone interpolant.

    `dressed` is anything exposing s0_dr and s1_dr nodal arrays.  Signals
    if s0_dr changes sign against sgn(alpha) or if monotonicity fails.
    """
    grid = profiles.grid
    s0 = np.asarray(dressed.s0_dr, dtype=float)
    s1 = np.asarray(dressed.s1_dr, dtype=float)
    sign = math.copysign(1.0, profiles.alpha)
    if not np.all(s0 * sign > 0):
        raise MonotonicityError(
            "s0_dr changes sign on the grid; dressing output is unusable"
        )
    v = s1 / s0
    if not np.all(np.diff(v) > 0):
        worst = int(np.argmin(np.diff(v)))
        raise MonotonicityError(
            "v_eff not strictly increasing near lambda=%.4f "
            "(grid too coarse or theta out of range)" % grid.nodes[worst]
        )
    return v, VelocityMap(grid.nodes, v)


class DressedProfiles:
    """Dressed constant/identity test functions and the effective velocity."""

    def __init__(self, grid, profiles):
        self.grid = grid
        self.profiles = profiles
        stacked = np.column_stack([np.ones(grid.size), grid.nodes])
        out = dress(grid, profiles, stacked)
        self.s0_dr = out[:, 0]
        self.s1_dr = out[:, 1]
        _, self.condition_estimate = _factorization(grid, profiles)
        self.v_eff, self.velocity = effective_velocity(profiles, self)
        self._s0_interp = grid.interpolant(self.s0_dr)
        self._s1_interp = grid.interpolant(self.s1_dr)

    def s0_dr_at(self, x):
        return self._s0_interp(x)

    def s1_dr_at(self, x):
        return self._s1_interp(x)

    def v_eff_at(self, x):
        return self.velocity(x)

    def v_eff_prime_at(self, x):
        return self.velocity.derivative(x)

    def v_eff_inverse(self, y, tol=1e-12):
        return self.velocity.inverse(y, tol)


def dressed_profiles(grid, profiles):
    return DressedProfiles(grid, profiles)


def operator_F(grid, profiles, dressed, h):
    """F h = h_dr - <h, s0>_rho * s0_dr."""
    h = np.asarray(h, dtype=float)
    h_dr = dress(grid, profiles, h)
    mu = grid.integrate(h * profiles.rho)
    return h_dr - mu * dressed.s0_dr


def bilinear_C(grid, profiles, dressed, phi1, phi2):
    """The limiting covariance form of the modified charges.

    C(phi1, phi2) = < D(phi1 - (1+alpha) mu1 s0), D(phi2 - (1+alpha) mu2 s0) >_rho
    with mu_i = <phi_i, s0>_rho.  The (1+alpha) accounts for the stretch
    charge replacing the trace charge at order zero.
    """
    rho = profiles.rho
    shift = 1.0 + profiles.alpha
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    mu1 = grid.integrate(phi1 * rho)
    mu2 = grid.integrate(phi2 * rho)
    args = np.column_stack([phi1 - shift * mu1, phi2 - shift * mu2])
    out = dress(grid, profiles, args)
    return grid.integrate(out[:, 0] * out[:, 1] * rho)


def sigma2(grid, profiles, dressed, phi):
    """sigma^2(phi) = C(phi - mu s0, phi - mu s0) = ||F phi||^2_rho."""
    phi = np.asarray(phi, dtype=float)
    mu = grid.integrate(phi * profiles.rho)
    centered = phi - mu
    out = dress(grid, profiles, centered)
    return grid.integrate(out * out * profiles.rho)
