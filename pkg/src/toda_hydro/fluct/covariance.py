"""White-noise covariances, current-fluctuation limits, q0 variance.

The double integral over (r, lambda) collapses to a single lambda
integral because the r-product of two indicator differences is a signed
interval overlap, affine-piecewise in v_eff(lambda).  For smooth-prefactor
pairs the lambda integral is taken exactly: the quadrature is split at
every overlap kink (found by inverting v_eff) so each piece is panelwise
analytic.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..kernels.special import ell
from .indicators import CovarianceQuery, IndicatorProfile

__all__ = [
    "RealizedProfile",
    "realize_profile",
    "overlap_values",
    "paired_cov",
    "wn_cov",
    "current_limit_cov",
    "q0_variance",
]


@dataclass(frozen=True)
class RealizedProfile:
    """c(lambda) nodal prefactor with the half-line pair (u, w = a + b v)."""

    c: np.ndarray
    u: float
    a: float
    b: float
    smooth: bool  # prefactor safe to interpolate panelwise


def realize_profile(kernels, prof, dressed):
    alpha = kernels.alpha
    if not math.isfinite(alpha):
        raise ValueError("indicator profiles need finite alpha (theta > 0)")
    dp = kernels.dressed
    if prof.kind == "phi_m":
        c = kernels.s_dr(prof.m) if dressed else kernels.grid.nodes ** prof.m
        u = prof.q / alpha
        a = prof.q_prime / alpha
        b = -prof.tau / alpha
        return RealizedProfile(c, u, a, b, smooth=True)
    v_at = float(dp.v_eff_at(prof.Lambda))
    if dressed:
        c = kernels.t_solution(prof.Lambda).nodes_value
    else:
        c = 2.0 * ell(prof.Lambda - kernels.grid.nodes)
    u = prof.kappa
    a = prof.kappa + prof.tau * v_at / alpha
    b = -prof.tau / alpha
    return RealizedProfile(c, u, a, b, smooth=False)


def overlap_values(r1, r2, v):
    """Signed r-overlap of two realized profiles at velocity values v."""
    v = np.asarray(v, dtype=float)
    w1 = r1.a + r1.b * v
    w2 = r2.a + r2.b * v
    lo1 = np.minimum(r1.u, w1)
    hi1 = np.maximum(r1.u, w1)
    lo2 = np.minimum(r2.u, w2)
    hi2 = np.maximum(r2.u, w2)
    ov = np.maximum(0.0, np.minimum(hi1, hi2) - np.maximum(lo1, lo2))
    return np.sign(r1.u - w1) * np.sign(r2.u - w2) * ov


def _kink_lambdas(kernels, r1, r2):
    """v_eff preimages of every velocity where the overlap changes slope."""
    vs = []
    for (u, a, b) in ((r1.u, r1.a, r1.b), (r2.u, r2.a, r2.b)):
        if b != 0.0:
            vs.append((u - a) / b)
    for u in (r1.u, r2.u):
        for (a, b) in ((r1.a, r1.b), (r2.a, r2.b)):
            if b != 0.0:
                vs.append((u - a) / b)
    if r1.b != r2.b:
        vs.append((r2.a - r1.a) / (r1.b - r2.b))
    vmap = kernels.dressed.velocity
    lo, hi = vmap.range
    out = []
    for v in vs:
        if lo < v < hi:
            out.append(float(vmap.inverse(v)))
    return sorted(set(out))


def _split_quadrature(kernels, integrand, cuts):
    """Integrate a callable over the grid range, cutting panels at `cuts`."""
    from ..kernels.grid import gauss_panels

    grid = kernels.grid
    edges = grid.panel_edges
    interior = [c for c in cuts if edges[0] < c < edges[-1]]
    pieces = np.unique(np.concatenate((edges, np.asarray(interior, dtype=float))))
    y, w = gauss_panels(pieces, grid.nodes_per_panel)
    return float(np.dot(w, integrand(y)))


def paired_cov(kernels, r1, r2):
    """lambda-integral of c1 c2 * overlap * rho for two realized profiles."""
    grid = kernels.grid
    dp = kernels.dressed
    rho = kernels.profiles.rho
    if r1.smooth and r2.smooth:
        g = grid.interpolant(r1.c * r2.c * rho)
        vmap = dp.velocity

        def integrand(y):
            return g(y) * overlap_values(r1, r2, vmap(y))

        return _split_quadrature(kernels, integrand, _kink_lambdas(kernels, r1, r2))
    # A log-singular prefactor cannot be interpolated across its panel;
    # fall back to the plain nodal rule (the field module integrates these
    # pairings on its own singularity-graded mesh instead).
    vals = overlap_values(r1, r2, dp.v_eff)
    return grid.integrate(r1.c * r2.c * vals * rho)


def wn_cov(query, kernels):
    """Covariance of the white noise paired at two indicator profiles."""
    if not isinstance(query, CovarianceQuery):
        raise TypeError("wn_cov expects a CovarianceQuery")
    r1 = realize_profile(kernels, query.left, query.dressed)
    r2 = realize_profile(kernels, query.right, query.dressed)
    return paired_cov(kernels, r1, r2)


def current_limit_cov(i, j, kernels):
    """Limit covariance of two rescaled integrated currents.

    Arguments are (m, q, q_prime, tau) tuples; the paired profiles carry
    the dressed prefactor by construction.
    """
    m1, q1, qp1, tau1 = i
    m2, q2, qp2, tau2 = j
    left = IndicatorProfile.phi(m1, q1, qp1, tau1)
    right = IndicatorProfile.phi(m2, q2, qp2, tau2)
    return wn_cov(CovarianceQuery(left, right, dressed=True), kernels)


def q0_variance(tau, kernels):
    """Variance of the limiting tagged-particle Brownian motion at time tau.

    alpha * tau * int |s0_dr|^2 |v_eff| rho, with the |v_eff| kink split
    out exactly at the zero crossing.  Deliberately a direct formula, not
    a routed overlap query: the two paths cross-validate each other.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if tau == 0:
        return 0.0
    grid = kernels.grid
    dp = kernels.dressed
    g = dp.s0_dr**2 * dp.v_eff * kernels.profiles.rho
    lo, hi = grid.panel_edges[0], grid.panel_edges[-1]
    vlo, vhi = dp.velocity.range
    if vlo < 0.0 < vhi:
        lam0 = float(dp.v_eff_inverse(0.0))
        integral = grid.integrate_between(g, lam0, hi) - grid.integrate_between(
            g, lo, lam0
        )
    else:
        integral = abs(grid.integrate(g))
    return kernels.alpha * tau * integral
