"""Scaling limits of charge-charge two-point functions.

The smeared limit integrates the dressed matrix entry against
f(tau v_eff / alpha); the pointwise density is the same entry pushed
through the change of variables x = tau v_eff(lambda) / alpha, which is
well defined because v_eff is strictly increasing.
"""

import csv
from typing import NamedTuple

import numpy as np

__all__ = [
    "twopoint_limit",
    "twopoint_pointwise",
    "PointwiseDensity",
    "export_scaling_table",
]


def _entry(kernels, m, n, at=None):
    """The (m, n) matrix entry of the limit integrand, nodal or off-node."""
    alpha = kernels.alpha
    dp = kernels.dressed
    if at is None:
        s0 = dp.s0_dr
        fm = kernels.f_power(m)
        fn = kernels.f_power(n)
    else:
        s0 = dp.s0_dr_at(at)
        fm = kernels.f_power_interp(m)(at)
        fn = kernels.f_power_interp(n)(at)
    if m >= 1 and n >= 1:
        return fm * fn
    if m == 0 and n == 0:
        return alpha**2 * s0**2
    other = fn if m == 0 else fm
    return -alpha * s0 * other


def twopoint_limit(m, n, tau, f, kernels):
    """lim sum_j f(j/T) S_{m,n}(j, tau T), by grid quadrature."""
    if m < 0 or n < 0:
        raise ValueError("charge orders must be nonnegative")
    grid = kernels.grid
    arg = (tau / kernels.alpha) * kernels.dressed.v_eff
    fv = np.asarray(f(arg), dtype=float)
    integrand = _entry(kernels, m, n) * fv * kernels.profiles.rho
    return grid.integrate(integrand)


class PointwiseDensity(NamedTuple):
    value: float
    inside_light_cone: bool


def twopoint_pointwise(m, n, x, tau, kernels):
    """Density of the two-point scaling function at ray coordinate x.

    Returns (value, inside_light_cone); outside the reachable velocity
    range the density is 0 and the flag is False.
    """
    if tau <= 0:
        raise ValueError("tau must be positive for the pointwise density")
    alpha = kernels.alpha
    dp = kernels.dressed
    target = alpha * x / tau
    vlo, vhi = dp.velocity.range
    if not vlo < target < vhi:
        return PointwiseDensity(0.0, False)
    lam = float(dp.v_eff_inverse(target))
    entry = float(_entry(kernels, m, n, at=lam))
    rho = float(kernels.profiles.rho_at(lam))
    jac = alpha / (tau * float(dp.v_eff_prime_at(lam)))
    return PointwiseDensity(entry * rho * jac, True)


def export_scaling_table(path, rows):
    """Write (x, tau, m, n, value) records as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("x", "tau", "m", "n", "value"))
        for x, tau, m, n, value in rows:
            writer.writerow(
                ["%.17g" % x, "%.17g" % tau, "%d" % m, "%d" % n, "%.17g" % value]
            )
