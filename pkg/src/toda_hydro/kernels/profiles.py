"""Equilibrium spectral profiles on a quadrature grid.

rho_beta is the Gaussian-weighted level density of the random flow
matrix; rho (the density of states) is its theta-derivative of
theta * rho_beta, taken by central finite difference; alpha is the mean
inter-particle spacing log(beta) - psi(theta).
"""

import math

import numpy as np

from .special import digamma, mathfrak_F

__all__ = ["EquilibriumProfiles", "equilibrium_profiles", "GridResolutionError"]


class GridResolutionError(RuntimeError):
    """The grid cannot represent the profiles to the required mass accuracy."""


def _rho_beta_values(beta, theta, x):
    """sqrt(beta/2pi) * |F_theta(sqrt(beta) x)|^(-2) * exp(-beta x^2 / 2)."""
    f = mathfrak_F(theta, math.sqrt(beta) * np.asarray(x, dtype=float))
    mag2 = np.abs(f) ** 2
    return math.sqrt(beta / (2.0 * math.pi)) * np.exp(-0.5 * beta * np.asarray(x) ** 2) / mag2


def _gaussian(beta, x):
    return math.sqrt(beta / (2.0 * math.pi)) * np.exp(
        -0.5 * beta * np.asarray(x, dtype=float) ** 2
    )


class EquilibriumProfiles:
    """Nodal values of rho_beta and rho, plus the spacing alpha.

    Also provides off-node evaluation (recomputation, not interpolation)
    for downstream refinement quadratures and histogram comparisons.

    theta == 0 is the degenerate free-streaming point: both densities
    collapse to the beta-Gaussian and alpha diverges.  It is kept because
    the dressing operator is the exact identity there, which anchors the
    validation suite.
    """

    def __init__(self, grid, beta, theta, dtheta, renormalize=False):
        self.grid = grid
        self.beta = float(beta)
        self.theta = float(theta)
        self.dtheta = float(dtheta)
        self.alpha = math.inf if theta == 0 else math.log(beta) - digamma(theta)

        x = grid.nodes
        if theta == 0:
            self.rho_beta = _gaussian(beta, x)
            self.rho = self.rho_beta.copy()
        else:
            self.rho_beta = _rho_beta_values(beta, theta, x)
            up = (theta + dtheta) * _rho_beta_values(beta, theta + dtheta, x)
            dn = (theta - dtheta) * _rho_beta_values(beta, theta - dtheta, x)
            self.rho = (up - dn) / (2.0 * dtheta)

        self.mass_defect_rho_beta = abs(grid.integrate(self.rho_beta) - 1.0)
        self.mass_defect_rho = abs(grid.integrate(self.rho) - 1.0)
        if self.mass_defect_rho > 1e-3:
            raise GridResolutionError(
                "density-of-states mass defect %.3e exceeds 1e-3; "
                "the grid is too coarse" % self.mass_defect_rho
            )
        self.renormalized = bool(renormalize)
        self._rho_scale = 1.0
        if renormalize:
            self._rho_scale = 1.0 / grid.integrate(self.rho)
            self.rho = self.rho * self._rho_scale

    def rho_beta_at(self, x):
        if self.theta == 0:
            return _gaussian(self.beta, x)
        return _rho_beta_values(self.beta, self.theta, x)

    def rho_at(self, x):
        x = np.asarray(x, dtype=float)
        if self.theta == 0:
            return _gaussian(self.beta, x)
        up = (self.theta + self.dtheta) * _rho_beta_values(
            self.beta, self.theta + self.dtheta, x
        )
        dn = (self.theta - self.dtheta) * _rho_beta_values(
            self.beta, self.theta - self.dtheta, x
        )
        return self._rho_scale * (up - dn) / (2.0 * self.dtheta)


def equilibrium_profiles(grid, beta, theta, dtheta=None, renormalize=False):
    """Build EquilibriumProfiles; dtheta defaults to 1e-4 * theta."""
    if beta <= 0 or theta < 0:
        raise ValueError("beta must be positive and theta nonnegative")
    if theta == 0:
        return EquilibriumProfiles(grid, beta, 0.0, 0.0, renormalize)
    if dtheta is None:
        dtheta = 1e-4 * theta
    if not 0 < dtheta < theta / 10.0:
        raise ValueError("dtheta must lie in (0, theta/10)")
    return EquilibriumProfiles(grid, beta, theta, dtheta, renormalize)
